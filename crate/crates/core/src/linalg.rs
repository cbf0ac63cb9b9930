//! Dense symmetric positive-definite solves used by ridge regression and
//! Levenberg-Marquardt.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("matrix is not positive definite (pivot {pivot} at row {row}, condition estimate {condition:e})")]
pub struct NotPositiveDefinite {
    pub row: usize,
    pub pivot: f64,
    pub condition: f64,
}

/// Relative pivot threshold below which a factorization is rejected.
const PIVOT_TOL: f64 = 1e-14;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add_diag(&mut self, i: usize, v: f64) {
        self.data[i * self.n + i] += v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Adds `w * v vᵀ` to the upper triangle. Call [`Self::mirror_upper`]
    /// once all updates are done.
    pub fn rank_one_upper(&mut self, v: &[f64], w: f64) {
        let n = self.n;
        for i in 0..n {
            let vi = w * v[i];
            if vi == 0.0 {
                continue;
            }
            let row = &mut self.data[i * n..(i + 1) * n];
            for j in i..n {
                row[j] += vi * v[j];
            }
        }
    }

    pub fn mirror_upper(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in 0..i {
                self.data[i * n + j] = self.data[j * n + i];
            }
        }
    }

    /// Cholesky factorization `A = L Lᵀ`; returns `L` (row-major, lower).
    pub fn cholesky(&self) -> Result<Cholesky, NotPositiveDefinite> {
        let n = self.n;
        let max_diag = (0..n).map(|i| self.get(i, i).abs()).fold(0.0, f64::max);
        let mut l = vec![0.0; n * n];
        let mut min_pivot = f64::INFINITY;
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            min_pivot = min_pivot.min(d);
            if !(d > PIVOT_TOL * max_diag) {
                return Err(NotPositiveDefinite {
                    row: j,
                    pivot: d,
                    condition: if d > 0.0 { max_diag / d } else { f64::INFINITY },
                });
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(Cholesky {
            n,
            l,
            condition: if n == 0 { 1.0 } else { max_diag / min_pivot },
        })
    }
}

#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
    /// Ratio of the largest diagonal entry to the smallest pivot.
    pub condition: f64,
}

impl Cholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}

/// Solves `A x = b` for symmetric positive-definite `A`. On failure the
/// diagonal is jittered by `1e-10 * trace / n` and the factorization is
/// retried once.
pub fn solve_spd_with_jitter(a: &SquareMatrix, b: &[f64]) -> Result<Vec<f64>, NotPositiveDefinite> {
    match a.cholesky() {
        Ok(ch) => Ok(ch.solve(b)),
        Err(_) => {
            let n = a.dim();
            let jitter = 1e-10 * a.trace() / n as f64;
            let mut shifted = a.clone();
            for i in 0..n {
                shifted.add_diag(i, jitter);
            }
            shifted.cholesky().map(|ch| ch.solve(b))
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
