//! Polynomial ridge regression solved through the normal equations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DataError, FoldAssignment, Scaler};
use crate::evalstat::metrics::{r_square, MetricError};
use crate::linalg::{dot, solve_spd_with_jitter, NotPositiveDefinite, SquareMatrix};

#[derive(Debug, Error)]
pub enum LinearError {
    #[error("polynomial degree must be 1, 2 or 3, got {0}")]
    InvalidDegree(u8),
    #[error("ridge coefficient must be finite and non-negative, got {0}")]
    InvalidLambda(f64),
    #[error("design matrix has {rows} rows but {targets} targets")]
    Shape { rows: usize, targets: usize },
    #[error("cannot fit on an empty design matrix")]
    Empty,
    #[error("input has {found} features, model expects {expected}")]
    Arity { expected: usize, found: usize },
    #[error("normal equations are singular after jitter: {0}")]
    Singular(#[from] NotPositiveDefinite),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSpec {
    pub degree: u8,
    /// Full multivariate monomials instead of per-feature powers.
    pub interactions: bool,
    pub lambda: f64,
}

impl PolynomialSpec {
    pub fn new(degree: u8, interactions: bool, lambda: f64) -> Result<Self, LinearError> {
        let spec = Self {
            degree,
            interactions,
            lambda,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), LinearError> {
        if !(1..=3).contains(&self.degree) {
            return Err(LinearError::InvalidDegree(self.degree));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(LinearError::InvalidLambda(self.lambda));
        }
        Ok(())
    }
}

/// Number of basis terms (bias included).
pub fn basis_size(n_inputs: usize, degree: u8, interactions: bool) -> usize {
    let d = degree as usize;
    if interactions {
        // C(n + d, d)
        (1..=d).fold(1usize, |acc, i| acc * (n_inputs + i) / i)
    } else {
        1 + n_inputs * d
    }
}

/// Expands `x` into a polynomial basis with the bias term first.
///
/// Per-feature ordering: `[1, x0, x0², .., x0^d, x1, .., x1^d, ..]`.
/// With interactions, monomials are grouped by total degree and, within a
/// degree, listed as non-decreasing index tuples in lexicographic order:
/// `[1, x0, x1, .., x0², x0x1, .., x1², ..]`.
pub fn expand_polynomial(x: &[f64], degree: u8, interactions: bool) -> Vec<f64> {
    let mut out = Vec::with_capacity(basis_size(x.len(), degree, interactions));
    out.push(1.0);
    if interactions {
        // Terms of degree t are the degree t-1 terms starting at index
        // `first[k]` multiplied by x_j for j >= the last factor of term k.
        let mut prev_start = 0;
        let mut last_factor: Vec<usize> = vec![0];
        for t in 1..=degree as usize {
            let prev_end = out.len();
            let mut next_last = Vec::new();
            for k in prev_start..prev_end {
                let from = if t == 1 { 0 } else { last_factor[k - prev_start] };
                for (j, &xj) in x.iter().enumerate().skip(from) {
                    out.push(out[k] * xj);
                    next_last.push(j);
                }
            }
            prev_start = prev_end;
            last_factor = next_last;
        }
    } else {
        for &xi in x {
            let mut p = 1.0;
            for _ in 0..degree {
                p *= xi;
                out.push(p);
            }
        }
    }
    out
}

/// Accumulated `XᵀX` and `Xᵀy`, reusable across ridge coefficients.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    xtx: SquareMatrix,
    xty: Vec<f64>,
    /// When set, column 0 is an unpenalized bias.
    bias_column: bool,
}

impl NormalEquations {
    pub fn from_rows<R: AsRef<[f64]>>(x: &[R], y: &[f64], bias_column: bool) -> Result<Self, LinearError> {
        if x.len() != y.len() {
            return Err(LinearError::Shape {
                rows: x.len(),
                targets: y.len(),
            });
        }
        let p = x.first().ok_or(LinearError::Empty)?.as_ref().len();
        let mut xtx = SquareMatrix::zeros(p);
        let mut xty = vec![0.0; p];
        for (row, &yi) in x.iter().zip(y) {
            let row = row.as_ref();
            if row.len() != p {
                return Err(LinearError::Arity {
                    expected: p,
                    found: row.len(),
                });
            }
            xtx.rank_one_upper(row, 1.0);
            for (acc, &v) in xty.iter_mut().zip(row) {
                *acc += v * yi;
            }
        }
        xtx.mirror_upper();
        Ok(Self {
            xtx,
            xty,
            bias_column,
        })
    }

    /// Solves `(XᵀX + λI')w = Xᵀy`, where `I'` skips the bias column.
    pub fn solve(&self, lambda: f64) -> Result<Vec<f64>, LinearError> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(LinearError::InvalidLambda(lambda));
        }
        let mut a = self.xtx.clone();
        let start = usize::from(self.bias_column);
        for i in start..a.dim() {
            a.add_diag(i, lambda);
        }
        Ok(solve_spd_with_jitter(&a, &self.xty)?)
    }
}

/// Ridge weights for design matrix `x`. With `bias_column` the first column
/// is treated as an unpenalized intercept.
pub fn fit_ridge<R: AsRef<[f64]>>(
    x: &[R],
    y: &[f64],
    lambda: f64,
    bias_column: bool,
) -> Result<Vec<f64>, LinearError> {
    NormalEquations::from_rows(x, y, bias_column)?.solve(lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub spec: PolynomialSpec,
    pub n_inputs: usize,
    /// Bias first, then basis coefficients in [`expand_polynomial`] order.
    pub weights: Vec<f64>,
}

impl LinearModel {
    /// Fits on (already scaled) feature rows.
    pub fn fit<R: AsRef<[f64]>>(x: &[R], y: &[f64], spec: PolynomialSpec) -> Result<Self, LinearError> {
        spec.validate()?;
        let n_inputs = x.first().ok_or(LinearError::Empty)?.as_ref().len();
        let basis: Vec<Vec<f64>> = x
            .iter()
            .map(|r| expand_polynomial(r.as_ref(), spec.degree, spec.interactions))
            .collect();
        let weights = fit_ridge(&basis, y, spec.lambda, true)?;
        Ok(Self {
            spec,
            n_inputs,
            weights,
        })
    }

    pub fn from_weights(spec: PolynomialSpec, n_inputs: usize, weights: Vec<f64>) -> Result<Self, LinearError> {
        spec.validate()?;
        let expected = basis_size(n_inputs, spec.degree, spec.interactions);
        if weights.len() != expected {
            return Err(LinearError::Arity {
                expected,
                found: weights.len(),
            });
        }
        Ok(Self {
            spec,
            n_inputs,
            weights,
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64, LinearError> {
        if x.len() != self.n_inputs {
            return Err(LinearError::Arity {
                expected: self.n_inputs,
                found: x.len(),
            });
        }
        Ok(dot(
            &self.weights,
            &expand_polynomial(x, self.spec.degree, self.spec.interactions),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub degree: u8,
    pub lambda: f64,
    pub train_r2: f64,
    pub val_r2: f64,
}

/// Mean train/validation R² over folds for each (degree, λ) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
    /// Index of the row with the highest mean validation R²; the first one
    /// wins ties.
    pub best: usize,
}

impl CurveTable {
    pub fn best_row(&self) -> &CurveRow {
        &self.rows[self.best]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,lambda,train_r2,val_r2\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.degree, r.lambda, r.train_r2, r.val_r2);
        }
        out
    }
}

pub const DEFAULT_LAMBDAS: [f64; 8] = [0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2];

/// Sweeps a degree × λ grid over the folds of `x`/`y`. Features are min-max
/// scaled with a scaler fitted on each fold's training part.
pub fn sweep<R: AsRef<[f64]> + Sync>(
    x: &[R],
    y: &[f64],
    folds: &FoldAssignment,
    degrees: &[u8],
    lambdas: &[f64],
    interactions: bool,
) -> Result<CurveTable, LinearError> {
    if degrees.is_empty() || lambdas.is_empty() {
        return Err(LinearError::Empty);
    }
    for &d in degrees {
        PolynomialSpec::new(d, interactions, 0.0)?;
    }
    for &l in lambdas {
        if !(l.is_finite() && l >= 0.0) {
            return Err(LinearError::InvalidLambda(l));
        }
    }
    let cells = degrees.len() * lambdas.len();
    let mut train_sum = vec![0.0; cells];
    let mut val_sum = vec![0.0; cells];

    for fold in 0..folds.k {
        let train_idx = folds.train_indices(fold);
        let val_idx = folds.val_indices(fold);
        let train_x: Vec<&[f64]> = train_idx.iter().map(|&i| x[i].as_ref()).collect();
        let scaler = Scaler::fit(&train_x, None)?;
        let scale = |idx: &[usize]| -> Result<Vec<Vec<f64>>, DataError> {
            idx.iter().map(|&i| scaler.transform(x[i].as_ref())).collect()
        };
        let (tx, vx) = (scale(&train_idx)?, scale(&val_idx)?);
        let ty: Vec<f64> = train_idx.iter().map(|&i| y[i]).collect();
        let vy: Vec<f64> = val_idx.iter().map(|&i| y[i]).collect();

        for (di, &degree) in degrees.iter().enumerate() {
            let tb: Vec<Vec<f64>> = tx.iter().map(|r| expand_polynomial(r, degree, interactions)).collect();
            let vb: Vec<Vec<f64>> = vx.iter().map(|r| expand_polynomial(r, degree, interactions)).collect();
            let normal = NormalEquations::from_rows(&tb, &ty, true)?;
            for (li, &lambda) in lambdas.iter().enumerate() {
                let w = normal.solve(lambda)?;
                let tp: Vec<f64> = tb.iter().map(|b| dot(&w, b)).collect();
                let vp: Vec<f64> = vb.iter().map(|b| dot(&w, b)).collect();
                let cell = di * lambdas.len() + li;
                train_sum[cell] += r_square(&ty, &tp)?;
                val_sum[cell] += r_square(&vy, &vp)?;
            }
        }
    }

    let k = folds.k as f64;
    let mut rows = Vec::with_capacity(cells);
    for (di, &degree) in degrees.iter().enumerate() {
        for (li, &lambda) in lambdas.iter().enumerate() {
            let cell = di * lambdas.len() + li;
            rows.push(CurveRow {
                degree,
                lambda,
                train_r2: train_sum[cell] / k,
                val_r2: val_sum[cell] / k,
            });
        }
    }
    let best = rows
        .iter()
        .enumerate()
        .fold(0, |best, (i, r)| if r.val_r2 > rows[best].val_r2 { i } else { best });
    Ok(CurveTable { rows, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{assign_folds, Sample, Split};
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn per_feature_expansion() {
        assert_eq!(expand_polynomial(&[2.0], 3, false), vec![1.0, 2.0, 4.0, 8.0]);
        assert_eq!(expand_polynomial(&[2.0, 3.0], 2, false), vec![1.0, 2.0, 4.0, 3.0, 9.0]);
        let z = expand_polynomial(&[0.0; 10], 3, false);
        assert_eq!(z.len(), 31);
        assert_eq!(z[0], 1.0);
        assert!(z[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn interaction_expansion_order_and_size() {
        assert_eq!(
            expand_polynomial(&[2.0, 3.0], 2, true),
            vec![1.0, 2.0, 3.0, 4.0, 6.0, 9.0]
        );
        assert_eq!(
            expand_polynomial(&[2.0, 3.0], 3, true),
            vec![1.0, 2.0, 3.0, 4.0, 6.0, 9.0, 8.0, 12.0, 18.0, 27.0]
        );
        assert_eq!(expand_polynomial(&[0.5; 10], 3, true).len(), 286);
        assert_eq!(basis_size(10, 3, true), 286);
        let z = expand_polynomial(&[0.0; 4], 3, true);
        assert!(z[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exact_linear_fit() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 2.0 * i as f64).collect();
        let m = LinearModel::fit(&x, &y, PolynomialSpec::new(1, false, 0.0).unwrap()).unwrap();
        assert!((m.weights[1] - 2.0).abs() < 1e-10);
        assert!(m.weights[0].abs() < 1e-10);
        assert!((m.predict(&[5.0]).unwrap() - 10.0).abs() < 1e-8);
    }

    #[test]
    fn unbiased_identity_ridge() {
        // (I + I)w = y
        let x = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let w = fit_ridge(&x, &[1.0, 0.0], 1.0, false).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-15 && w[1].abs() < 1e-15);
    }

    #[test]
    fn huge_lambda_predicts_mean() {
        let mut rng = seeded(5);
        let x: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let y: Vec<f64> = x.iter().map(|r| 3.0 + r[0] - 2.0 * r[1] + rng.random_range(-0.1..0.1)).collect();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let m = LinearModel::fit(&x, &y, PolynomialSpec::new(2, false, 1e12).unwrap()).unwrap();
        assert!(m.weights[1..].iter().all(|w| w.abs() < 1e-9));
        for r in &x {
            assert!((m.predict(r).unwrap() - mean).abs() <= 1e-6 * mean.abs());
        }
    }

    #[test]
    fn bias_only_model_is_constant() {
        let spec = PolynomialSpec::new(2, false, 0.0).unwrap();
        let mut w = vec![0.0; basis_size(3, 2, false)];
        w[0] = 1.0;
        let m = LinearModel::from_weights(spec, 3, w).unwrap();
        assert_eq!(m.predict(&[4.0, -2.0, 9.0]).unwrap(), 1.0);
        assert!(matches!(m.predict(&[1.0]), Err(LinearError::Arity { expected: 3, found: 1 })));
    }

    #[test]
    fn constant_feature_handled_by_jitter() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, 0.0]).collect();
        let y: Vec<f64> = (0..8).map(|i| 1.0 + i as f64).collect();
        let m = LinearModel::fit(&x, &y, PolynomialSpec::new(2, false, 0.0).unwrap()).unwrap();
        assert!(m.weights.iter().all(|w| w.is_finite()));
        assert!((m.predict(&[3.0, 0.0]).unwrap() - 4.0).abs() < 1e-6);
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(PolynomialSpec::new(4, false, 0.0), Err(LinearError::InvalidDegree(4))));
        assert!(matches!(PolynomialSpec::new(1, false, -1.0), Err(LinearError::InvalidLambda(_))));
    }

    fn linear_data(n: usize, noise: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>, FoldAssignment) {
        let mut rng = seeded(seed);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.random_range(0.0..5.0)).collect())
            .collect();
        let y: Vec<f64> = x
            .iter()
            .map(|r| 1.0 + 2.0 * r[0] - r[1] + 0.5 * r[2] + noise * rng.random_range(-1.0..1.0))
            .collect();
        let samples: Vec<Sample> = (0..n)
            .map(|i| Sample {
                source_record_id: i.to_string(),
                features: x[i].clone(),
                target: y[i],
                split: Split::TrainVal,
            })
            .collect();
        let folds = assign_folds(&samples, 5, 1, false).unwrap();
        (x, y, folds)
    }

    #[test]
    fn sweep_single_cell_and_exact_fit() {
        let (x, y, folds) = linear_data(60, 0.0, 2);
        let table = sweep(&x, &y, &folds, &[1], &[0.0], false).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert!((table.rows[0].train_r2 - 1.0).abs() < 1e-9);
        assert!(table.to_csv().starts_with("degree,lambda,train_r2,val_r2\n1,0,"));
    }

    #[test]
    fn sweep_argmax_and_monotone_train_r2() {
        let (x, y, folds) = linear_data(80, 0.5, 3);
        let lambdas = [0.0, 1e-2, 1.0, 1e2, 1e4, 1e12];
        let table = sweep(&x, &y, &folds, &[1, 2, 3], &lambdas, false).unwrap();
        assert_eq!(table.rows.len(), 18);
        let best = table.best_row().val_r2;
        assert!(table.rows.iter().all(|r| r.val_r2 <= best));
        for d in 0..3 {
            let rows = &table.rows[d * 6..(d + 1) * 6];
            for w in rows.windows(2) {
                assert!(w[1].train_r2 <= w[0].train_r2 + 1e-12);
            }
            assert!(rows[5].val_r2 <= best);
        }
    }
}
