use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::SvrError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `xᵀz`
    Linear,
    /// `(xᵀz + coef0)^degree`
    Polynomial { degree: u32, coef0: f64 },
    /// `exp(−gamma ‖x − z‖²)`; also known as RBF.
    Gaussian { gamma: f64 },
}

impl KernelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Polynomial { .. } => "polynomial",
            KernelSpec::Gaussian { .. } => "gaussian",
        }
    }

    pub fn validate(&self) -> Result<(), SvrError> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { degree, coef0 } => {
                if degree >= 1 && coef0.is_finite() {
                    Ok(())
                } else {
                    Err(SvrError::InvalidKernel(format!("polynomial degree {degree}, coef0 {coef0}")))
                }
            }
            KernelSpec::Gaussian { gamma } => {
                if gamma.is_finite() && gamma > 0.0 {
                    Ok(())
                } else {
                    Err(SvrError::InvalidKernel(format!("gaussian gamma {gamma}")))
                }
            }
        }
    }

    /// Evaluates the kernel without an arity check.
    pub(crate) fn eval_unchecked(&self, x: &[f64], z: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => x.iter().zip(z).map(|(a, b)| a * b).sum(),
            KernelSpec::Polynomial { degree, coef0 } => {
                let d: f64 = x.iter().zip(z).map(|(a, b)| a * b).sum();
                (d + coef0).powi(degree as i32)
            }
            KernelSpec::Gaussian { gamma } => {
                let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// `1 / (n_features · variance of all feature values)`, falling back to
/// `1 / n_features` for a zero variance.
pub fn default_gamma<R: AsRef<[f64]>>(x: &[R]) -> f64 {
    let n_features = x.first().map_or(1, |r| r.as_ref().len()).max(1);
    let values: Vec<f64> = x.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
    if values.is_empty() {
        return 1.0 / n_features as f64;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
    if var > 0.0 {
        1.0 / (n_features as f64 * var)
    } else {
        1.0 / n_features as f64
    }
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], z: &[f64]) -> Result<f64, SvrError> {
    if x.len() != z.len() {
        return Err(SvrError::Arity {
            expected: x.len(),
            found: z.len(),
        });
    }
    Ok(spec.eval_unchecked(x, z))
}

/// Least-recently-used cache of kernel matrix rows, bounded in bytes.
pub(crate) struct KernelCache<'a> {
    x: &'a [Vec<f64>],
    kernel: KernelSpec,
    rows: Vec<Option<Rc<[f64]>>>,
    last_used: Vec<u64>,
    clock: u64,
    cached: usize,
    capacity: usize,
    diag: Vec<f64>,
}

impl<'a> KernelCache<'a> {
    pub fn new(x: &'a [Vec<f64>], kernel: KernelSpec, cache_mb: f64) -> Self {
        let n = x.len();
        let row_bytes = (n * std::mem::size_of::<f64>()).max(1) as f64;
        let capacity = ((cache_mb * 1024.0 * 1024.0 / row_bytes) as usize).clamp(2, n.max(2));
        let diag = x.iter().map(|r| kernel.eval_unchecked(r, r)).collect();
        Self {
            x,
            kernel,
            rows: vec![None; n],
            last_used: vec![0; n],
            clock: 0,
            cached: 0,
            capacity,
            diag,
        }
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }

    pub fn row(&mut self, i: usize) -> Rc<[f64]> {
        self.clock += 1;
        self.last_used[i] = self.clock;
        if let Some(r) = &self.rows[i] {
            return Rc::clone(r);
        }
        if self.cached >= self.capacity {
            let victim = (0..self.rows.len())
                .filter(|&k| self.rows[k].is_some() && k != i)
                .min_by_key(|&k| self.last_used[k]);
            if let Some(v) = victim {
                self.rows[v] = None;
                self.cached -= 1;
            }
        }
        let xi = &self.x[i];
        let row: Rc<[f64]> = self.x.iter().map(|xj| self.kernel.eval_unchecked(xi, xj)).collect();
        self.rows[i] = Some(Rc::clone(&row));
        self.cached += 1;
        row
    }

    #[cfg(test)]
    pub fn cached_rows(&self) -> usize {
        self.cached
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        let g = KernelSpec::Gaussian { gamma: 0.7 };
        assert_eq!(kernel_eval(&g, &[1.0, -2.0], &[1.0, -2.0]).unwrap(), 1.0);
        assert_eq!(kernel_eval(&KernelSpec::Linear, &[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        let p = KernelSpec::Polynomial { degree: 2, coef0: 1.0 };
        assert_eq!(kernel_eval(&p, &[1.0], &[1.0]).unwrap(), 4.0);
        assert!(matches!(kernel_eval(&p, &[1.0], &[1.0, 2.0]), Err(SvrError::Arity { .. })));
    }

    #[test]
    fn invalid_kernels() {
        assert!(KernelSpec::Gaussian { gamma: 0.0 }.validate().is_err());
        assert!(KernelSpec::Polynomial { degree: 0, coef0: 1.0 }.validate().is_err());
    }

    #[test]
    fn gamma_heuristic() {
        let x = vec![vec![-1.0, 1.0], vec![1.0, -1.0]];
        // variance 1, two features
        assert!((default_gamma(&x) - 0.5).abs() < 1e-15);
        assert_eq!(default_gamma(&[vec![2.0, 2.0]]), 0.5);
    }

    #[test]
    fn cache_evicts_least_recent() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        // 2 rows fit: 10 * 8 bytes each
        let mut cache = KernelCache::new(&x, KernelSpec::Linear, 160.0 / (1024.0 * 1024.0));
        let r0 = cache.row(0);
        cache.row(1);
        cache.row(0);
        cache.row(2); // evicts row 1
        assert_eq!(cache.cached_rows(), 2);
        assert!(cache.rows[1].is_none() && cache.rows[0].is_some());
        assert_eq!(r0[3], 0.0);
        assert_eq!(cache.row(3)[2], 6.0);
    }
}
