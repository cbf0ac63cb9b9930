//! ε-insensitive support vector regression trained by SMO.

mod kernel;
mod smo;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kernel::{default_gamma, kernel_eval, KernelSpec};

#[derive(Debug, Error)]
pub enum SvrError {
    #[error("input has {found} features, expected {expected}")]
    Arity { expected: usize, found: usize },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid SVR parameter {name} = {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("SVR needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("{features} feature rows but {targets} targets")]
    Shape { features: usize, targets: usize },
    #[error("non-finite value in training data")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrParams {
    /// Box constraint.
    pub c: f64,
    /// Half-width of the insensitive tube.
    pub epsilon: f64,
    /// Stopping threshold on the maximal violating-pair gap.
    pub tolerance: f64,
    /// Iteration cap, in passes of `2n` SMO steps.
    pub max_passes: usize,
    /// Kernel row cache budget.
    pub cache_mb: f64,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            epsilon: 0.1,
            tolerance: 1e-3,
            max_passes: 1000,
            cache_mb: 200.0,
        }
    }
}

impl SvrParams {
    pub fn validate(&self) -> Result<(), SvrError> {
        let check = |name, value: f64, ok: bool| {
            if value.is_finite() && ok {
                Ok(())
            } else {
                Err(SvrError::InvalidParam { name, value })
            }
        };
        check("c", self.c, self.c > 0.0)?;
        check("epsilon", self.epsilon, self.epsilon >= 0.0)?;
        check("tolerance", self.tolerance, self.tolerance > 0.0)?;
        check("cache_mb", self.cache_mb, self.cache_mb > 0.0)?;
        check("max_passes", self.max_passes as f64, self.max_passes > 0)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitStatus {
    pub converged: bool,
    pub iterations: usize,
    /// Maximal violating-pair gap when the solver stopped.
    pub gap: f64,
    /// Dual objective `½βᵀQβ + pᵀβ` at the solution.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub kernel: KernelSpec,
    pub params: SvrParams,
    pub n_features: usize,
    pub support_vectors: Vec<Vec<f64>>,
    /// `α − α*` for each support vector.
    pub coefficients: Vec<f64>,
    /// Position of each support vector in the training set.
    pub support_indices: Vec<usize>,
    pub bias: f64,
    pub status: FitStatus,
}

/// Fits an ε-SVR on (scaled) features `x` and targets `y`.
///
/// A solver that hits its iteration cap still returns a model; check
/// `status.converged`.
pub fn fit_svr(x: &[Vec<f64>], y: &[f64], kernel: KernelSpec, params: SvrParams) -> Result<SvrModel, SvrError> {
    kernel.validate()?;
    params.validate()?;
    if x.len() != y.len() {
        return Err(SvrError::Shape {
            features: x.len(),
            targets: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(SvrError::TooFewSamples(x.len()));
    }
    let n_features = x[0].len();
    for row in x {
        if row.len() != n_features {
            return Err(SvrError::Arity {
                expected: n_features,
                found: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(SvrError::NonFinite);
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(SvrError::NonFinite);
    }

    let max_iterations = params.max_passes.saturating_mul(2 * x.len());
    let out = smo::solve(
        x,
        y,
        kernel,
        params.c,
        params.epsilon,
        params.tolerance,
        max_iterations,
        params.cache_mb,
    );
    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    let mut support_indices = Vec::new();
    for (i, &coef) in out.coefficients.iter().enumerate() {
        if coef != 0.0 {
            support_vectors.push(x[i].clone());
            coefficients.push(coef);
            support_indices.push(i);
        }
    }
    Ok(SvrModel {
        kernel,
        params,
        n_features,
        support_vectors,
        coefficients,
        support_indices,
        bias: out.bias,
        status: FitStatus {
            converged: out.converged,
            iterations: out.iterations,
            gap: out.gap,
            objective: out.objective,
        },
    })
}

impl SvrModel {
    /// `Σ coefᵢ K(svᵢ, x) + b` in the space the model was trained in.
    pub fn predict(&self, x: &[f64]) -> Result<f64, SvrError> {
        if x.len() != self.n_features {
            return Err(SvrError::Arity {
                expected: self.n_features,
                found: x.len(),
            });
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * self.kernel.eval_unchecked(sv, x))
            .sum::<f64>()
            + self.bias)
    }

    /// Dual coefficient of training sample `i` (zero for non-support vectors).
    pub fn coefficient_of(&self, i: usize) -> f64 {
        self.support_indices
            .binary_search(&i)
            .map_or(0.0, |k| self.coefficients[k])
    }
}

/// Largest per-sample violation of the ε-SVR optimality conditions of
/// `model` on its training data. Recomputes every prediction from the
/// stored support vectors, independent of the solver's internal state.
///
/// With residual `r = y − f(x)` and coefficient `θ`:
/// `θ = 0` needs `|r| ≤ ε`; `0 < θ < C` needs `r = ε`; `θ = C` needs
/// `r ≥ ε`, and symmetrically for negative `θ`.
pub fn kkt_violation(model: &SvrModel, x: &[Vec<f64>], y: &[f64]) -> Result<f64, SvrError> {
    let c = model.params.c;
    let eps = model.params.epsilon;
    let mut worst: f64 = 0.0;
    for (i, (xi, &yi)) in x.iter().zip(y).enumerate() {
        let r = yi - model.predict(xi)?;
        let theta = model.coefficient_of(i);
        let v = if theta == 0.0 {
            (r.abs() - eps).max(0.0)
        } else if theta >= c {
            (eps - r).max(0.0)
        } else if theta <= -c {
            (r + eps).max(0.0)
        } else if theta > 0.0 {
            (r - eps).abs()
        } else {
            (r + eps).abs()
        };
        worst = worst.max(v);
    }
    Ok(worst)
}
