use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("targets and predictions differ in length ({targets} vs {predictions})")]
    LengthMismatch { targets: usize, predictions: usize },
    #[error("cannot score an empty prediction set")]
    Empty,
    #[error("all targets are identical; R² is undefined")]
    ConstantTargets,
}

fn check(targets: &[f64], predictions: &[f64]) -> Result<(), MetricError> {
    if targets.len() != predictions.len() {
        return Err(MetricError::LengthMismatch {
            targets: targets.len(),
            predictions: predictions.len(),
        });
    }
    if targets.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(())
}

/// Residual sum of squares Σ(Tᵢ − yᵢ)².
pub fn sq_res(targets: &[f64], predictions: &[f64]) -> f64 {
    targets
        .iter()
        .zip(predictions)
        .map(|(t, y)| (t - y) * (t - y))
        .sum()
}

/// Total sum of squares Σ(Tᵢ − T̄)².
pub fn sq_tot(targets: &[f64]) -> f64 {
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    targets.iter().map(|t| (t - mean) * (t - mean)).sum()
}

/// Coefficient of determination `1 − SQres/SQtot`. Negative values are
/// returned as-is.
pub fn r_square(targets: &[f64], predictions: &[f64]) -> Result<f64, MetricError> {
    check(targets, predictions)?;
    if targets.iter().all(|&t| t == targets[0]) {
        return Err(MetricError::ConstantTargets);
    }
    Ok(1.0 - sq_res(targets, predictions) / sq_tot(targets))
}

/// Mean squared error `SQres / n`.
pub fn eqm(targets: &[f64], predictions: &[f64]) -> Result<f64, MetricError> {
    check(targets, predictions)?;
    Ok(sq_res(targets, predictions) / targets.len() as f64)
}
