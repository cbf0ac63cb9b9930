use serde::{Deserialize, Serialize};

use super::DataError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScale {
    pub mean: f64,
    pub std: f64,
}

/// Per-feature min-max map onto `[-1, 1]`, plus an optional target
/// standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub feature_min: Vec<f64>,
    pub feature_max: Vec<f64>,
    pub target: Option<TargetScale>,
}

impl Scaler {
    /// Fits feature ranges on `rows`. When `targets` is given the target
    /// mean and (population) standard deviation are recorded as well; a
    /// zero spread is replaced by 1.
    pub fn fit<R: AsRef<[f64]>>(rows: &[R], targets: Option<&[f64]>) -> Result<Self, DataError> {
        let first = rows.first().ok_or(DataError::EmptyScalerInput)?.as_ref();
        let mut feature_min = first.to_vec();
        let mut feature_max = first.to_vec();
        for row in rows {
            let row = row.as_ref();
            if row.len() != feature_min.len() {
                return Err(DataError::Arity {
                    expected: feature_min.len(),
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                feature_min[j] = feature_min[j].min(v);
                feature_max[j] = feature_max[j].max(v);
            }
        }
        let target = match targets {
            Some(t) if !t.is_empty() => {
                let n = t.len() as f64;
                let mean = t.iter().sum::<f64>() / n;
                let var = t.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                let std = var.sqrt();
                Some(TargetScale {
                    mean,
                    std: if std > 0.0 { std } else { 1.0 },
                })
            }
            Some(_) => return Err(DataError::EmptyScalerInput),
            None => None,
        };
        Ok(Self {
            feature_min,
            feature_max,
            target,
        })
    }

    pub fn n_features(&self) -> usize {
        self.feature_min.len()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>, DataError> {
        if x.len() != self.n_features() {
            return Err(DataError::Arity {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.feature_min.iter().zip(&self.feature_max))
            .map(|(&v, (&lo, &hi))| {
                if hi > lo {
                    2.0 * (v - lo) / (hi - lo) - 1.0
                } else {
                    0.0
                }
            })
            .collect())
    }

    pub fn transform_rows<R: AsRef<[f64]>>(&self, rows: &[R]) -> Result<Vec<Vec<f64>>, DataError> {
        rows.iter().map(|r| self.transform(r.as_ref())).collect()
    }

    pub fn transform_target(&self, y: f64) -> f64 {
        match self.target {
            Some(t) => (y - t.mean) / t.std,
            None => y,
        }
    }

    pub fn inverse_target(&self, z: f64) -> f64 {
        match self.target {
            Some(t) => z * t.std + t.mean,
            None => z,
        }
    }
}
