use serde::{Deserialize, Serialize};

use super::record::{AlloyRecord, Element, Property};
use super::{encode_features, DataError, EncodingPolicy, Sample, Split};

pub const DEFAULT_MAX_COMBINATIONS: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentPolicy {
    pub property: Property,
    pub encoding: EncodingPolicy,
    /// Upper bound on grid combinations produced by a single record.
    pub max_combinations: usize,
}

impl AugmentPolicy {
    pub fn new(property: Property) -> Self {
        Self {
            property,
            encoding: EncodingPolicy::Ordinal,
            max_combinations: DEFAULT_MAX_COMBINATIONS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Augmented {
    pub train_val: Vec<Sample>,
    pub test: Vec<Sample>,
}

/// The two interior points of the 4-point equidistant grid over `[min, max]`.
pub(crate) fn inner_points(min: f64, max: f64) -> [f64; 2] {
    let step = (max - min) / 3.0;
    [min + step, min + 2.0 * step]
}

/// Expands records into train/validation samples on the interior range grid
/// and one test sample per record at the range midpoints.
///
/// Each ranged element contributes its two interior grid points and the
/// samples of a record are the Cartesian product over ranged elements, with
/// `Fe` as the slowest-varying coordinate. Fixed elements contribute their
/// single value.
pub fn augment(records: &[AlloyRecord], policy: &AugmentPolicy) -> Result<Augmented, DataError> {
    let mut out = Augmented::default();
    for record in records {
        let ranged: Vec<Element> = record.ranged_elements().collect();
        let combinations = 1u128 << ranged.len();
        if combinations > policy.max_combinations as u128 {
            return Err(DataError::TooManyCombinations {
                record: record.record_id.clone(),
                combinations,
                cap: policy.max_combinations,
            });
        }
        let target = record.targets.get(policy.property);
        let grids: Vec<[f64; 2]> = ranged
            .iter()
            .map(|e| {
                let r = record.range(*e);
                inner_points(r.min, r.max)
            })
            .collect();
        let base = record.composition.map(|r| r.min);

        for combo in 0..combinations as usize {
            let mut point = base;
            for (pos, (e, grid)) in ranged.iter().zip(&grids).enumerate() {
                let bit = (combo >> (ranged.len() - 1 - pos)) & 1;
                point[e.index()] = grid[bit];
            }
            out.train_val.push(Sample {
                source_record_id: record.record_id.clone(),
                features: encode_features(&point, record.process, policy.encoding),
                target,
                split: Split::TrainVal,
            });
        }

        out.test.push(Sample {
            source_record_id: record.record_id.clone(),
            features: encode_features(&record.midpoint_composition(), record.process, policy.encoding),
            target,
            split: Split::Test,
        });
    }
    Ok(out)
}
