//! Alloy records, range-grid augmentation, feature encoding, scaling and
//! fold partitioning.

mod augment;
mod csvio;
mod folds;
mod record;
mod scaler;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use augment::{augment, AugmentPolicy, Augmented, DEFAULT_MAX_COMBINATIONS};
pub use csvio::{
    parse_records, parse_samples, write_records, write_samples, RECORD_HEADER, SAMPLE_HEADER,
};
pub use folds::{assign_folds, FoldAssignment};
pub use record::{AlloyRecord, Element, ProcessRoute, Property, PropertyVector, RangeSpec};
pub use scaler::{Scaler, TargetScale};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("bad header: {0}")]
    Header(String),
    #[error("parse error at line {line}, column `{column}`: {message}")]
    Parse {
        line: u64,
        column: String,
        message: String,
    },
    #[error("line {line} (record {record}): {source}")]
    Record {
        line: u64,
        record: String,
        #[source]
        source: Box<DataError>,
    },
    #[error("range inverted: {element}")]
    RangeInverted { element: Element },
    #[error("range of {element} outside [0, 100]: {min}..{max}")]
    OutOfBounds { element: Element, min: f64, max: f64 },
    #[error("invalid process route code {0} (expected 1-5)")]
    InvalidRoute(i64),
    #[error("invalid {property} target {value}")]
    InvalidTarget { property: Property, value: f64 },
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("record {record}: {combinations} grid combinations exceed the cap of {cap}")]
    TooManyCombinations {
        record: String,
        combinations: u128,
        cap: usize,
    },
    #[error("fold assignment needs at least {k} groups, found {groups}")]
    TooFewGroups { k: usize, groups: usize },
    #[error("fold count must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("cannot fit a scaler on an empty subset")]
    EmptyScalerInput,
    #[error("feature arity mismatch: expected {expected}, found {found}")]
    Arity { expected: usize, found: usize },
}

/// Which part of the augmented data a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    TrainVal,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::TrainVal => "train_val",
            Split::Test => "test",
        }
    }
}

/// How the categorical processing route enters the feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingPolicy {
    /// Route code as a single numeric feature (10 features total).
    #[default]
    Ordinal,
    /// Five route indicators (14 features total).
    OneHot,
}

impl EncodingPolicy {
    pub fn n_features(self) -> usize {
        match self {
            EncodingPolicy::Ordinal => Element::COUNT + 1,
            EncodingPolicy::OneHot => Element::COUNT + ProcessRoute::COUNT,
        }
    }
}

/// A concrete feature vector with the target of one selected property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub source_record_id: String,
    pub features: Vec<f64>,
    pub target: f64,
    pub split: Split,
}

impl Sample {
    /// Recovers the route code from the encoded features.
    pub fn route_code(&self, encoding: EncodingPolicy) -> u8 {
        match encoding {
            EncodingPolicy::Ordinal => self.features[Element::COUNT] as u8,
            EncodingPolicy::OneHot => self.features[Element::COUNT..]
                .iter()
                .position(|&v| v == 1.0)
                .map_or(0, |i| i as u8 + 1),
        }
    }
}

/// Builds the feature vector `[Fe, C, Mn, P, S, Si, Ni, Cr, Mo, route...]`.
pub fn encode_features(
    composition: &[f64; Element::COUNT],
    route: ProcessRoute,
    policy: EncodingPolicy,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(policy.n_features());
    out.extend_from_slice(composition);
    match policy {
        EncodingPolicy::Ordinal => out.push(f64::from(route.code())),
        EncodingPolicy::OneHot => {
            out.extend((1..=ProcessRoute::COUNT as u8).map(|c| if c == route.code() { 1.0 } else { 0.0 }))
        }
    }
    out
}
