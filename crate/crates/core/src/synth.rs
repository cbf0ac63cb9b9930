//! Synthetic alloy datasets with a known, smooth ground truth.
//!
//! The generator draws composition ranges inside the handbook bounds and
//! evaluates fixed closed-form property functions at the range midpoints,
//! so the full pipeline can run without the original handbook tables.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{AlloyRecord, Element, ProcessRoute, Property, PropertyVector, RangeSpec};
use crate::rng::seeded;

/// Version of the ground-truth formulas below. Bump it whenever any
/// constant changes so stored manifests can tell the datasets apart.
pub const GROUND_TRUTH_VERSION: u32 = 1;

/// Per-property noise standard deviations, in the property's own units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseStd {
    pub hardness: f64,
    pub tensile: f64,
    #[serde(rename = "yield")]
    pub yield_strength: f64,
    pub elongation: f64,
}

impl NoiseStd {
    pub const ZERO: NoiseStd = NoiseStd {
        hardness: 0.0,
        tensile: 0.0,
        yield_strength: 0.0,
        elongation: 0.0,
    };

    pub fn get(&self, property: Property) -> f64 {
        match property {
            Property::Hardness => self.hardness,
            Property::Tensile => self.tensile,
            Property::Yield => self.yield_strength,
            Property::Elongation => self.elongation,
        }
    }
}

impl Default for NoiseStd {
    /// Low noise: roughly 1% of each property's spread.
    fn default() -> Self {
        Self {
            hardness: 3.0,
            tensile: 10.0,
            yield_strength: 8.0,
            elongation: 0.4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroundTruthSpec {
    pub version: u32,
    pub noise: NoiseStd,
    pub seed: u64,
    /// Probability that an element gets a range rather than a fixed value.
    pub range_probability: f64,
}

impl Default for GroundTruthSpec {
    fn default() -> Self {
        Self {
            version: GROUND_TRUTH_VERSION,
            noise: NoiseStd::default(),
            seed: 2024,
            range_probability: 0.5,
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("need at least one record")]
    NoRecords,
    #[error("noise std for {0} must be finite and non-negative")]
    InvalidNoise(Property),
    #[error("range probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("ground truth version {0} is not supported (this build has {GROUND_TRUTH_VERSION})")]
    UnsupportedVersion(u32),
}

impl GroundTruthSpec {
    pub fn noiseless(seed: u64) -> Self {
        Self {
            noise: NoiseStd::ZERO,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.version != GROUND_TRUTH_VERSION {
            return Err(SynthError::UnsupportedVersion(self.version));
        }
        for p in Property::ALL {
            let s = self.noise.get(p);
            if !(s.is_finite() && s >= 0.0) {
                return Err(SynthError::InvalidNoise(p));
            }
        }
        if !(0.0..=1.0).contains(&self.range_probability) {
            return Err(SynthError::InvalidProbability(self.range_probability));
        }
        Ok(())
    }
}

/// Additive shift of the strength index per processing route (codes 1..=5).
const ROUTE_EFFECT: [f64; ProcessRoute::COUNT] = [0.0, 0.25, 0.55, 0.9, 0.4];

/// Extra carbon weight per processing route: hardening routes make carbon
/// count for much more.
const ROUTE_CARBON: [f64; ProcessRoute::COUNT] = [0.0, 0.3, 0.9, 1.6, 0.5];

/// Linear weights of the strength index on unit-scaled composition,
/// in element order Fe, C, Mn, P, S, Si, Ni, Cr, Mo.
const STRENGTH_WEIGHTS: [f64; Element::COUNT] = [-0.2, 1.3, 0.5, 0.15, -0.3, 0.3, 0.2, 0.45, 0.55];

/// Typical strength index of a uniformly drawn composition.
const INDEX_CENTER: f64 = 2.3;

/// Slope of the saturating response around `INDEX_CENTER`.
const STEEPNESS: f64 = 4.0;

/// Composition scaled to [0, 1] by the handbook bounds.
fn unit(composition: &[f64; Element::COUNT]) -> [f64; Element::COUNT] {
    let mut u = [0.0; Element::COUNT];
    for e in Element::ALL {
        let b = e.handbook_bounds();
        u[e.index()] = (composition[e.index()] - b.min) / (b.max - b.min);
    }
    u
}

/// Dimensionless strengthening index: a fixed low-order polynomial in the
/// scaled composition plus a route offset.
fn strength_index(u: &[f64; Element::COUNT], route: ProcessRoute) -> f64 {
    use Element::*;
    let lin: f64 = STRENGTH_WEIGHTS.iter().zip(u).map(|(w, x)| w * x).sum();
    let cross = 0.8 * u[C.index()] * u[Mn.index()] + 0.5 * u[Cr.index()] * u[Mo.index()]
        - 0.6 * u[C.index()] * u[C.index()];
    let r = usize::from(route.code() - 1);
    lin + cross + ROUTE_EFFECT[r] + ROUTE_CARBON[r] * u[C.index()]
}

/// Noise-free property values for one composition and route.
///
/// Strength-like properties saturate through `tanh` of the strength index;
/// elongation falls as strength rises and gains from nickel.
pub fn ground_truth(composition: &[f64; Element::COUNT], route: ProcessRoute) -> PropertyVector {
    let u = unit(composition);
    let s = STEEPNESS * (strength_index(&u, route) - INDEX_CENTER);
    let ni = u[Element::Ni.index()];
    let hardness = 260.0 + 190.0 * s.tanh();
    let tensile = 900.0 + 560.0 * (0.9 * s).tanh() + 60.0 * ni;
    let yield_strength = 620.0 + 430.0 * (0.85 * s).tanh() + 25.0 * ni;
    let elongation = 24.0 - 13.0 * (1.1 * s).tanh() + 14.0 * ni;
    PropertyVector {
        hardness: hardness.max(0.0),
        tensile_strength: tensile.max(0.0),
        yield_strength: yield_strength.max(0.0),
        elongation: elongation.clamp(0.0, 100.0),
    }
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn draw_range(rng: &mut impl rand::Rng, element: Element, ranged: bool) -> RangeSpec {
    let b = element.handbook_bounds();
    let span = b.max - b.min;
    if !ranged {
        return RangeSpec::fixed(round3(rng.random_range(b.min..=b.max)).clamp(b.min, b.max));
    }
    let width = span * rng.random_range(0.05..=0.30);
    let lo = rng.random_range(b.min..=(b.max - width));
    let min = round3(lo).clamp(b.min, b.max);
    let max = round3(lo + width).clamp(b.min, b.max);
    RangeSpec::new(element, min, max).expect("drawn inside handbook bounds")
}

/// Generates `n_records` records. Identical `spec` gives identical output.
pub fn generate(n_records: usize, spec: &GroundTruthSpec) -> Result<Vec<AlloyRecord>, SynthError> {
    if n_records == 0 {
        return Err(SynthError::NoRecords);
    }
    spec.validate()?;
    let mut rng = seeded(spec.seed);
    let mut out = Vec::with_capacity(n_records);
    for k in 0..n_records {
        let composition = Element::ALL.map(|e| {
            let ranged = rng.random_bool(spec.range_probability);
            draw_range(&mut rng, e, ranged)
        });
        let route = ProcessRoute::new(rng.random_range(1..=ProcessRoute::COUNT as u8)).expect("code in 1..=5");
        let truth = ground_truth(&composition.map(|r| r.midpoint()), route);
        let mut noisy = [0.0; 4];
        for (slot, p) in noisy.iter_mut().zip(Property::ALL) {
            let sd = spec.noise.get(p);
            let eps = if sd > 0.0 {
                Normal::new(0.0, sd).expect("validated std").sample(&mut rng)
            } else {
                0.0
            };
            *slot = truth.get(p) + eps;
        }
        let targets = PropertyVector::new(
            noisy[0].max(0.0),
            noisy[1].max(0.0),
            noisy[2].max(0.0),
            noisy[3].clamp(0.0, 100.0),
        )
        .expect("clamped into the valid range");
        out.push(AlloyRecord {
            record_id: format!("SYN-{:04}", k + 1),
            composition,
            process: route,
            targets,
        });
    }
    Ok(out)
}
