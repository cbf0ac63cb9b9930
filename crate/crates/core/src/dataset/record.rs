use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DataError;

/// Alloying elements in the fixed column order used everywhere in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    Fe,
    C,
    Mn,
    P,
    S,
    Si,
    Ni,
    Cr,
    Mo,
}

impl Element {
    pub const ALL: [Element; 9] = [
        Element::Fe,
        Element::C,
        Element::Mn,
        Element::P,
        Element::S,
        Element::Si,
        Element::Ni,
        Element::Cr,
        Element::Mo,
    ];

    pub const COUNT: usize = 9;

    pub fn symbol(self) -> &'static str {
        match self {
            Element::Fe => "Fe",
            Element::C => "C",
            Element::Mn => "Mn",
            Element::P => "P",
            Element::S => "S",
            Element::Si => "Si",
            Element::Ni => "Ni",
            Element::Cr => "Cr",
            Element::Mo => "Mo",
        }
    }

    /// Lower-case column prefix, e.g. `mn` for `mn_min` / `mn_max`.
    pub fn column(self) -> &'static str {
        match self {
            Element::Fe => "fe",
            Element::C => "c",
            Element::Mn => "mn",
            Element::P => "p",
            Element::S => "s",
            Element::Si => "si",
            Element::Ni => "ni",
            Element::Cr => "cr",
            Element::Mo => "mo",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Overall weight-percent bounds observed across the handbook data.
    pub fn handbook_bounds(self) -> RangeSpec {
        let (min, max) = match self {
            Element::Fe => (70.0, 100.0),
            Element::C => (0.08, 1.2),
            Element::Mn => (0.25, 2.0),
            Element::P => (0.0, 0.2),
            Element::S => (0.0, 1.0),
            Element::Si => (0.0, 3.0),
            Element::Ni => (0.0, 26.0),
            Element::Cr => (0.0, 37.0),
            Element::Mo => (0.0, 4.0),
        };
        RangeSpec { min, max }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Closed weight-percent interval. A fixed composition has `min == max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeSpec {
    pub min: f64,
    pub max: f64,
}

impl RangeSpec {
    pub fn new(element: Element, min: f64, max: f64) -> Result<Self, DataError> {
        let in_bounds = |v: f64| v.is_finite() && (0.0..=100.0).contains(&v);
        if !in_bounds(min) || !in_bounds(max) {
            return Err(DataError::OutOfBounds { element, min, max });
        }
        if min > max {
            return Err(DataError::RangeInverted { element });
        }
        Ok(Self { min, max })
    }

    pub fn fixed(value: f64) -> Self {
        Self { min: value, max: value }
    }

    pub fn is_fixed(&self) -> bool {
        self.min == self.max
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    pub fn contains(&self, value: f64) -> bool {
        self.min <= value && value <= self.max
    }
}

/// Processing route code, 1 through 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ProcessRoute(u8);

impl ProcessRoute {
    pub const COUNT: usize = 5;

    pub fn new(code: u8) -> Result<Self, DataError> {
        if (1..=5).contains(&code) {
            Ok(Self(code))
        } else {
            Err(DataError::InvalidRoute(code as i64))
        }
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            1 => "hot rolling",
            2 => "cold rolling",
            3 => "annealing",
            4 => "normalizing",
            _ => "quench in water/oil",
        }
    }
}

impl TryFrom<u8> for ProcessRoute {
    type Error = DataError;

    fn try_from(code: u8) -> Result<Self, Self::Error> {
        Self::new(code)
    }
}

impl From<ProcessRoute> for u8 {
    fn from(route: ProcessRoute) -> u8 {
        route.0
    }
}

/// One of the four predicted mechanical properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Hardness,
    Tensile,
    Yield,
    Elongation,
}

impl Property {
    pub const ALL: [Property; 4] = [
        Property::Hardness,
        Property::Tensile,
        Property::Yield,
        Property::Elongation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Hardness => "hardness",
            Property::Tensile => "tensile",
            Property::Yield => "yield",
            Property::Elongation => "elongation",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| DataError::UnknownProperty(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropertyVector {
    /// Brinell hardness number.
    pub hardness: f64,
    pub tensile_strength: f64,
    pub yield_strength: f64,
    /// Percent elongation over a 50 mm gauge.
    pub elongation: f64,
}

impl PropertyVector {
    pub fn new(
        hardness: f64,
        tensile_strength: f64,
        yield_strength: f64,
        elongation: f64,
    ) -> Result<Self, DataError> {
        let v = Self {
            hardness,
            tensile_strength,
            yield_strength,
            elongation,
        };
        for p in Property::ALL {
            let x = v.get(p);
            if !x.is_finite() || x < 0.0 {
                return Err(DataError::InvalidTarget { property: p, value: x });
            }
        }
        if elongation > 100.0 {
            return Err(DataError::InvalidTarget {
                property: Property::Elongation,
                value: elongation,
            });
        }
        Ok(v)
    }

    pub fn get(&self, property: Property) -> f64 {
        match property {
            Property::Hardness => self.hardness,
            Property::Tensile => self.tensile_strength,
            Property::Yield => self.yield_strength,
            Property::Elongation => self.elongation,
        }
    }
}

/// One handbook entry: composition ranges, processing route and measured properties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlloyRecord {
    pub record_id: String,
    /// Indexed by [`Element::index`].
    pub composition: [RangeSpec; Element::COUNT],
    pub process: ProcessRoute,
    pub targets: PropertyVector,
}

impl AlloyRecord {
    pub fn range(&self, element: Element) -> RangeSpec {
        self.composition[element.index()]
    }

    pub fn ranged_elements(&self) -> impl Iterator<Item = Element> + '_ {
        Element::ALL
            .into_iter()
            .filter(|e| !self.composition[e.index()].is_fixed())
    }

    pub fn midpoint_composition(&self) -> [f64; Element::COUNT] {
        self.composition.map(|r| r.midpoint())
    }
}
