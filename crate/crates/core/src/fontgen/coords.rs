use core::fmt;

use serde::{Deserialize, Serialize};

use super::FontGenError;
use crate::optimizer::FeasibleRegion;

/// A point in the three-dimensional learned font space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FontCoordinates(pub [f64; 3]);

impl FontCoordinates {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self([a, b, c])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Feasibility against the default region (`[0, 13]` per axis, sum in `[7, 20]`).
    pub fn is_feasible(&self) -> bool {
        FeasibleRegion::default().contains(self)
    }

    pub fn distance(&self, other: &FontCoordinates) -> f64 {
        crate::linalg::distance(&self.0, &other.0)
    }
}

impl From<[f64; 3]> for FontCoordinates {
    fn from(v: [f64; 3]) -> Self {
        Self(v)
    }
}

impl fmt::Display for FontCoordinates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// `(1 − t)·a + t·b`.
pub fn interpolate(a: &FontCoordinates, b: &FontCoordinates, t: f64) -> Result<FontCoordinates, FontGenError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(FontGenError::InterpolationParameter(t));
    }
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (1.0 - t) * a.0[i] + t * b.0[i];
    }
    Ok(FontCoordinates(out))
}
