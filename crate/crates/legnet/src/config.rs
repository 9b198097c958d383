//! Numerical knobs shared by every module.

use serde::{Deserialize, Serialize};

use crate::Error;

/// Tolerances used by lifting, closure checks and quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Pointwise bound for `|η(tangent)|` and re-projection error of lifts.
    pub lift: f64,
    /// Bound for the distance between a lifted endpoint and its target.
    pub closure: f64,
    /// Relative tolerance for adaptive quadrature.
    pub quadrature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { lift: 1e-8, closure: 1e-6, quadrature: 1e-7 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), Error> {
        for (name, v) in [("lift", self.lift), ("closure", self.closure), ("quadrature", self.quadrature)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// How densely closed-form arcs are sampled before quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    /// Minimum number of samples per arc.
    pub min_points: usize,
    /// Target parameter spacing measured in arclength.
    pub max_spacing: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { min_points: 32, max_spacing: 1e-2 }
    }
}

impl Sampling {
    /// Number of samples for an arc of the given length.
    pub fn points_for(&self, length: f64) -> usize {
        let by_length = (length / self.max_spacing).ceil();
        let by_length = if by_length.is_finite() { by_length as usize } else { 0 };
        self.min_points.max(by_length).max(2)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.min_points < 2 {
            return Err(Error::Config("sampling.min_points must be at least 2".into()));
        }
        if !(self.max_spacing > 0.0 && self.max_spacing.is_finite()) {
            return Err(Error::Config("sampling.max_spacing must be positive".into()));
        }
        Ok(())
    }
}
