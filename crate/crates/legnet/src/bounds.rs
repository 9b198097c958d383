//! Isoperimetric bounds on `P¹` and the lower bounds on the number of short
//! boundary components.
//!
//! `P¹` with the Fubini–Study metric is the round sphere of radius 1/2, so the
//! functions here mostly take `R = 1/2`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::region::MomentGrid;
use crate::chain::{Chain2, ChainError, Region};
use crate::quad::GaussRule;
use crate::s3::{eta_at, eta_integral, fs_distance, path_length, projected_length, GeometryError, ProjPoint, SampledPath, Space};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("curve is not closed: endpoints {0:e} apart")]
    NotClosed(f64),
    #[error("curve is not positively transverse: η = {eta:e} at t = {t}")]
    NotTransverse { t: f64, eta: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// `c₀ = π²/4`, the mean distance moment used by the cubic lower bound.
pub const C0: f64 = PI * PI / 4.0;

/// Largest area enclosed by a curve of length `a` on the sphere of radius `r`:
/// `2πR²(1 − √(1 − a²/(2πR)²))`.
pub fn s_r(a: f64, r: f64) -> Result<f64, BoundsError> {
    if !(r > 0.0) {
        return Err(BoundsError::OutOfRange { what: "radius", value: r });
    }
    if !(0.0..=TAU * r).contains(&a) {
        return Err(BoundsError::OutOfRange { what: "length", value: a });
    }
    let x2 = (a / (TAU * r)).powi(2);
    // Rationalised to avoid cancellation for small a.
    Ok(TAU * r * r * x2 / (1.0 + (1.0 - x2).sqrt()))
}

/// `S_{1/2}`, the bound on `P¹`.
pub fn s_half(a: f64) -> Result<f64, BoundsError> {
    s_r(a, 0.5)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum IsoStatus {
    Applicable,
    NotApplicable { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoReport {
    pub status: IsoStatus,
    pub area: f64,
    pub plus_area: f64,
    pub minus_area: f64,
    pub boundary_length: f64,
    /// `S_{1/2}(a)`, when `a` is in range.
    pub bound: Option<f64>,
    /// `|b| ≤ b⁺ + b⁻ ≤ S_{1/2}(a)`.
    pub area_holds: Option<bool>,
    pub boundary_connected: bool,
    pub diameter: f64,
    /// `diam supp β ≤ a/2`, checked only for a connected boundary.
    pub diameter_holds: Option<bool>,
}

/// The isoperimetric and diameter inequalities for a 2-chain on `P¹`.
/// Outside `|b| < π/2`, `a < π` the report says "not applicable".
pub fn isoperimetric_check(b: &Chain2) -> Result<IsoReport, BoundsError> {
    let d = b.diagnostics()?;
    let a = d.boundary_length;
    let slack = 1e-12;
    let status = if d.area.abs() >= FRAC_PI_2 {
        IsoStatus::NotApplicable { reason: format!("|area| = {} ≥ π/2", d.area.abs()) }
    } else if a >= PI {
        IsoStatus::NotApplicable { reason: format!("boundary length {a} ≥ π") }
    } else {
        IsoStatus::Applicable
    };
    let applicable = status == IsoStatus::Applicable;
    let bound = if applicable { Some(s_half(a)?) } else { None };
    let area_holds = bound.map(|s| d.area.abs() <= d.plus_area + d.minus_area + slack && d.plus_area + d.minus_area <= s + slack);
    let diameter_holds = (applicable && d.boundary_connected).then(|| d.support_diameter <= 0.5 * a + slack);
    Ok(IsoReport {
        status,
        area: d.area,
        plus_area: d.plus_area,
        minus_area: d.minus_area,
        boundary_length: a,
        bound,
        area_holds,
        boundary_connected: d.boundary_connected,
        diameter: d.support_diameter,
        diameter_holds,
    })
}

/// Left side of the wrapped isoperimetric inequality
/// `max_m (4π|b'| − b'²/R²) ≤ a²` with `b' = b − 4πmR²`.
///
/// Experimental: the inequality is stated without proof for general chains.
pub fn wrapped_isoperimetric_lhs(b: f64, r: f64) -> f64 {
    let period = 4.0 * PI * r * r;
    let m0 = (b / period).floor();
    [m0 - 1.0, m0, m0 + 1.0]
        .iter()
        .map(|m| {
            let x = b - m * period;
            4.0 * PI * x.abs() - x * x / (r * r)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `(lhs, holds)` for a chain on `P¹`, using the exact boundary length.
pub fn wrapped_isoperimetric_check(b: &Chain2) -> Result<(f64, bool), BoundsError> {
    let a = b.boundary_length()?;
    let lhs = wrapped_isoperimetric_lhs(b.area(), 0.5);
    Ok((lhs, lhs <= a * a + 1e-12))
}

/// Projection length `a`, `b = ∫η` and length `ℓ` of a closed transverse curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransverseStats {
    pub a: f64,
    pub b: f64,
    pub ell: f64,
    /// `max(a, b) ≤ ℓ ≤ a + b`.
    pub triangle_holds: bool,
    /// For `ℓ < π/2`: `b ≤ 2·S_{1/2}(a)`.
    pub area_bound_holds: Option<bool>,
    /// For `ℓ < π/2`: `b ≤ 2·S_{1/2}(ℓ)`.
    pub length_bound_holds: Option<bool>,
}

/// Statistics of a closed curve on `S³` along which `η ≥ 0`.
///
/// Curves made of Legendrian arcs closed by a transverse arc are accepted:
/// `η` may vanish, and samples down to `−tol·|v|` count as zero.
///
/// Because `∫η` over a closed curve is twice the area it bounds in `P¹`, the
/// area bounds are checked in the form `b ≤ 2·S_{1/2}(·)`.
pub fn transverse_stats(gamma: &SampledPath, tol: f64) -> Result<TransverseStats, BoundsError> {
    if gamma.space() != Space::S3 {
        return Err(GeometryError::WrongSpace { expected: Space::S3, found: gamma.space() }.into());
    }
    let (Some(start), Some(end)) = (gamma.start(), gamma.end()) else {
        return Err(GeometryError::InvalidPath("empty path".into()).into());
    };
    let gap = start.distance(&end);
    if gap > 1e-6 {
        return Err(BoundsError::NotClosed(gap));
    }
    for s in gamma.samples() {
        let eta = eta_at(&s.p, &s.v);
        if eta < -tol * s.v.norm().max(1.0) {
            return Err(BoundsError::NotTransverse { t: s.t, eta });
        }
    }
    let a = projected_length(gamma);
    let b = eta_integral(gamma)?;
    let ell = path_length(gamma);
    let q = 1e-7 * ell.max(1.0);
    let triangle_holds = a.max(b) <= ell + q && ell <= a + b + q;
    let short = ell < FRAC_PI_2;
    let area_bound_holds = if short { Some(b <= 2.0 * s_half(a.min(PI))? + q) } else { None };
    let length_bound_holds = if short { Some(b <= 2.0 * s_half(ell)? + q) } else { None };
    Ok(TransverseStats { a, b, ell, triangle_holds, area_bound_holds, length_bound_holds })
}

/// `∫_{P¹} dist(·, target) ω` by the radial formula
/// `∫₀^{π/2} d·π·sin(2d) dd`; the value does not depend on `target`.
pub fn c0_moment(_target: &ProjPoint) -> f64 {
    let rule = GaussRule::new(16);
    let panels = 16;
    let h = FRAC_PI_2 / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = h * i as f64;
            rule.mapped(lo, lo + h).map(|(d, w)| w * d * PI * (2.0 * d).sin()).sum::<f64>()
        })
        .sum()
}

/// The same moment on a product grid over the whole sphere, in polar
/// coordinates about `p₀` rather than about `target`.
pub fn c0_moment_grid(target: &ProjPoint, grid: &MomentGrid) -> f64 {
    Chain2::single(Region::Full, 1).moment(|p| fs_distance(p, target), grid)
}

/// `(2π/S_{1/2}(ε), 2c₀/(ε·S_{1/2}(ε)))`.
pub fn lower_bounds(epsilon: f64) -> Result<(f64, f64), BoundsError> {
    if !(epsilon > 0.0 && epsilon < FRAC_PI_2) {
        return Err(BoundsError::OutOfRange { what: "epsilon", value: epsilon });
    }
    let s = s_half(epsilon)?;
    Ok((TAU / s, 2.0 * C0 / (epsilon * s)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub epsilon: f64,
    pub n_quad: f64,
    pub n_cubic: f64,
}

pub fn bounds_table(epsilons: &[f64]) -> Result<Vec<BoundsRow>, BoundsError> {
    epsilons
        .iter()
        .map(|&epsilon| lower_bounds(epsilon).map(|(n_quad, n_cubic)| BoundsRow { epsilon, n_quad, n_cubic }))
        .collect()
}

/// CSV with header `epsilon,n_quad,n_cubic`.
pub fn write_bounds_csv<W: Write>(rows: &[BoundsRow], w: W) -> crate::Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
