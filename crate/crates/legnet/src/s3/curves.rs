//! Closed-form curves parameterized over `[0, 1]`.
//!
//! On `P¹` a curve is given by a smooth unit representative in `C²`; the
//! lifting code only needs that representative and its derivative.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{polar_rep, C2, ProjPoint};
use super::path::{Sample, SampledPath, Space};

pub trait Curve: Send + Sync {
    fn point(&self, t: f64) -> C2;
    fn velocity(&self, t: f64) -> C2;

    /// `∫_{t0}^{t1} −Im⟨s, s'⟩/|s|² dt` for the representative `s`, when known
    /// in closed form. Lifting falls back to quadrature otherwise.
    fn phase(&self, _t0: f64, _t1: f64) -> Option<f64> {
        None
    }

    /// `n ≥ 2` equally spaced samples with exact velocities.
    fn sample(&self, n: usize, space: Space) -> SampledPath {
        let n = n.max(2);
        let samples = (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                Sample { t, p: self.point(t), v: self.velocity(t) }
            })
            .collect();
        SampledPath::single(space, samples).expect("uniform parameters increase")
    }
}

impl<C: Curve + ?Sized> Curve for &C {
    fn point(&self, t: f64) -> C2 {
        (**self).point(t)
    }
    fn velocity(&self, t: f64) -> C2 {
        (**self).velocity(t)
    }
    fn phase(&self, t0: f64, t1: f64) -> Option<f64> {
        (**self).phase(t0, t1)
    }
}

impl<C: Curve + ?Sized> Curve for Box<C> {
    fn point(&self, t: f64) -> C2 {
        (**self).point(t)
    }
    fn velocity(&self, t: f64) -> C2 {
        (**self).velocity(t)
    }
    fn phase(&self, t0: f64, t1: f64) -> Option<f64> {
        (**self).phase(t0, t1)
    }
}

/// The Hopf fiber arc `τ ↦ e^{iτ}·base` for `τ` from `from` to `to`.
#[derive(Clone, Copy, Debug)]
pub struct Fiber {
    pub base: C2,
    pub from: f64,
    pub to: f64,
}

impl Fiber {
    pub fn full(base: C2) -> Self {
        Fiber { base, from: 0.0, to: std::f64::consts::TAU }
    }
}

impl Curve for Fiber {
    fn point(&self, t: f64) -> C2 {
        self.base.rotate(self.from + (self.to - self.from) * t)
    }
    fn velocity(&self, t: f64) -> C2 {
        self.point(t).times_i() * (self.to - self.from)
    }
}

/// The circle of colatitude `r` about `p₀`, azimuth running from `az0` to `az1`.
///
/// Representative `(sin r·e^{iφ}, cos r)`; it stays smooth at both poles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Latitude {
    pub r: f64,
    pub az0: f64,
    pub az1: f64,
}

impl Latitude {
    /// Fubini–Study length `|Δφ|·sin(2r)/2`.
    pub fn length(&self) -> f64 {
        (self.az1 - self.az0).abs() * (2.0 * self.r).sin().abs() * 0.5
    }
}

impl Curve for Latitude {
    fn point(&self, t: f64) -> C2 {
        polar_rep(self.r, self.az0 + (self.az1 - self.az0) * t)
    }
    fn velocity(&self, t: f64) -> C2 {
        let phi = self.az0 + (self.az1 - self.az0) * t;
        let dz = C64::from_polar(self.r.sin(), phi) * C64::new(0.0, self.az1 - self.az0);
        C2::new(dz, C64::new(0.0, 0.0))
    }
    fn phase(&self, t0: f64, t1: f64) -> Option<f64> {
        Some(-self.r.sin().powi(2) * (self.az1 - self.az0) * (t1 - t0))
    }
}

/// The meridian at azimuth `az`, colatitude running from `r0` to `r1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Meridian {
    pub az: f64,
    pub r0: f64,
    pub r1: f64,
}

impl Meridian {
    pub fn length(&self) -> f64 {
        (self.r1 - self.r0).abs()
    }
}

impl Curve for Meridian {
    fn point(&self, t: f64) -> C2 {
        polar_rep(self.r0 + (self.r1 - self.r0) * t, self.az)
    }
    fn velocity(&self, t: f64) -> C2 {
        let rho = self.r0 + (self.r1 - self.r0) * t;
        let d = self.r1 - self.r0;
        C2::new(C64::from_polar(rho.cos() * d, self.az), C64::new(-rho.sin() * d, 0.0))
    }
    fn phase(&self, _t0: f64, _t1: f64) -> Option<f64> {
        Some(0.0)
    }
}

/// `τ ↦ cos τ·p + sin τ·u` for `τ` from `from` to `to`. When `⟨p, u⟩ = 0` and
/// both are unit vectors this is a horizontal great circle.
#[derive(Clone, Copy, Debug)]
pub struct GreatCircle {
    pub p: C2,
    pub u: C2,
    pub from: f64,
    pub to: f64,
}

impl Curve for GreatCircle {
    fn point(&self, t: f64) -> C2 {
        let tau = self.from + (self.to - self.from) * t;
        self.p * tau.cos() + self.u * tau.sin()
    }
    fn velocity(&self, t: f64) -> C2 {
        let tau = self.from + (self.to - self.from) * t;
        (self.u * tau.cos() - self.p * tau.sin()) * (self.to - self.from)
    }
}

/// A curve moved by a fixed complex-linear map.
#[derive(Clone, Copy, Debug)]
pub struct Rotated<C> {
    pub inner: C,
    pub matrix: [[C64; 2]; 2],
}

impl<C: Curve> Curve for Rotated<C> {
    fn point(&self, t: f64) -> C2 {
        self.inner.point(t).apply(&self.matrix)
    }
    fn velocity(&self, t: f64) -> C2 {
        self.inner.velocity(t).apply(&self.matrix)
    }
}

/// A curve traversed backwards.
#[derive(Clone, Copy, Debug)]
pub struct Reversed<C>(pub C);

impl<C: Curve> Curve for Reversed<C> {
    fn point(&self, t: f64) -> C2 {
        self.0.point(1.0 - t)
    }
    fn velocity(&self, t: f64) -> C2 {
        -self.0.velocity(1.0 - t)
    }
}

/// Boundary of the metric disk of radius `r` about `center`, traversed
/// counterclockwise (the boundary orientation of the disk).
#[derive(Clone, Copy, Debug)]
pub struct CapCircle(Rotated<Latitude>);

impl CapCircle {
    pub fn new(center: &ProjPoint, r: f64) -> Self {
        Self::with_start(center, r, 0.0)
    }

    /// Starts at azimuth `az0` in the frame of `center`.
    pub fn with_start(center: &ProjPoint, r: f64, az0: f64) -> Self {
        CapCircle(Rotated {
            inner: Latitude { r, az0, az1: az0 + std::f64::consts::TAU },
            matrix: center.frame(),
        })
    }
}

impl Curve for CapCircle {
    fn point(&self, t: f64) -> C2 {
        self.0.point(t)
    }
    fn velocity(&self, t: f64) -> C2 {
        self.0.velocity(t)
    }
}
