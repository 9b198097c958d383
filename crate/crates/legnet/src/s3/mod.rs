//! Geometry of `S³ ⊂ C²` and of the projective line `P¹`.
//!
//! A point of `C²` is written `(z, w) = (x + iy, u + iv)`. The Hermitian
//! product `⟨a, b⟩ = ā₁b₁ + ā₂b₂` carries everything: the real part is the
//! Euclidean inner product of `R⁴`, and the contact form is
//! `η_p(v) = Im⟨p, v⟩ = x dy − y dx + u dv − v du`.
//!
//! `P¹` carries the Fubini–Study metric, isometric to the round sphere of
//! radius 1/2. Distances from `p₀ = (0:1)` are `arctan |z/w|`, so the metric
//! disk of radius `r` has area `π sin² r` and boundary length `π sin 2r`.

mod curves;
mod lift;
mod path;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curves::{CapCircle, Curve, Fiber, GreatCircle, Latitude, Meridian, Reversed, Rotated};
pub use lift::{holonomy, legendrian_lift, lift_curve, lift_pieces, LiftedPiece};
pub use path::{eta_integral, length_between, path_length, projected_length, Sample, SampledPath, Space};

pub type C64 = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("the zero vector has no direction")]
    ZeroVector,
    #[error("radius {0} outside [0, π/2]")]
    RadiusOutOfRange(f64),
    #[error("vector is not tangent to the sphere (normal component {0:e})")]
    NotTangent(f64),
    #[error("path lives in {found:?}, expected {expected:?}")]
    WrongSpace { expected: Space, found: Space },
    #[error("start point is {distance:e} away from the fiber over the path start")]
    StartOffFiber { distance: f64 },
    #[error("loop is not closed: endpoints {distance:e} apart")]
    NotClosed { distance: f64 },
    #[error("sampled path is invalid: {0}")]
    InvalidPath(String),
}

/// A vector of `C²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct C2 {
    pub z: C64,
    pub w: C64,
}

impl C2 {
    pub const fn new(z: C64, w: C64) -> Self {
        C2 { z, w }
    }

    pub fn real(z: f64, w: f64) -> Self {
        C2 { z: C64::new(z, 0.0), w: C64::new(w, 0.0) }
    }

    pub fn from_coords(c: [f64; 4]) -> Self {
        C2 { z: C64::new(c[0], c[1]), w: C64::new(c[2], c[3]) }
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.z.re, self.z.im, self.w.re, self.w.im]
    }

    /// Hermitian product, conjugate-linear in `self`.
    #[inline]
    pub fn inner(&self, other: &C2) -> C64 {
        self.z.conj() * other.z + self.w.conj() * other.w
    }

    /// Euclidean inner product of the underlying `R⁴` vectors.
    #[inline]
    pub fn dot(&self, other: &C2) -> f64 {
        self.inner(other).re
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.z.norm_sqr() + self.w.norm_sqr()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    #[inline]
    pub fn scale(&self, c: C64) -> C2 {
        C2 { z: self.z * c, w: self.w * c }
    }

    /// `e^{iθ}·self`.
    #[inline]
    pub fn rotate(&self, theta: f64) -> C2 {
        self.scale(C64::from_polar(1.0, theta))
    }

    /// Multiplication by `i`.
    #[inline]
    pub fn times_i(&self) -> C2 {
        C2 { z: C64::new(-self.z.im, self.z.re), w: C64::new(-self.w.im, self.w.re) }
    }

    pub fn normalized(&self) -> Result<C2, GeometryError> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(GeometryError::ZeroVector);
        }
        Ok(*self * (1.0 / n))
    }

    /// Apply the `2×2` complex matrix `[[a, b], [c, d]]`.
    #[inline]
    pub fn apply(&self, m: &[[C64; 2]; 2]) -> C2 {
        C2 { z: m[0][0] * self.z + m[0][1] * self.w, w: m[1][0] * self.z + m[1][1] * self.w }
    }

    /// `w·dz − z·dw`, whose modulus over `|p|²` is the Fubini–Study speed of
    /// the projected curve.
    #[inline]
    pub fn wedge(&self, v: &C2) -> C64 {
        self.w * v.z - self.z * v.w
    }

    pub fn distance(&self, other: &C2) -> f64 {
        (*self - *other).norm()
    }
}

impl Add for C2 {
    type Output = C2;
    #[inline]
    fn add(self, o: C2) -> C2 {
        C2 { z: self.z + o.z, w: self.w + o.w }
    }
}

impl Sub for C2 {
    type Output = C2;
    #[inline]
    fn sub(self, o: C2) -> C2 {
        C2 { z: self.z - o.z, w: self.w - o.w }
    }
}

impl Neg for C2 {
    type Output = C2;
    #[inline]
    fn neg(self) -> C2 {
        C2 { z: -self.z, w: -self.w }
    }
}

impl Mul<f64> for C2 {
    type Output = C2;
    #[inline]
    fn mul(self, s: f64) -> C2 {
        C2 { z: self.z * s, w: self.w * s }
    }
}

impl Mul<C2> for f64 {
    type Output = C2;
    #[inline]
    fn mul(self, v: C2) -> C2 {
        v * self
    }
}

/// A unit vector of `C²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "C2", into = "C2")]
pub struct SpherePoint(C2);

impl SpherePoint {
    /// Normalizes `v` onto the sphere.
    pub fn new(v: C2) -> Result<Self, GeometryError> {
        v.normalized().map(SpherePoint)
    }

    pub fn from_coords(c: [f64; 4]) -> Result<Self, GeometryError> {
        Self::new(C2::from_coords(c))
    }

    pub fn coords(&self) -> [f64; 4] {
        self.0.coords()
    }

    #[inline]
    pub fn c2(&self) -> C2 {
        self.0
    }

    /// `e^{it}·p`, a point of the same Hopf fiber.
    pub fn fiber_rotate(&self, t: f64) -> SpherePoint {
        SpherePoint(self.0.rotate(t))
    }

    /// The fiber velocity `i·p`.
    pub fn fiber_tangent(&self) -> TangentS3 {
        TangentS3 { base: *self, vector: self.0.times_i() }
    }
}

impl TryFrom<C2> for SpherePoint {
    type Error = GeometryError;
    fn try_from(v: C2) -> Result<Self, GeometryError> {
        SpherePoint::new(v)
    }
}

impl From<SpherePoint> for C2 {
    fn from(p: SpherePoint) -> C2 {
        p.0
    }
}

/// A tangent vector to `S³`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentS3 {
    pub base: SpherePoint,
    pub vector: C2,
}

impl TangentS3 {
    /// Checks `|⟨v, base⟩| ≤ 1e−10` (Euclidean).
    pub fn new(base: SpherePoint, vector: C2) -> Result<Self, GeometryError> {
        let normal = base.0.dot(&vector);
        if normal.abs() > 1e-10 * vector.norm().max(1.0) {
            return Err(GeometryError::NotTangent(normal));
        }
        Ok(TangentS3 { base, vector })
    }

    /// Removes the normal component of `vector`.
    pub fn project(base: SpherePoint, vector: C2) -> Self {
        let n = base.0.dot(&vector);
        TangentS3 { base, vector: vector - base.0 * n }
    }

    pub fn norm(&self) -> f64 {
        self.vector.norm()
    }

    /// Fubini–Study length of the projected vector `pr_* v`.
    pub fn projected_norm(&self) -> f64 {
        self.base.0.wedge(&self.vector).norm()
    }
}

/// The contact form `η = x dy − y dx + u dv − v du`.
#[inline]
pub fn eta(v: &TangentS3) -> f64 {
    eta_at(&v.base.0, &v.vector)
}

/// `η` at a (not necessarily unit) base point, `Im⟨p, v⟩`.
#[inline]
pub fn eta_at(p: &C2, v: &C2) -> f64 {
    p.inner(v).im
}

/// A point of `P¹`, stored as a unit representative whose larger-modulus
/// coordinate is real and positive (ties go to `w`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjPoint {
    rep: C2,
}

impl ProjPoint {
    /// The class of `(z : w)`.
    pub fn new(z: C64, w: C64) -> Result<Self, GeometryError> {
        Self::from_c2(C2::new(z, w))
    }

    pub fn from_c2(v: C2) -> Result<Self, GeometryError> {
        let u = v.normalized()?;
        let pivot = if u.w.norm() >= u.z.norm() { u.w } else { u.z };
        let phase = pivot.conj() / pivot.norm();
        let mut rep = u.scale(phase);
        if u.w.norm() >= u.z.norm() {
            rep.w = C64::new(rep.w.norm(), 0.0);
        } else {
            rep.z = C64::new(rep.z.norm(), 0.0);
        }
        Ok(ProjPoint { rep })
    }

    /// `p₀ = (0 : 1)`, the point `ζ = 0`.
    pub fn p0() -> Self {
        ProjPoint { rep: C2::real(0.0, 1.0) }
    }

    /// `p_∞ = (1 : 0)`.
    pub fn p_inf() -> Self {
        ProjPoint { rep: C2::real(1.0, 0.0) }
    }

    /// The point with affine coordinate `ζ = z/w`.
    pub fn from_affine(zeta: C64) -> Self {
        Self::from_c2(C2::new(zeta, C64::new(1.0, 0.0))).expect("(ζ, 1) is never zero")
    }

    /// Point at Fubini–Study distance `r` from `p₀` with azimuth `arg ζ = az`.
    pub fn from_polar(r: f64, az: f64) -> Self {
        Self::from_c2(polar_rep(r, az)).expect("polar representative is a unit vector")
    }

    pub fn rep(&self) -> C2 {
        self.rep
    }

    pub fn affine(&self) -> Option<C64> {
        if self.rep.w.norm() == 0.0 {
            None
        } else {
            Some(self.rep.z / self.rep.w)
        }
    }

    /// Colatitude (distance from `p₀`) and azimuth in `[0, 2π)`.
    pub fn polar(&self) -> (f64, f64) {
        let r = self.rep.z.norm().atan2(self.rep.w.norm());
        let az = if self.rep.z.norm() == 0.0 { 0.0 } else { wrap_angle(self.rep.z.arg() - self.rep.w.arg()) };
        (r, az)
    }

    /// Equality up to `tol` in the Fubini–Study distance.
    pub fn approx_eq(&self, other: &ProjPoint, tol: f64) -> bool {
        fs_distance(self, other) <= tol
    }

    /// The point opposite to this one (distance π/2).
    pub fn antipode(&self) -> ProjPoint {
        let r = self.rep;
        ProjPoint::from_c2(C2::new(-r.w.conj(), r.z.conj())).expect("unit vector")
    }

    /// A unitary matrix sending `p₀` to this point; sectors and caps about this
    /// point are measured in the coordinates it defines.
    pub fn frame(&self) -> [[C64; 2]; 2] {
        let c = self.rep;
        [[c.w.conj(), c.z], [-c.z.conj(), c.w]]
    }
}

/// `(sin r·e^{i az}, cos r)`, the standard unit representative.
#[inline]
pub fn polar_rep(r: f64, az: f64) -> C2 {
    let (s, c) = r.sin_cos();
    C2::new(C64::from_polar(s, az), C64::new(c, 0.0))
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn principal_angle(a: f64) -> f64 {
    let r = wrap_angle(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// The Hopf projection `(z, w) ↦ (z : w)`.
pub fn hopf_project(p: &SpherePoint) -> ProjPoint {
    ProjPoint::from_c2(p.0).expect("sphere points are nonzero")
}

/// Fubini–Study distance, in `[0, π/2]`.
pub fn fs_distance(p: &ProjPoint, q: &ProjPoint) -> f64 {
    let a = p.rep.wedge(&q.rep).norm();
    let b = p.rep.inner(&q.rep).norm();
    a.atan2(b).min(FRAC_PI_2)
}

/// Area of the metric disk of radius `r`: `(π/2)(1 − cos 2r) = π sin² r`.
pub fn cap_area(r: f64) -> Result<f64, GeometryError> {
    check_radius(r)?;
    let s = r.sin();
    Ok(PI * s * s)
}

/// Boundary length of the metric disk of radius `r`: `π sin 2r`.
pub fn cap_circumference(r: f64) -> Result<f64, GeometryError> {
    check_radius(r)?;
    Ok(PI * (2.0 * r).sin())
}

fn check_radius(r: f64) -> Result<(), GeometryError> {
    if !(0.0..=FRAC_PI_2 + 1e-15).contains(&r) {
        return Err(GeometryError::RadiusOutOfRange(r));
    }
    Ok(())
}
