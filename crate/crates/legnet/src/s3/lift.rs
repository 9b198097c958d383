//! Horizontal lifts through the Hopf fibration.
//!
//! Given a smooth representative `s(t)` of a path in `P¹`, the Legendrian lift
//! is `e^{iψ(t)}·s(t)/|s(t)|` with `ψ' = −Im⟨s, s'⟩/|s|²`. The right-hand side
//! does not involve `ψ`, so the phase equation is a plain integral and is
//! evaluated by quadrature over each sample interval.

use super::curves::Curve;
use super::path::{hermite, Sample, SampledPath, Space};
use super::{principal_angle, C2, GeometryError, SpherePoint};
use crate::config::Tolerances;
use crate::quad;

/// One lifted smooth piece.
#[derive(Clone, Debug)]
pub struct LiftedPiece {
    pub samples: Vec<Sample>,
    /// Principal phase jump `arg⟨s_prev(1), s(0)⟩` between the previous
    /// piece's representative and this one's (0 for the first piece).
    pub junction: f64,
    /// Total phase correction `ψ(1) − ψ(0)` over the piece.
    pub phase: f64,
}

#[inline]
fn phase_rate(s: &C2, ds: &C2) -> f64 {
    -s.inner(ds).im / s.norm_sqr()
}

#[inline]
fn lifted_sample(t: f64, s: &C2, ds: &C2, psi: f64) -> Sample {
    let n2 = s.norm_sqr();
    let n = n2.sqrt();
    let unit = *s * (1.0 / n);
    let radial = s.dot(ds) / n2;
    let dunit = (*ds - *s * radial) * (1.0 / n);
    let rate = phase_rate(s, ds);
    let e = num_complex::Complex64::from_polar(1.0, psi);
    Sample { t, p: unit.scale(e), v: (dunit + unit.times_i() * rate).scale(e) }
}

/// Phase increment over `[a, b]` for a closed-form curve.
fn curve_phase<C: Curve + ?Sized>(curve: &C, a: f64, b: f64, tol: f64) -> f64 {
    if let Some(p) = curve.phase(a, b) {
        return p;
    }
    let f = |t: f64| phase_rate(&curve.point(t), &curve.velocity(t));
    let coarse = quad::gauss4(f, a, b);
    let mid = 0.5 * (a + b);
    let fine = quad::gauss4(f, a, mid) + quad::gauss4(f, mid, b);
    if (coarse - fine).abs() <= tol {
        fine
    } else {
        quad::integrate(f, a, b, tol)
    }
}

/// Lifts consecutive closed-form pieces starting from `start`. Piece `i` gets
/// `counts[i]` equally spaced samples; each piece starts at the end of the
/// previous lift.
pub fn lift_pieces(pieces: &[&dyn Curve], counts: &[usize], start: C2, quad_tol: f64) -> Vec<LiftedPiece> {
    let mut out = Vec::with_capacity(pieces.len());
    let mut current = start;
    let mut prev_end: Option<C2> = None;
    for (curve, &n) in pieces.iter().zip(counts) {
        let n = n.max(2);
        let s0 = curve.point(0.0);
        let junction = prev_end.map(|e| e.inner(&s0).arg()).unwrap_or(0.0);
        let mut psi = (s0.inner(&current) / s0.norm()).arg();
        let psi0 = psi;
        let mut samples = Vec::with_capacity(n);
        let mut t_prev = 0.0;
        samples.push(lifted_sample(0.0, &s0, &curve.velocity(0.0), psi));
        for i in 1..n {
            let t = i as f64 / (n - 1) as f64;
            psi += curve_phase(*curve, t_prev, t, quad_tol);
            let s = curve.point(t);
            samples.push(lifted_sample(t, &s, &curve.velocity(t), psi));
            t_prev = t;
        }
        current = samples.last().expect("n ≥ 2").p;
        prev_end = Some(curve.point(1.0));
        out.push(LiftedPiece { samples, junction, phase: psi - psi0 });
    }
    out
}

/// Legendrian lift of a closed-form curve through `start`, with `n` samples.
pub fn lift_curve<C: Curve + ?Sized>(curve: &C, n: usize, start: &SpherePoint, tol: &Tolerances) -> Result<SampledPath, GeometryError> {
    check_start(&curve.point(0.0), start, tol)?;
    let dyn_curve: &dyn Curve = &CurveRef(curve);
    let lifted = lift_pieces(&[dyn_curve], &[n], start.c2(), tol.quadrature * 1e-6);
    let samples = lifted.into_iter().next().map(|p| p.samples).unwrap_or_default();
    SampledPath::single(Space::S3, samples)
}

struct CurveRef<'a, C: ?Sized>(&'a C);

impl<C: Curve + ?Sized> Curve for CurveRef<'_, C> {
    fn point(&self, t: f64) -> C2 {
        self.0.point(t)
    }
    fn velocity(&self, t: f64) -> C2 {
        self.0.velocity(t)
    }
    fn phase(&self, t0: f64, t1: f64) -> Option<f64> {
        self.0.phase(t0, t1)
    }
}

fn check_start(s0: &C2, start: &SpherePoint, tol: &Tolerances) -> Result<(), GeometryError> {
    let unit = s0.normalized()?;
    let distance = unit.wedge(&start.c2()).norm();
    if distance > tol.lift.max(1e-12) {
        return Err(GeometryError::StartOffFiber { distance });
    }
    Ok(())
}

/// Lift of a sampled path, plus the accumulated raw phase bookkeeping
/// `Σ junctions − Σ phase corrections` used by [`holonomy`].
fn lift_sampled(path: &SampledPath, start: &SpherePoint, tol: &Tolerances) -> Result<(SampledPath, f64), GeometryError> {
    if path.space() != Space::P1 {
        return Err(GeometryError::WrongSpace { expected: Space::P1, found: path.space() });
    }
    let Some(first) = path.first() else {
        return Err(GeometryError::InvalidPath("empty path".into()));
    };
    check_start(&first.p, start, tol)?;
    let mut current = start.c2();
    let mut prev_end: Option<C2> = None;
    let mut raw = 0.0;
    let mut pieces = Vec::with_capacity(path.pieces().len());
    for piece in path.pieces() {
        let s0 = &piece[0];
        if let Some(e) = prev_end {
            raw += e.inner(&s0.p).arg();
        }
        let mut psi = (s0.p.inner(&current) / s0.p.norm()).arg();
        let psi0 = psi;
        let mut out = Vec::with_capacity(piece.len());
        out.push(lifted_sample(s0.t, &s0.p, &s0.v, psi));
        for w in piece.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let inc = interval_phase(a, b, tol.quadrature * 1e-6, 0);
            // A smooth section cannot turn its phase much further than the
            // integrated connection predicts over one interval.
            let turn = principal_angle(a.p.inner(&b.p).arg() + inc);
            if turn.abs() > 0.25 {
                return Err(GeometryError::InvalidPath(format!(
                    "representative is not phase-continuous near t = {} (jump {turn:.3})",
                    a.t
                )));
            }
            psi += inc;
            out.push(lifted_sample(b.t, &b.p, &b.v, psi));
        }
        raw -= psi - psi0;
        current = out.last().expect("non-empty piece").p;
        prev_end = Some(piece.last().expect("non-empty piece").p);
        pieces.push(out);
    }
    Ok((SampledPath::from_pieces(Space::S3, pieces)?, raw))
}

fn interval_phase(a: &Sample, b: &Sample, tol: f64, depth: u32) -> f64 {
    let f = |t: f64| {
        let (p, v) = hermite(a, b, t);
        phase_rate(&p, &v)
    };
    let coarse = quad::gauss4(f, a.t, b.t);
    let mid = 0.5 * (a.t + b.t);
    let fine = quad::gauss4(f, a.t, mid) + quad::gauss4(f, mid, b.t);
    if (coarse - fine).abs() <= tol || depth >= 8 {
        fine
    } else {
        quad::integrate(f, a.t, b.t, tol)
    }
}

/// Legendrian lift of a path in `P¹` starting at `start`.
///
/// The output projects onto the input, is tangent to `ker η` at every sample,
/// and has the same parameters as the input.
pub fn legendrian_lift(path: &SampledPath, start: &SpherePoint, tol: &Tolerances) -> Result<SampledPath, GeometryError> {
    lift_sampled(path, start, tol).map(|(p, _)| p)
}

/// `∫ η` over the fiber arc that closes the Legendrian lift of a loop, in the
/// unwrapped branch obtained by following the lift continuously.
///
/// Counterclockwise loops (positive boundary orientation) have positive
/// holonomy equal to twice the enclosed Fubini–Study area.
pub fn holonomy(path: &SampledPath, start: &SpherePoint, tol: &Tolerances) -> Result<f64, GeometryError> {
    let (Some(first), Some(last)) = (path.first(), path.last()) else {
        return Err(GeometryError::InvalidPath("empty path".into()));
    };
    let a = first.p.normalized()?;
    let b = last.p.normalized()?;
    let distance = a.wedge(&b).norm();
    if distance > tol.closure {
        return Err(GeometryError::NotClosed { distance });
    }
    let (_, raw) = lift_sampled(path, start, tol)?;
    Ok(raw + b.inner(&a).arg())
}
