//! Boundaries of complex curves cut by the unit sphere.
//!
//! * complex lines: the section is a round circle, in closed form;
//! * the quadric `w² = a·z(z−1)`: parameterised rationally by `t = w/z`;
//! * level sets `{f = r·e^{iθ}} ∩ S³` of a few polynomials, traced by
//!   pseudo-arclength continuation.
//!
//! Every boundary is oriented as the boundary of the piece of curve inside the
//! ball, which makes it positively transverse.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{find_crossings, ChainError, Crossing, PtscCurve};
use crate::s3::GreatCircle;
use crate::s3::lift_curve;
use crate::s3::{eta_at, eta_integral, length_between, path_length, GeometryError, Sample, SampledPath, Space, SpherePoint, C2};
use crate::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SectionError {
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("tracing failed near {at:?}: {detail}")]
    TraceFailed { at: [f64; 4], detail: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

type Result<T, E = SectionError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    Circle,
    /// The line touches the sphere at one point.
    Tangent,
    Empty,
}

/// `{base + λ·dir : λ ∈ C} ∩ S³`.
#[derive(Clone, Debug, Serialize)]
pub struct LineSection {
    pub base: C2,
    pub dir: C2,
    pub kind: LineKind,
    /// Point of the line closest to the origin.
    pub center: C2,
    /// Unit direction.
    pub u: C2,
    pub radius: f64,
}

/// Two arcs of a circle cut at two points: `plus` runs from the first point to
/// the second in the positive direction, `minus` from the second back.
#[derive(Clone, Debug)]
pub struct SplitArcs {
    pub plus: SampledPath,
    pub minus: SampledPath,
    pub len_plus: f64,
    pub len_minus: f64,
}

/// The section of the complex line through `base` with direction `dir`.
pub fn line_section(base: C2, dir: C2) -> Result<LineSection> {
    let norm = dir.norm();
    if !(norm > 0.0) {
        return Err(SectionError::Degenerate("line direction is zero".into()));
    }
    let u = dir * (1.0 / norm);
    let center = base - u.scale(u.inner(&base));
    let d = center.norm();
    let (kind, radius) = if (d - 1.0).abs() <= 1e-12 {
        (LineKind::Tangent, 0.0)
    } else if d > 1.0 {
        (LineKind::Empty, 0.0)
    } else {
        (LineKind::Circle, (1.0 - d * d).sqrt())
    };
    Ok(LineSection { base, dir, kind, center, u, radius })
}

impl LineSection {
    /// `center + radius·e^{iθ}·u`.
    pub fn point(&self, theta: f64) -> C2 {
        self.center + self.u.scale(C64::from_polar(self.radius, theta))
    }

    pub fn velocity(&self, theta: f64) -> C2 {
        self.u.scale(C64::from_polar(self.radius, theta) * C64::new(0.0, 1.0))
    }

    /// Angle of a point of the circle.
    pub fn angle_of(&self, p: &C2) -> f64 {
        self.u.inner(&(*p - self.center)).arg()
    }

    pub fn length(&self) -> f64 {
        TAU * self.radius
    }

    /// The arc from angle `from`, turning by `turn`, as a path on `S³`.
    pub fn arc(&self, from: f64, turn: f64, n: usize) -> SampledPath {
        let n = n.max(2);
        let samples = (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                let th = from + turn * t;
                Sample { t, p: self.point(th), v: self.velocity(th) * turn }
            })
            .collect();
        SampledPath::single(Space::S3, samples).expect("uniform parameters")
    }

    pub fn circle(&self, n: usize) -> Option<SampledPath> {
        (self.kind == LineKind::Circle).then(|| self.arc(0.0, TAU, n))
    }

    /// Largest `|p|² − 1` and distance to the line over `n` samples.
    pub fn residual(&self, n: usize) -> f64 {
        let Some(c) = self.circle(n) else { return 0.0 };
        c.samples()
            .map(|s| {
                let on_line = (s.p - self.base).wedge(&self.u).norm();
                (s.p.norm_sqr() - 1.0).abs().max(on_line)
            })
            .fold(0.0, f64::max)
    }

    /// Cuts the circle at `p` and `q`.
    pub fn split(&self, p: &C2, q: &C2, n: usize) -> Result<SplitArcs> {
        if self.kind != LineKind::Circle {
            return Err(SectionError::Degenerate("line does not cut the sphere in a circle".into()));
        }
        let a = self.angle_of(p);
        let b = self.angle_of(q);
        let turn = (b - a).rem_euclid(TAU);
        if turn == 0.0 {
            return Err(SectionError::Degenerate("split points coincide".into()));
        }
        let plus = self.arc(a, turn, n);
        let minus = self.arc(b, TAU - turn, n);
        Ok(SplitArcs { len_plus: path_length(&plus), len_minus: path_length(&minus), plus, minus })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub t: f64,
    pub gamma_length: f64,
    pub ratio_plus: f64,
    pub ratio_minus: f64,
    /// Why the row was skipped, if it was.
    pub skipped: Option<String>,
}

/// A unit vector orthogonal to `p` in the Hermitian sense: a contact direction.
pub fn contact_direction(p: &C2) -> C2 {
    C2::new(-p.w.conj(), p.z.conj())
}

/// `2·len(S_t^±)/len(γ[0, t])` for the Legendrian path `γ` leaving `p0` in
/// the contact direction `v`, where `S_t^±` are the two arcs of the section
/// of the complex line through `p0` and `γ(t)`.
///
/// `γ` is built as the horizontal lift of a geodesic of `P¹`.
pub fn legendrian_ratio_with(p0: &SpherePoint, v: C2, t_list: &[f64]) -> Result<Vec<RatioRow>> {
    let p = p0.c2();
    let v = v - p.scale(p.inner(&v));
    let v = v.normalized()?;
    let t_max = t_list.iter().cloned().fold(0.0, f64::max);
    if !(t_max > 0.0 && t_max < FRAC_PI_2) {
        return Err(SectionError::Degenerate(format!("path parameters must lie in (0, π/2), got up to {t_max}")));
    }
    // The base geodesic through pr(p0) with initial direction pr(v), then lifted.
    let base = GreatCircle { p, u: v, from: 0.0, to: t_max };
    let n = ((t_max / 1e-3).ceil() as usize).max(200);
    let gamma = lift_curve(&base, n, p0, &Tolerances::default())?;
    let mut rows = Vec::new();
    for &t in t_list {
        let s = t / t_max;
        let Some((q, _)) = gamma.eval(s) else {
            rows.push(RatioRow { t, gamma_length: 0.0, ratio_plus: 0.0, ratio_minus: 0.0, skipped: Some("outside path".into()) });
            continue;
        };
        let gamma_length = length_between(&gamma, 0.0, s);
        let line = line_section(p, q - p)?;
        let row = match line.split(&p, &q, 400) {
            Ok(arcs) if gamma_length > 0.0 => RatioRow {
                t,
                gamma_length,
                ratio_plus: 2.0 * arcs.len_plus / gamma_length,
                ratio_minus: 2.0 * arcs.len_minus / gamma_length,
                skipped: None,
            },
            Ok(_) => RatioRow { t, gamma_length, ratio_plus: 0.0, ratio_minus: 0.0, skipped: Some("zero path length".into()) },
            Err(e) => RatioRow { t, gamma_length, ratio_plus: 0.0, ratio_minus: 0.0, skipped: Some(e.to_string()) },
        };
        rows.push(row);
    }
    Ok(rows)
}

/// [`legendrian_ratio_with`] in the default contact direction at `p0`.
pub fn legendrian_ratio_experiment(p0: &SpherePoint, t_list: &[f64]) -> Result<Vec<RatioRow>> {
    legendrian_ratio_with(p0, contact_direction(&p0.c2()), t_list)
}

/// One closed boundary curve with its measurements.
#[derive(Clone, Debug, Serialize)]
pub struct SectionComponent {
    #[serde(skip)]
    pub path: SampledPath,
    pub length: f64,
    pub eta_integral: f64,
    /// Distance between the last and first traced points.
    pub closure_gap: f64,
}

impl SectionComponent {
    fn new(path: SampledPath, closure_gap: f64) -> Result<Self> {
        let length = path_length(&path);
        let eta_integral = eta_integral(&path)?;
        Ok(SectionComponent { path, length, eta_integral, closure_gap })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Polynomial {
    /// `w² − a·z(z−1)`.
    Quadric { a: C64 },
    /// `(w − z + 1)(w + z − 1) = w² − (z − 1)²`.
    TwoLine,
}

impl Polynomial {
    pub fn eval(&self, p: &C2) -> C64 {
        let one = C64::new(1.0, 0.0);
        match *self {
            Polynomial::Quadric { a } => p.w * p.w - a * p.z * (p.z - one),
            Polynomial::TwoLine => p.w * p.w - (p.z - one) * (p.z - one),
        }
    }

    /// `(∂f/∂z, ∂f/∂w)`.
    pub fn grad(&self, p: &C2) -> (C64, C64) {
        let one = C64::new(1.0, 0.0);
        match *self {
            Polynomial::Quadric { a } => (-a * (p.z * 2.0 - one), p.w * 2.0),
            Polynomial::TwoLine => ((p.z - one) * -2.0, p.w * 2.0),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveSection {
    pub polynomial: Polynomial,
    /// The level `c` in `{f = c}`.
    pub level: C64,
    pub components: Vec<SectionComponent>,
    pub total_length: f64,
    pub eta_total: f64,
    /// Largest `|f − c|` over the samples.
    pub residual: f64,
    /// Largest `||p|² − 1|` over the samples.
    pub sphere_residual: f64,
}

impl CurveSection {
    fn new(polynomial: Polynomial, level: C64, components: Vec<SectionComponent>) -> Self {
        let mut residual: f64 = 0.0;
        let mut sphere_residual: f64 = 0.0;
        for c in &components {
            for s in c.path.samples() {
                residual = residual.max((polynomial.eval(&s.p) - level).norm());
                sphere_residual = sphere_residual.max((s.p.norm_sqr() - 1.0).abs());
            }
        }
        let total_length = components.iter().map(|c| c.length).sum();
        let eta_total = components.iter().map(|c| c.eta_integral).sum();
        CurveSection { polynomial, level, components, total_length, eta_total, residual, sphere_residual }
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// Dense point sets of the components, for distance comparisons.
    pub fn polylines(&self, per_interval: usize) -> Vec<Vec<C2>> {
        self.components.iter().map(|c| c.path.polyline(per_interval)).collect()
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn dsinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        -x / 3.0 + x.powi(3) / 30.0
    } else {
        (x * x.cos() - x.sin()) / (x * x)
    }
}

/// `t(ψ)` and `t'(ψ)` on the curve `|a|²(1 + |t|²) = |a − t²|²` for real
/// `a > 0`. For `a ≤ 2` the curve is a figure eight through `t = 0`; `ψ` in
/// `[−π/2, π/2]` runs over one lobe and `[π/2, 3π/2]` over the other. For
/// `a > 2` it is a single loop with `ψ` the polar angle.
fn quadric_t(a: f64, psi: f64) -> (C64, C64) {
    if a > 2.0 {
        let rho2 = a * a + 2.0 * a * (2.0 * psi).cos();
        let rho = rho2.sqrt();
        let drho = -2.0 * a * (2.0 * psi).sin() / rho;
        let e = C64::from_polar(1.0, psi);
        return (e * rho, e * C64::new(drho, rho));
    }
    // φ = φ₀ sin ψ with cos 2φ₀ = −a/2, and ρ² = 4a·sin(φ₀ + φ)·sin(φ₀ − φ)
    // written as (2φ₀ cos ψ)²·a·sinc(x)·sinc(y), x = φ₀(1 − sin ψ),
    // y = φ₀(1 + sin ψ), which stays smooth through ρ = 0.
    let phi0 = 0.5 * (-a / 2.0).acos();
    let (sp, cp) = psi.sin_cos();
    let phi = phi0 * sp;
    let dphi = phi0 * cp;
    let x = phi0 * (1.0 - sp);
    let y = phi0 * (1.0 + sp);
    let g = 2.0 * phi0 * (a * sinc(x) * sinc(y)).sqrt();
    let dg = 0.5 * g * (dsinc(x) * (-phi0 * cp) / sinc(x) + dsinc(y) * (phi0 * cp) / sinc(y));
    let rho = cp * g;
    let drho = -sp * g + cp * dg;
    let e = C64::from_polar(1.0, phi);
    (e * rho, e * C64::new(drho, rho * dphi))
}

/// Point and velocity of the quadric section at parameter `psi` for real `a`.
fn quadric_point(a: f64, psi: f64) -> (C2, C2) {
    let (t, dt) = quadric_t(a, psi);
    let ac = C64::new(a, 0.0);
    let den = ac - t * t;
    let z = ac / den;
    let dz = ac * t * dt * 2.0 / (den * den);
    let w = t * z;
    let dw = dt * z + t * dz;
    (C2::new(z, w), C2::new(dz, dw))
}

/// Boundary of `{w² = a·z(z−1)} ∩ B⁴`, `n` samples per component.
///
/// The curve is parameterised through `t = w/z`, where `z = a/(a − t²)`. For
/// complex `a` the substitution `w ↦ e^{i·arg(a)/2}·w` (a unitary map) reduces
/// to `|a|`. For `|a| ≤ 2` the section has two loops touching at `(1, 0)`,
/// where the curve is tangent to the sphere; for `|a| > 2` it is one loop.
pub fn quadric_boundary(a: C64, n: usize) -> Result<CurveSection> {
    if a.norm() == 0.0 || !a.norm().is_finite() {
        return Err(SectionError::Degenerate("a = 0 gives the double line w² = 0".into()));
    }
    let n = n.max(16);
    let r = a.norm();
    let twist = C64::from_polar(1.0, 0.5 * a.arg());
    let ranges: Vec<(f64, f64)> = if r > 2.0 { vec![(0.0, TAU)] } else { vec![(-FRAC_PI_2, FRAC_PI_2), (FRAC_PI_2, 1.5 * PI)] };
    let mut components = Vec::new();
    for (lo, hi) in ranges {
        let samples: Vec<Sample> = (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                let (p, v) = quadric_point(r, lo + (hi - lo) * s);
                let scale = hi - lo;
                Sample { t: s, p: C2::new(p.z, p.w * twist), v: C2::new(v.z, v.w * twist) * scale }
            })
            .collect();
        let mut path = SampledPath::single(Space::S3, samples)?;
        if eta_integral(&path)? < 0.0 {
            path = path.reversed();
        }
        let gap = path.start().zip(path.end()).map(|(x, y)| x.distance(&y)).unwrap_or(f64::INFINITY);
        components.push(SectionComponent::new(path, gap)?);
    }
    Ok(CurveSection::new(Polynomial::Quadric { a }, C64::new(0.0, 0.0), components))
}

/// The same section obtained by continuation from one point of the rational
/// parameterisation. Only available where the section is smooth (`|a| > 2`).
pub fn quadric_boundary_traced(a: C64, opts: &TraceOptions) -> Result<CurveSection> {
    if a.norm() <= 2.0 {
        return Err(SectionError::Degenerate(format!("|a| = {} ≤ 2: the section is singular at (1, 0)", a.norm())));
    }
    let rational = quadric_boundary(a, 64)?;
    let seeds: Vec<C2> = rational.components.iter().filter_map(|c| c.path.start()).collect();
    trace_components(Polynomial::Quadric { a }, C64::new(0.0, 0.0), &seeds, opts)
}

/// Sweep row of [`quadric_sweep`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadricRow {
    pub a: f64,
    pub total_length: f64,
    pub eta_integral: f64,
    pub component_count: usize,
}

/// `steps` equally spaced real values of `a` from `min` to `max` inclusive.
pub fn quadric_sweep(min: f64, max: f64, steps: usize, n: usize) -> Result<Vec<QuadricRow>> {
    if !(min > 0.0 && max > min && max.is_finite()) || steps < 2 {
        return Err(SectionError::Degenerate(format!("invalid range [{min}, {max}] with {steps} steps")));
    }
    (0..steps)
        .map(|i| {
            let a = min + (max - min) * i as f64 / (steps - 1) as f64;
            let s = quadric_boundary(C64::new(a, 0.0), n)?;
            Ok(QuadricRow { a, total_length: s.total_length, eta_integral: s.eta_total, component_count: s.component_count() })
        })
        .collect()
}

/// CSV with header `a,total_length,eta_integral,component_count`.
pub fn write_quadric_csv<W: Write>(rows: &[QuadricRow], w: W) -> crate::Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

/// JSON array of sections, each with its components as `[Re z, Im z, Re w, Im w]` points.
pub fn write_sections_json<W: Write>(sections: &[CurveSection], w: W, per_interval: usize) -> crate::Result<()> {
    #[derive(Serialize)]
    struct Comp<'a> {
        #[serde(flatten)]
        info: &'a SectionComponent,
        points: Vec<[f64; 4]>,
    }
    #[derive(Serialize)]
    struct Sec<'a> {
        polynomial: Polynomial,
        level: [f64; 2],
        total_length: f64,
        eta_total: f64,
        components: Vec<Comp<'a>>,
    }
    let out: Vec<Sec> = sections
        .iter()
        .map(|s| Sec {
            polynomial: s.polynomial,
            level: [s.level.re, s.level.im],
            total_length: s.total_length,
            eta_total: s.eta_total,
            components: s
                .components
                .iter()
                .map(|c| Comp { info: c, points: c.path.polyline(per_interval).iter().map(|p| p.coords()).collect() })
                .collect(),
        })
        .collect();
    serde_json::to_writer(w, &out)?;
    Ok(())
}

/// Continuation settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    pub max_step: f64,
    pub min_step: f64,
    /// Largest turn of the tangent over one step, in radians.
    pub max_turn: f64,
    pub max_steps: usize,
    /// Corrector residual target.
    pub tol: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { max_step: 0.01, min_step: 1e-9, max_turn: 0.2, max_steps: 200_000, tol: 1e-12 }
    }
}

/// Unit tangent of `{f = c} ∩ S³` at `p`, oriented so that `η > 0`:
/// `T = i·conj⟨p, τ⟩·τ` with `τ = (f_w, −f_z)`.
fn level_tangent(f: &Polynomial, p: &C2) -> Option<C2> {
    let (fz, fw) = f.grad(p);
    let tau = C2::new(fw, -fz);
    let lam = C64::new(0.0, 1.0) * p.inner(&tau).conj();
    let t = tau.scale(lam);
    let n = t.norm();
    (n > 1e-14).then(|| t * (1.0 / n))
}

/// Newton iteration onto `|p|² = 1`, `f(p) = c` and, when `plane` is given,
/// `Re⟨x − o, d⟩ = 0` for `plane = (o, d)`. Without the plane the step is the
/// minimum-norm solution.
fn correct(f: &Polynomial, c: C64, mut p: C2, plane: Option<(C2, C2)>, tol: f64) -> Option<C2> {
    for _ in 0..30 {
        let val = f.eval(&p) - c;
        let (fz, fw) = f.grad(&p);
        // Rows over the real coordinates (Re z, Im z, Re w, Im w).
        let pc = p.coords();
        let mut rows: Vec<[f64; 4]> = vec![
            [2.0 * pc[0], 2.0 * pc[1], 2.0 * pc[2], 2.0 * pc[3]],
            [fz.re, -fz.im, fw.re, -fw.im],
            [fz.im, fz.re, fw.im, fw.re],
        ];
        let mut rhs = vec![-(p.norm_sqr() - 1.0), -val.re, -val.im];
        if let Some((o, d)) = plane {
            rows.push(d.coords());
            rhs.push(-(p - o).dot(&d));
        }
        let res = rhs.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let delta = if rows.len() == 4 { solve4(&rows, &rhs)? } else { min_norm3(&rows, &rhs)? };
        p = C2::from_coords([pc[0] + delta[0], pc[1] + delta[1], pc[2] + delta[2], pc[3] + delta[3]]);
        let step = delta.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if res <= tol && step <= 1e-13 {
            return Some(p);
        }
        if step <= 1e-15 {
            return (res <= 1e3 * tol).then_some(p);
        }
    }
    let val = (f.eval(&p) - c).norm().max((p.norm_sqr() - 1.0).abs());
    (val <= 1e3 * tol).then_some(p)
}

fn solve4(a: &[[f64; 4]], b: &[f64]) -> Option<[f64; 4]> {
    let mut m = [[0.0; 5]; 4];
    for i in 0..4 {
        m[i][..4].copy_from_slice(&a[i]);
        m[i][4] = b[i];
    }
    for col in 0..4 {
        let piv = (col..4).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))?;
        if m[piv][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..4 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..5 {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    Some([m[0][4] / m[0][0], m[1][4] / m[1][1], m[2][4] / m[2][2], m[3][4] / m[3][3]])
}

/// `Jᵀ(JJᵀ)⁻¹b` for a 3×4 matrix `J`.
fn min_norm3(j: &[[f64; 4]], b: &[f64]) -> Option<[f64; 4]> {
    let mut g = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            g[r][c] = (0..4).map(|k| j[r][k] * j[c][k]).sum();
        }
    }
    let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    if det.abs() < 1e-24 {
        return None;
    }
    // Cramer's rule.
    let solve_col = |col: usize| {
        let mut m = g;
        for r in 0..3 {
            m[r][col] = b[r];
        }
        (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
            / det
    };
    let y = [solve_col(0), solve_col(1), solve_col(2)];
    let mut x = [0.0; 4];
    for k in 0..4 {
        x[k] = (0..3).map(|r| j[r][k] * y[r]).sum();
    }
    Some(x)
}

/// Traces the component of `{f = c} ∩ S³` through `seed` once around.
/// Returns the path (parameterised by arclength) and the closure gap.
fn trace_one(f: &Polynomial, c: C64, seed: C2, opts: &TraceOptions) -> Result<(SampledPath, f64)> {
    let fail = |p: &C2, detail: String| SectionError::TraceFailed { at: p.coords(), detail };
    let start = correct(f, c, seed, None, opts.tol).ok_or_else(|| fail(&seed, "corrector did not converge at the seed".into()))?;
    let t0 = level_tangent(f, &start).ok_or_else(|| fail(&start, "singular point".into()))?;
    let mut samples = vec![Sample { t: 0.0, p: start, v: t0 }];
    let mut p = start;
    let mut tan = t0;
    let mut s = 0.0;
    let mut h = opts.max_step;
    for _ in 0..opts.max_steps {
        // Close the loop once the start is within one step ahead.
        let to_start = start - p;
        let d = to_start.norm();
        if s > 4.0 * opts.max_step && d <= 1.5 * h && to_start.dot(&tan) > 0.0 {
            let q = correct(f, c, p + tan * d, Some((start, t0)), opts.tol).ok_or_else(|| fail(&p, "closing step failed".into()))?;
            let gap = q.distance(&start);
            let chord = p.distance(&start);
            samples.push(Sample { t: s + chord, p: start, v: t0 });
            return Ok((SampledPath::single(Space::S3, samples)?, gap));
        }
        let predicted = p + tan * h;
        let next = correct(f, c, predicted, Some((predicted, tan)), opts.tol).and_then(|q| level_tangent(f, &q).map(|tq| (q, tq)));
        match next {
            Some((q, tq)) if tq.dot(&tan).clamp(-1.0, 1.0).acos() <= opts.max_turn => {
                s += q.distance(&p);
                samples.push(Sample { t: s, p: q, v: tq });
                p = q;
                tan = tq;
                h = (h * 1.5).min(opts.max_step);
            }
            _ => {
                h *= 0.5;
                if h < opts.min_step {
                    return Err(fail(&p, format!("step collapsed below {:e}", opts.min_step)));
                }
            }
        }
    }
    Err(fail(&p, format!("no closure after {} steps", opts.max_steps)))
}

/// Traces the components through the seeds, skipping seeds that lie on a
/// component already found.
pub fn trace_components(f: Polynomial, c: C64, seeds: &[C2], opts: &TraceOptions) -> Result<CurveSection> {
    let mut comps: Vec<SectionComponent> = Vec::new();
    let mut clouds: Vec<Vec<C2>> = Vec::new();
    for &seed in seeds {
        let Some(q) = correct(&f, c, seed, None, opts.tol) else { continue };
        if clouds.iter().any(|cl| cl.iter().any(|x| x.distance(&q) < 2.0 * opts.max_step)) {
            continue;
        }
        let (path, gap) = trace_one(&f, c, q, opts)?;
        clouds.push(path.polyline(2));
        comps.push(SectionComponent::new(path, gap)?);
    }
    Ok(CurveSection::new(f, c, comps))
}

/// `{f = r·e^{iθ}} ∩ S³` for the supported polynomials, seeded from the
/// section at `r = 0`.
pub fn trace_level_set(f: Polynomial, r: f64, theta: f64, opts: &TraceOptions) -> Result<CurveSection> {
    let level = C64::from_polar(r, theta);
    let seeds: Vec<C2> = match f {
        Polynomial::TwoLine => {
            let s = two_line_ptsc(64);
            [0.25, 0.5, 0.75]
                .iter()
                .flat_map(|&u| s.components.iter().filter_map(move |c| c.eval(u * TAU).map(|(p, _)| p)))
                .collect()
        }
        Polynomial::Quadric { a } => {
            let s = quadric_boundary(a, 64)?;
            s.components.iter().filter_map(|c| c.path.eval(0.3).map(|(p, _)| p)).collect()
        }
    };
    trace_components(f, level, &seeds, opts)
}

/// The two circles of `{(w − z + 1)(w + z − 1) = 0} ∩ S³`,
/// `z = ½ + ½e^{iτ}`, `w = ∓(½ − ½e^{iτ})`, meeting once at `(1, 0)`.
pub fn two_line_ptsc(n: usize) -> PtscCurve {
    let n = n.max(8);
    let circle = |sign: f64| {
        let samples = (0..n)
            .map(|i| {
                let t = TAU * i as f64 / (n - 1) as f64;
                let e = C64::from_polar(0.5, t);
                let de = e * C64::new(0.0, 1.0);
                let z = C64::new(0.5, 0.0) + e;
                let w = (C64::new(-0.5, 0.0) + e) * sign;
                Sample { t, p: C2::new(z, w), v: C2::new(de, de * sign) }
            })
            .collect();
        SampledPath::single(Space::S3, samples).expect("uniform parameters")
    };
    let crossing = Crossing { point: C2::real(1.0, 0.0), a: 0, ta: 0.0, b: 1, tb: 0.0 };
    PtscCurve::new(vec![circle(1.0), circle(-1.0)], vec![crossing])
}

/// Two transverse circles meeting at two points:
/// `A(t) = (0.8e^{it}, 0.6)` and `B(t) = (0.8e^{it}, 0.6e^{0.5i·sin t})`,
/// crossing at `t = 0` and `t = π`.
pub fn two_crossing_ptsc(n: usize) -> PtscCurve {
    let n = n.max(8);
    let make = |wobble: f64| {
        let samples = (0..n)
            .map(|i| {
                let t = TAU * i as f64 / (n - 1) as f64;
                let z = C64::from_polar(0.8, t);
                let ph = wobble * t.sin();
                let w = C64::from_polar(0.6, ph);
                let dz = z * C64::new(0.0, 1.0);
                let dw = w * C64::new(0.0, wobble * t.cos());
                Sample { t, p: C2::new(z, w), v: C2::new(dz, dw) }
            })
            .collect();
        SampledPath::single(Space::S3, samples).expect("uniform parameters")
    };
    let comps = vec![make(0.0), make(0.5)];
    let crossings = vec![
        Crossing { point: C2::real(0.8, 0.6), a: 0, ta: 0.0, b: 1, tb: 0.0 },
        Crossing { point: C2::real(-0.8, 0.6), a: 0, ta: PI, b: 1, tb: PI },
    ];
    PtscCurve::new(comps, crossings)
}

/// PTSC curve with crossings located numerically rather than supplied.
pub fn ptsc_with_found_crossings(components: Vec<SampledPath>, tol: f64) -> PtscCurve {
    let crossings = find_crossings(&components, tol);
    PtscCurve::new(components, crossings)
}

/// Symmetric Hausdorff distance between two point clouds.
pub fn hausdorff(a: &[C2], b: &[C2]) -> f64 {
    let directed = |x: &[C2], y: &[C2]| {
        x.iter()
            .map(|p| y.iter().map(|q| p.distance(q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Smallest `η` over the samples of a path.
pub fn min_eta(path: &SampledPath) -> f64 {
    path.samples().map(|s| eta_at(&s.p, &s.v)).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_quadric_lies_on_the_sphere() {
        for a in [0.5, 1.9, 2.0, 2.5, 3.0] {
            let s = quadric_boundary(C64::new(a, 0.0), 200).unwrap();
            assert!(s.residual < 1e-12 && s.sphere_residual < 1e-12, "a = {a}");
        }
    }

    #[test]
    fn analytic_velocity_matches_difference_quotient() {
        for a in [0.7, 2.0, 2.6] {
            for psi in [-1.2, -0.3, 0.4, 1.1, 2.0, 3.9] {
                let h = 1e-6;
                let (p1, _) = quadric_point(a, psi + h);
                let (p0, _) = quadric_point(a, psi - h);
                let (_, v) = quadric_point(a, psi);
                let fd = (p1 - p0) * (0.5 / h);
                assert!((fd - v).norm() < 1e-6 * (1.0 + v.norm()), "a = {a}, ψ = {psi}");
            }
        }
    }
}
