//! The model contact space `(R³, η = dz − y dx)`.
//!
//! Planar paths lift uniquely to Legendrian paths by `z = z₀ + ∫ y dx`. Two
//! nearby points are joined by a short Legendrian connector: lift the straight
//! segment, then lift a small circle whose enclosed area absorbs the height
//! mismatch. A Legendrian cycle bounding a fine triangulated 2-chain splits into
//! short cycles, one per triangle, by replacing every interior edge with a
//! connector. The last part solves the two smooth branches of
//! `(x + iz)(y + iz) = c`.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{Chain1, Handle};
use crate::quad::{GaussRule, GAUSS4};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum R3Error {
    #[error("ε = {0} outside (0, 1/2)")]
    EpsilonOutOfRange(f64),
    #[error("|y| = {y} at the {which} point, must be < 1")]
    YOutOfRange { which: &'static str, y: f64 },
    #[error("points are {distance} apart, must be < ε² = {limit}")]
    TooFar { distance: f64, limit: f64 },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("cycle is not closed: gap {0:e} after arc {1}")]
    NotClosed(f64, usize),
    #[error("spanning chain does not bound the cycle: {0}")]
    Spanning(String),
    #[error("refinement stopped at level {level} ({triangles} triangles): {detail}")]
    RefinementFailed { level: u32, triangles: usize, detail: String },
    #[error("c = {0} lies on the closed negative real axis; the level set is singular")]
    SingularLevel(C64),
}

type R3Result<T> = Result<T, R3Error>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarSample {
    pub t: f64,
    pub p: [f64; 2],
    pub v: [f64; 2],
}

/// A piecewise `C²` path in the plane, stored as samples with derivatives.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanarPath {
    pub pieces: Vec<Vec<PlanarSample>>,
}

impl PlanarPath {
    /// `n` uniform samples of a closed-form path on `[0, 1]`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> ([f64; 2], [f64; 2])) -> Self {
        let n = n.max(2);
        let samples = (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                let (p, v) = f(t);
                PlanarSample { t, p, v }
            })
            .collect();
        PlanarPath { pieces: vec![samples] }
    }

    pub fn segment(a: [f64; 2], b: [f64; 2], n: usize) -> Self {
        let d = [b[0] - a[0], b[1] - a[1]];
        Self::from_fn(n, |t| ([a[0] + t * d[0], a[1] + t * d[1]], d))
    }

    /// Circle of radius `r` about `c`, from angle `phi0`, turning by `turn`.
    pub fn arc(c: [f64; 2], r: f64, phi0: f64, turn: f64, n: usize) -> Self {
        Self::from_fn(n, |t| {
            let phi = phi0 + turn * t;
            ([c[0] + r * phi.cos(), c[1] + r * phi.sin()], [-r * phi.sin() * turn, r * phi.cos() * turn])
        })
    }

    pub fn start(&self) -> Option<[f64; 2]> {
        self.pieces.first().and_then(|p| p.first()).map(|s| s.p)
    }

    pub fn length(&self) -> f64 {
        let mut total = 0.0;
        for piece in &self.pieces {
            for w in piece.windows(2) {
                total += gauss_interval(w[0].t, w[1].t, |t| {
                    let (_, v) = hermite2(&w[0], &w[1], t);
                    v[0].hypot(v[1])
                });
            }
        }
        total
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSample {
    pub t: f64,
    pub p: [f64; 3],
    pub v: [f64; 3],
}

/// A piecewise smooth path in `R³`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpacePath {
    pub pieces: Vec<Vec<SpaceSample>>,
}

impl SpacePath {
    pub fn is_empty(&self) -> bool {
        self.pieces.iter().all(|p| p.is_empty())
    }

    pub fn start(&self) -> Option<[f64; 3]> {
        self.pieces.first().and_then(|p| p.first()).map(|s| s.p)
    }

    pub fn end(&self) -> Option<[f64; 3]> {
        self.pieces.last().and_then(|p| p.last()).map(|s| s.p)
    }

    pub fn samples(&self) -> impl Iterator<Item = &SpaceSample> + '_ {
        self.pieces.iter().flatten()
    }

    pub fn length(&self) -> f64 {
        self.length_between(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Length of the part with parameters in `[t0, t1]`.
    pub fn length_between(&self, t0: f64, t1: f64) -> f64 {
        let mut total = 0.0;
        for piece in &self.pieces {
            for w in piece.windows(2) {
                let lo = w[0].t.max(t0);
                let hi = w[1].t.min(t1);
                if hi > lo {
                    total += gauss_interval(lo, hi, |t| norm3(hermite3(&w[0], &w[1], t).1));
                }
            }
        }
        total
    }

    /// `max |ż − y ẋ|` over the samples.
    pub fn legendrian_residual(&self) -> f64 {
        self.samples().map(|s| (s.v[2] - s.p[1] * s.v[0]).abs()).fold(0.0, f64::max)
    }

    pub fn eval(&self, t: f64) -> Option<[f64; 3]> {
        for piece in &self.pieces {
            let (Some(a), Some(b)) = (piece.first(), piece.last()) else { continue };
            if t < a.t - 1e-15 || t > b.t + 1e-15 {
                continue;
            }
            if piece.len() == 1 {
                return Some(a.p);
            }
            let idx = piece.partition_point(|s| s.t <= t).clamp(1, piece.len() - 1);
            return Some(hermite3(&piece[idx - 1], &piece[idx], t).0);
        }
        None
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm3([b[0] - a[0], b[1] - a[1], b[2] - a[2]])
}

fn gauss_interval(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    half * GAUSS4.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>()
}

fn hermite_weights(t0: f64, t1: f64, t: f64) -> ([f64; 4], [f64; 4]) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let (s2, s3) = (s * s, s * s * s);
    (
        [2.0 * s3 - 3.0 * s2 + 1.0, (s3 - 2.0 * s2 + s) * h, -2.0 * s3 + 3.0 * s2, (s3 - s2) * h],
        [(6.0 * s2 - 6.0 * s) / h, 3.0 * s2 - 4.0 * s + 1.0, (-6.0 * s2 + 6.0 * s) / h, 3.0 * s2 - 2.0 * s],
    )
}

fn hermite2(a: &PlanarSample, b: &PlanarSample, t: f64) -> ([f64; 2], [f64; 2]) {
    let (h, d) = hermite_weights(a.t, b.t, t);
    let f = |k: usize, w: &[f64; 4]| w[0] * a.p[k] + w[1] * a.v[k] + w[2] * b.p[k] + w[3] * b.v[k];
    ([f(0, &h), f(1, &h)], [f(0, &d), f(1, &d)])
}

fn hermite3(a: &SpaceSample, b: &SpaceSample, t: f64) -> ([f64; 3], [f64; 3]) {
    let (h, d) = hermite_weights(a.t, b.t, t);
    let f = |k: usize, w: &[f64; 4]| w[0] * a.p[k] + w[1] * a.v[k] + w[2] * b.p[k] + w[3] * b.v[k];
    ([f(0, &h), f(1, &h), f(2, &h)], [f(0, &d), f(1, &d), f(2, &d)])
}

/// Legendrian lift of a planar path starting at height `z0`.
pub fn lift_planar(path: &PlanarPath, z0: f64) -> SpacePath {
    let mut z = z0;
    let mut pieces = Vec::with_capacity(path.pieces.len());
    for piece in &path.pieces {
        let mut out = Vec::with_capacity(piece.len());
        for (i, s) in piece.iter().enumerate() {
            if i > 0 {
                let a = &piece[i - 1];
                z += gauss_interval(a.t, s.t, |t| {
                    let (p, v) = hermite2(a, s, t);
                    p[1] * v[0]
                });
            }
            out.push(SpaceSample { t: s.t, p: [s.p[0], s.p[1], z], v: [s.v[0], s.v[1], s.p[1] * s.v[0]] });
        }
        pieces.push(out);
    }
    SpacePath { pieces }
}

/// The bound `L·√(1 + (|y₀| + L)²)` on the length of a lifted path.
pub fn lift_length_bound(length: f64, y0: f64) -> f64 {
    length * (1.0 + (y0.abs() + length).powi(2)).sqrt()
}

/// `c₁(ε)/ε` bound: segment lift plus circle lift, with `|y| < 1`, chord `< ε²`.
fn connector_ratio(eps: f64) -> f64 {
    let e2 = eps * eps;
    let seg = eps * (1.0 + (1.0 + e2).powi(2)).sqrt();
    let k = 2.0 * (PI * (2.0 + e2)).sqrt();
    let circ = k * (1.0 + (1.0 + k * eps).powi(2)).sqrt();
    seg + circ
}

/// The constant `c₁` such that every connector is shorter than `c₁·ε`.
///
/// Derivation, for `|y₀|, |y₁| < 1` and `d = ‖p₁ − p₀‖ < ε²`: the segment has
/// length `d` and `|y| ≤ 1 + ε²` on it, so its lift is shorter than
/// `ε²√(1 + (1 + ε²)²)`. The height defect after it is at most
/// `|z₁ − z₀| + |∫ y dx| ≤ ε² + (1 + ε²)ε²`, so the circle has perimeter
/// `a ≤ 2ε√(π(2 + ε²))` and its lift is shorter than `a√(1 + (1 + a)²)`.
/// Both bounds grow with `ε`; evaluating at `ε = 1/2` gives `c₁ ≈ 20.97`.
pub fn connector_constant() -> f64 {
    connector_ratio(0.5)
}

/// Closed-form description of a connector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectorSpec {
    pub p0: [f64; 3],
    pub p1: [f64; 3],
    /// Height reached by the segment lift at the projection of `p1`.
    pub z_mid: f64,
    /// Circle radius (0 when the segment already lands on `p1`).
    pub radius: f64,
    /// `+1` counterclockwise, `−1` clockwise.
    pub turn: f64,
}

fn gauss8() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(8))
}

impl ConnectorSpec {
    /// Builds the connector without checking the preconditions.
    pub fn new(p0: [f64; 3], p1: [f64; 3]) -> Self {
        let dx = p1[0] - p0[0];
        let dy = p1[1] - p0[1];
        let z_mid = p0[2] + dx * (p0[1] + 0.5 * dy);
        let defect = p1[2] - z_mid;
        let radius = (defect.abs() / PI).sqrt();
        // ∮ y dx = −area counterclockwise.
        let turn = if defect > 0.0 { -1.0 } else { 1.0 };
        ConnectorSpec { p0, p1, z_mid, radius, turn }
    }

    fn center(&self) -> [f64; 2] {
        [self.p1[0] + self.radius, self.p1[1]]
    }

    pub fn segment_length(&self) -> f64 {
        let dx = self.p1[0] - self.p0[0];
        let dy = self.p1[1] - self.p0[1];
        gauss8().integrate(
            |t| {
                let y = self.p0[1] + t * dy;
                (dx * dx * (1.0 + y * y) + dy * dy).sqrt()
            },
            0.0,
            1.0,
        )
    }

    pub fn circle_length(&self) -> f64 {
        if self.radius == 0.0 {
            return 0.0;
        }
        // Periodic integrand: the trapezoid rule converges geometrically.
        let n = 64;
        let [_, cy] = self.center();
        let r = self.radius;
        let sum: f64 = (0..n)
            .map(|k| {
                let phi = TAU * k as f64 / n as f64;
                let y = cy + r * phi.sin();
                (1.0 + (y * phi.sin()).powi(2)).sqrt()
            })
            .sum();
        r * TAU * sum / n as f64
    }

    pub fn length(&self) -> f64 {
        self.segment_length() + self.circle_length()
    }

    /// Sampled geometry: the segment lift, then the circle lift.
    pub fn path(&self, n: usize) -> SpacePath {
        if self.p0 == self.p1 {
            return SpacePath::default();
        }
        let n = n.max(2);
        let (x0, y0, z0) = (self.p0[0], self.p0[1], self.p0[2]);
        let dx = self.p1[0] - x0;
        let dy = self.p1[1] - y0;
        let mut pieces = Vec::new();
        let has_segment = dx != 0.0 || dy != 0.0;
        let has_circle = self.radius > 0.0;
        let t_split = match (has_segment, has_circle) {
            (true, true) => 0.5,
            (true, false) => 1.0,
            _ => 0.0,
        };
        if has_segment {
            let seg = (0..n)
                .map(|i| {
                    let s = i as f64 / (n - 1) as f64;
                    let y = y0 + s * dy;
                    let z = z0 + dx * (y0 * s + 0.5 * dy * s * s);
                    let k = 1.0 / t_split;
                    SpaceSample { t: s * t_split, p: [x0 + s * dx, y, z], v: [dx * k, dy * k, y * dx * k] }
                })
                .collect();
            pieces.push(seg);
        }
        if has_circle {
            let [cx, cy] = self.center();
            let r = self.radius;
            let span = 1.0 - t_split;
            let turn = self.turn * TAU;
            let circ = (0..n)
                .map(|i| {
                    let s = i as f64 / (n - 1) as f64;
                    let phi = PI + turn * s;
                    let y = cy + r * phi.sin();
                    let dphi = turn / span;
                    let dxv = -r * phi.sin() * dphi;
                    let z = self.z_mid + cy * r * (phi.cos() - PI.cos()) - r * r * (0.5 * (phi - PI) - 0.25 * (2.0 * phi).sin());
                    SpaceSample { t: t_split + s * span, p: [cx + r * phi.cos(), y, z], v: [dxv, r * phi.cos() * dphi, y * dxv] }
                })
                .collect();
            pieces.push(circ);
        }
        SpacePath { pieces }
    }
}

/// Short Legendrian path from `p0` to `p1`, for `|y| < 1` at both ends,
/// `‖p₁ − p₀‖ < ε²` and `ε < 1/2`. Shorter than `connector_constant()·ε`.
pub fn connector(p0: [f64; 3], p1: [f64; 3], eps: f64) -> R3Result<SpacePath> {
    Ok(connector_checked(p0, p1, eps)?.path(48))
}

/// [`connector`] without sampling the geometry.
pub fn connector_checked(p0: [f64; 3], p1: [f64; 3], eps: f64) -> R3Result<ConnectorSpec> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(R3Error::EpsilonOutOfRange(eps));
    }
    if p0[1].abs() >= 1.0 {
        return Err(R3Error::YOutOfRange { which: "start", y: p0[1] });
    }
    if p1[1].abs() >= 1.0 {
        return Err(R3Error::YOutOfRange { which: "end", y: p1[1] });
    }
    let distance = dist3(p0, p1);
    if distance >= eps * eps {
        return Err(R3Error::TooFar { distance, limit: eps * eps });
    }
    Ok(ConnectorSpec::new(p0, p1))
}

/// A Legendrian arc with identity.
#[derive(Clone, Debug)]
pub struct R3Arc {
    pub handle: Handle,
    pub path: SpacePath,
}

impl R3Arc {
    pub fn new(path: SpacePath) -> Self {
        R3Arc { handle: Handle::fresh(), path }
    }

    fn param_range(&self) -> (f64, f64) {
        let a = self.path.pieces.first().and_then(|p| p.first()).map(|s| s.t).unwrap_or(0.0);
        let b = self.path.pieces.last().and_then(|p| p.last()).map(|s| s.t).unwrap_or(0.0);
        (a, b)
    }

    fn at(&self, s: f64) -> [f64; 3] {
        let (a, b) = self.param_range();
        self.path.eval(a + s * (b - a)).expect("arc parameter in range")
    }

    fn length_fraction(&self, s0: f64, s1: f64) -> f64 {
        let (a, b) = self.param_range();
        self.path.length_between(a + s0 * (b - a), a + s1 * (b - a))
    }
}

/// The cone over a closed chain of arcs: triangles `(apex, vᵢ, vᵢ₊₁)` where
/// arc `i` runs from `vᵢ` to `vᵢ₊₁`. Its boundary is the chain of arcs.
#[derive(Clone, Debug)]
pub struct Triangulation {
    pub apex: [f64; 3],
    pub boundary: Vec<Handle>,
}

impl Triangulation {
    pub fn cone(apex: [f64; 3], alpha: &[R3Arc]) -> Self {
        Triangulation { apex, boundary: alpha.iter().map(|a| a.handle).collect() }
    }

    pub fn triangle_count(&self) -> usize {
        self.boundary.len()
    }
}

/// The short cycles produced by [`decompose_cycle`].
///
/// Cone triangle `i` is refined into an `N × N` grid in cone coordinates
/// `(u, s) ↦ (1 − u)·apex + u·αᵢ(s)`, each grid square cut along its
/// diagonal. Boundary edges at `u = 1` are pieces of the input arcs; every
/// other edge is a connector. Cycles are generated on demand.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub level: u32,
    pub n: usize,
    arcs: usize,
    base: Handle,
    /// Handle of the first piece of each input arc; arc `i` piece `b` is `pieces[i].offset(b)`.
    pub pieces: Vec<(Handle, Handle)>,
    cycle_lengths: Vec<f64>,
}

/// Edge kinds: radial `(a, b) → (a+1, b)`, along `(a, b) → (a, b+1)`,
/// diagonal `(a, b) → (a+1, b+1)`.
#[derive(Clone, Copy)]
enum Edge {
    Radial(usize, usize, usize),
    Along(usize, usize, usize),
    Diagonal(usize, usize, usize),
}

impl Decomposition {
    fn empty() -> Self {
        Decomposition { level: 0, n: 0, arcs: 0, base: Handle(0), pieces: vec![], cycle_lengths: vec![] }
    }

    pub fn len(&self) -> usize {
        self.cycle_lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle_lengths.is_empty()
    }

    pub fn cycle_lengths(&self) -> &[f64] {
        &self.cycle_lengths
    }

    pub fn max_length(&self) -> f64 {
        self.cycle_lengths.iter().copied().fold(0.0, f64::max)
    }

    fn radial_count(&self) -> usize {
        self.arcs * self.n * self.n
    }

    fn interior_along_count(&self) -> usize {
        self.arcs * (self.n - 1) * self.n
    }

    /// Handle and sign of an oriented edge.
    fn handle(&self, e: Edge) -> (Handle, i64) {
        let n = self.n;
        match e {
            Edge::Radial(i, a, b) => {
                let (i, b) = if b == n { ((i + 1) % self.arcs, 0) } else { (i, b) };
                (self.base.offset(((i * n + a) * n + b) as u64), 1)
            }
            Edge::Along(i, a, b) if a == n => (self.pieces[i].1.offset(b as u64), 1),
            Edge::Along(i, a, b) => (self.base.offset((self.radial_count() + (i * (n - 1) + a - 1) * n + b) as u64), 1),
            Edge::Diagonal(i, a, b) => {
                let off = self.radial_count() + self.interior_along_count() + (i * (n - 1) + a - 1) * n + b;
                (self.base.offset(off as u64), 1)
            }
        }
    }

    fn cycle_edges(&self, idx: usize) -> Vec<(Edge, i64)> {
        let n = self.n;
        let per_arc = n + 2 * (n - 1) * n;
        let i = idx / per_arc;
        let r = idx % per_arc;
        if r < n {
            let b = r;
            return vec![(Edge::Radial(i, 0, b), 1), (Edge::Along(i, 1, b), 1), (Edge::Radial(i, 0, b + 1), -1)];
        }
        let r = r - n;
        let (a, b, second) = (1 + r / (2 * n), (r % (2 * n)) / 2, r % 2 == 1);
        if !second {
            vec![(Edge::Radial(i, a, b), 1), (Edge::Along(i, a + 1, b), 1), (Edge::Diagonal(i, a, b), -1)]
        } else {
            vec![(Edge::Diagonal(i, a, b), 1), (Edge::Radial(i, a, b + 1), -1), (Edge::Along(i, a, b), -1)]
        }
    }

    /// Cycle `idx` as a chain.
    pub fn cycle(&self, idx: usize) -> Chain1 {
        let mut c = Chain1::new();
        for (e, sign) in self.cycle_edges(idx) {
            let (h, s) = self.handle(e);
            c.add_term(h, s * sign);
        }
        c
    }

    pub fn cycles(&self) -> impl Iterator<Item = Chain1> + '_ {
        (0..self.len()).map(|i| self.cycle(i))
    }

    /// Sum of all cycles, accumulated densely over the handle blocks.
    pub fn sum(&self) -> Chain1 {
        if self.is_empty() {
            return Chain1::new();
        }
        let interior = self.radial_count() + 2 * self.interior_along_count();
        let mut dense = vec![0i64; interior];
        let mut boundary = vec![0i64; self.arcs * self.n];
        for idx in 0..self.len() {
            for (e, sign) in self.cycle_edges(idx) {
                match e {
                    Edge::Along(i, a, b) if a == self.n => boundary[i * self.n + b] += sign,
                    _ => {
                        let (h, s) = self.handle(e);
                        dense[(h.0 - self.base.0) as usize] += s * sign;
                    }
                }
            }
        }
        let mut out = Chain1::new();
        for (k, &m) in dense.iter().enumerate() {
            out.add_term(self.base.offset(k as u64), m);
        }
        for (k, &m) in boundary.iter().enumerate() {
            out.add_term(self.pieces[k / self.n].1.offset((k % self.n) as u64), m);
        }
        out
    }

    /// `alpha` with every input arc replaced by the sum of its pieces.
    pub fn expand(&self, alpha: &Chain1) -> Chain1 {
        let mut out = Chain1::new();
        for (h, m) in alpha.terms() {
            match self.pieces.iter().find(|(orig, _)| *orig == h) {
                Some(&(_, first)) => {
                    for b in 0..self.n {
                        out.add_term(first.offset(b as u64), m);
                    }
                }
                None => out.add_term(h, m),
            }
        }
        out
    }
}

/// Splits a Legendrian cycle into cycles shorter than `eps`.
///
/// The cone is refined by halving until every connector precondition holds
/// (edges shorter than 1/4, `|y| < 1` at every vertex) and every cycle is
/// shorter than `eps`, or until `max_triangles` would be exceeded.
pub fn decompose_cycle(alpha: &[R3Arc], spanning: &Triangulation, eps: f64, max_triangles: usize) -> R3Result<Decomposition> {
    if alpha.is_empty() {
        return Ok(Decomposition::empty());
    }
    if spanning.boundary.len() != alpha.len() || spanning.boundary.iter().zip(alpha).any(|(h, a)| *h != a.handle) {
        return Err(R3Error::Spanning("cone boundary differs from the cycle".into()));
    }
    for (i, arc) in alpha.iter().enumerate() {
        if arc.path.legendrian_residual() > 1e-9 {
            return Err(R3Error::InvalidPath(format!("arc {i} is not Legendrian")));
        }
        let next = &alpha[(i + 1) % alpha.len()];
        let (Some(e), Some(s)) = (arc.path.end(), next.path.start()) else {
            return Err(R3Error::InvalidPath(format!("arc {i} is empty")));
        };
        let gap = dist3(e, s);
        if gap > 1e-9 {
            return Err(R3Error::NotClosed(gap, i));
        }
    }
    let k = alpha.len();
    let apex = spanning.apex;
    let mut level = 0u32;
    loop {
        let n = 1usize << level;
        let triangles = k * (n + 2 * (n - 1) * n);
        if triangles > max_triangles {
            return Err(R3Error::RefinementFailed {
                level,
                triangles,
                detail: format!("would exceed the limit of {max_triangles} triangles"),
            });
        }
        match try_level(alpha, apex, n, eps) {
            Ok(lengths) => {
                let pieces_base = Handle::reserve((k * n) as u64);
                let interior = k * n * n + 2 * k * (n - 1) * n;
                let base = Handle::reserve(interior as u64);
                let pieces = alpha.iter().enumerate().map(|(i, a)| (a.handle, pieces_base.offset((i * n) as u64))).collect();
                return Ok(Decomposition { level, n, arcs: k, base, pieces, cycle_lengths: lengths });
            }
            Err(detail) if level >= 20 => {
                return Err(R3Error::RefinementFailed { level, triangles, detail });
            }
            Err(_) => level += 1,
        }
    }
}

/// Cycle lengths at refinement `n`, or why this level is not fine enough.
fn try_level(alpha: &[R3Arc], apex: [f64; 3], n: usize, eps: f64) -> Result<Vec<f64>, String> {
    let k = alpha.len();
    // Boundary vertices αᵢ(b/n), b = 0..=n.
    let rim: Vec<Vec<[f64; 3]>> = alpha.iter().map(|a| (0..=n).map(|b| a.at(b as f64 / n as f64)).collect()).collect();
    let vertex = |i: usize, a: usize, b: usize| -> [f64; 3] {
        if a == 0 {
            return apex;
        }
        let u = a as f64 / n as f64;
        let q = rim[i][b];
        [(1.0 - u) * apex[0] + u * q[0], (1.0 - u) * apex[1] + u * q[1], (1.0 - u) * apex[2] + u * q[2]]
    };
    for i in 0..k {
        for a in 0..=n {
            for b in 0..=n {
                let y = vertex(i, a, b)[1];
                if y.abs() >= 1.0 {
                    return Err(format!("vertex with |y| = {y:.3}"));
                }
            }
        }
    }
    let connector = |p: [f64; 3], q: [f64; 3]| -> Result<f64, String> {
        let d = dist3(p, q);
        if d >= 0.25 {
            return Err(format!("edge of length {d:.4} ≥ 1/4"));
        }
        Ok(ConnectorSpec::new(p, q).length())
    };
    let piece: Vec<Vec<f64>> = alpha
        .iter()
        .map(|arc| (0..n).map(|b| arc.length_fraction(b as f64 / n as f64, (b + 1) as f64 / n as f64)).collect())
        .collect();
    let mut lengths = Vec::with_capacity(k * (n + 2 * (n - 1) * n));
    for i in 0..k {
        // Radial edge lengths at this cone triangle, b = 0..=n (b = n is shared).
        let radial = |a: usize, b: usize| connector(vertex(i, a, b), vertex(i, a + 1, b));
        let along = |a: usize, b: usize| -> Result<f64, String> {
            if a == n {
                Ok(piece[i][b])
            } else {
                connector(vertex(i, a, b), vertex(i, a, b + 1))
            }
        };
        let diag = |a: usize, b: usize| connector(vertex(i, a, b), vertex(i, a + 1, b + 1));
        let mut rad_row: Vec<f64> = (0..=n).map(|b| radial(0, b)).collect::<Result<_, _>>()?;
        for b in 0..n {
            lengths.push(rad_row[b] + along(1, b)? + rad_row[b + 1]);
        }
        for a in 1..n {
            rad_row = (0..=n).map(|b| radial(a, b)).collect::<Result<_, _>>()?;
            let along_lo: Vec<f64> = (0..n).map(|b| along(a, b)).collect::<Result<_, _>>()?;
            let along_hi: Vec<f64> = (0..n).map(|b| along(a + 1, b)).collect::<Result<_, _>>()?;
            for b in 0..n {
                let d = diag(a, b)?;
                lengths.push(rad_row[b] + along_hi[b] + d);
                lengths.push(d + rad_row[b + 1] + along_lo[b]);
            }
        }
    }
    let worst = lengths.iter().copied().fold(0.0, f64::max);
    if worst >= eps {
        return Err(format!("longest cycle {worst:.4} ≥ ε = {eps}"));
    }
    Ok(lengths)
}

/// Oriented, Legendrian figure-eight over two unit squares: the first square
/// `[0,1]×[−½,½]` counterclockwise, then `[1,2]×[−½,½]` clockwise, both
/// starting at `(1, −½)`. The two loops enclose opposite areas, so the lift
/// closes. Returns the eight lifted sides.
pub fn figure_eight(samples_per_side: usize) -> Vec<R3Arc> {
    let corners = [
        [1.0, -0.5],
        [1.0, 0.5],
        [0.0, 0.5],
        [0.0, -0.5],
        [1.0, -0.5],
        [1.0, 0.5],
        [2.0, 0.5],
        [2.0, -0.5],
        [1.0, -0.5],
    ];
    let mut z = 0.0;
    let mut out = Vec::with_capacity(8);
    for w in corners.windows(2) {
        let lifted = lift_planar(&PlanarPath::segment(w[0], w[1], samples_per_side), z);
        z = lifted.end().expect("non-empty")[2];
        out.push(R3Arc::new(lifted));
    }
    out
}

/// One branch of `{(x + iz)(y + iz) = c}`, sampled over `u = (x − y)/2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchCurve {
    pub c: C64,
    /// `+1` where `x + y > 0`, `−1` where `x + y < 0`.
    pub sign: i8,
    /// `(u, v, z)` with `x = v + u`, `y = v − u`.
    pub samples: Vec<[f64; 3]>,
}

impl BranchCurve {
    pub fn points(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.samples.iter().map(|&[u, v, z]| [v + u, v - u, z])
    }

    /// `max |(x + iz)(y + iz) − c|`.
    pub fn residual(&self) -> f64 {
        self.points()
            .map(|[x, y, z]| (C64::new(x, z) * C64::new(y, z) - self.c).norm())
            .fold(0.0, f64::max)
    }

    /// Largest distance from a sample to `S₀^±`, the two rays of
    /// `{z = 0, xy = 0}` with `±(x + y) ≥ 0`.
    pub fn distance_to_limit(&self) -> f64 {
        let s = self.sign as f64;
        self.points()
            .map(|[x, y, z]| {
                let to_ray = |along: f64, across: f64| {
                    let t = (s * along).max(0.0);
                    ((along - s * t).powi(2) + across * across + z * z).sqrt()
                };
                to_ray(x, y).min(to_ray(y, x))
            })
            .fold(0.0, f64::max)
    }
}

/// Positive root of `W² − pW − q = 0` with `q ≥ 0`, without cancellation.
fn positive_root(p: f64, q: f64) -> f64 {
    let d = (p * p + 4.0 * q).sqrt();
    if p >= 0.0 {
        0.5 * (p + d)
    } else {
        2.0 * q / (d - p)
    }
}

/// The two branches of `{(x + iz)(y + iz) = c}` over `n` uniform samples of
/// `u ∈ [u0, u1]`. Writing `x = v + u`, `y = v − u`, `c = a + ib`, the
/// equation becomes `v⁴ − (u² + a)v² − (b/2)² = 0`, which has one positive and
/// one negative root `v`; then `z = b/(2v)`.
pub fn solve_branches(c: C64, u_range: (f64, f64), n: usize) -> R3Result<(BranchCurve, BranchCurve)> {
    if c.im == 0.0 && c.re <= 0.0 {
        return Err(R3Error::SingularLevel(c));
    }
    let n = n.max(2);
    let (a, b) = (c.re, c.im);
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for i in 0..n {
        let u = u_range.0 + (u_range.1 - u_range.0) * i as f64 / (n - 1) as f64;
        let w = positive_root(u * u + a, 0.25 * b * b);
        let v = w.sqrt();
        let z = if b == 0.0 { 0.0 } else { b / (2.0 * v) };
        plus.push([u, v, z]);
        minus.push([u, -v, -z]);
    }
    Ok((BranchCurve { c, sign: 1, samples: plus }, BranchCurve { c, sign: -1, samples: minus }))
}
