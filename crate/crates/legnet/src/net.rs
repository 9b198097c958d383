//! Legendrian nets hanged on the circle `Γ = {w = 0} ∩ S³`.
//!
//! The sphere `P¹` is cut into rings `A_k = Δ_k \ Δ_{k−1}` about `p₀`, where
//! `Δ_k` is the metric disk of radius `r_k = kπ/(2m)`. Ring `k` carries `n_k`
//! congruent sectors `β⁺_{k,j}`, rotated into each other by
//! `R(ζ) = e^{2πi/n_k}ζ`; consecutive sectors overlap in `β⁻_{k,j}`. The
//! boundary of each sector (minus a short outer arc) is lifted horizontally,
//! ring by ring from the outside in, and the lifted arcs are assembled into
//! short Legendrian cycles whose sum is `Γ`.
//!
//! Arc identities live in [`HandleLayout`]; every chain identity is checked on
//! handles, so it is exact. Geometry is checked on samples: closure of lifts,
//! the contact condition, rotation equivariance and cell lengths.
//!
//! Indices follow the usual convention: `j` is taken mod `n_k`, arc
//! `α⁺_{k,j}` runs from `p_{k,j}` to `p_{k,j−1}` and is split at `q_{k,j}`
//! into the halves `h0` (first) and `h1` (second).

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds;
use crate::chain::{Chain1, Handle, Region};
use crate::config::{Sampling, Tolerances};
use crate::par::{self, Exec};
use crate::s3::{Curve, Latitude, Meridian};
use crate::s3::lift_pieces;
use crate::s3::{eta_at, eta_integral, path_length, ProjPoint, Sample, SampledPath, Space, C2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    EpsilonOutOfRange(f64),
    #[error("ring {k}: lift of arc {j} misses its endpoint by {residual:e}")]
    Closure { k: usize, j: u64, residual: f64 },
    #[error("ring {k}: sectors do not overlap")]
    EmptyOverlap { k: usize },
    #[error("ring {k}: {detail}")]
    Ring { k: usize, detail: String },
    #[error("invalid sweep: {0}")]
    Sweep(String),
}

/// Ladder quantities of one ring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingParams {
    pub k: usize,
    /// `r_{k−1}`.
    pub r_in: f64,
    /// `r_k`.
    pub r_out: f64,
    /// `s_k = area(Δ_k)`.
    pub s: f64,
    /// `s_{k−1}`.
    pub s_prev: f64,
    /// `a_k = area(A_k)`.
    pub a: f64,
    /// `ℓ_k`, mean length of the two boundary circles.
    pub ell: f64,
    pub nu: u32,
    pub n: u64,
    pub ell_plus: f64,
    pub ell_minus: f64,
    /// Azimuthal width of `β⁺_{k,j}`.
    pub width: f64,
    /// Azimuthal width of `β⁻_{k,j}`.
    pub width_minus: f64,
    pub theta: f64,
    /// `n_{k+1}/n_k`; 1 for the last ring.
    pub mu: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetParams {
    pub epsilon: f64,
    pub m: usize,
    pub rings: Vec<RingParams>,
}

/// Smallest `ν ≥ 0` with `2^ν ≥ x`.
fn ceil_log2(x: f64) -> u32 {
    let mut nu = if x > 1.0 { x.log2().ceil() as u32 } else { 0 };
    while (nu as f64).exp2() < x {
        nu += 1;
    }
    while nu > 0 && ((nu - 1) as f64).exp2() >= x {
        nu -= 1;
    }
    nu
}

/// The ring ladder for `ε`.
pub fn compute_params(epsilon: f64) -> Result<NetParams, NetError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(NetError::EpsilonOutOfRange(epsilon));
    }
    let m = (10.0 * PI / epsilon).floor() as usize + 1;
    let h = PI / (2 * m) as f64;
    let mut rings = Vec::with_capacity(m);
    for k in 1..=m {
        let r_out = k as f64 * h;
        let r_in = (k - 1) as f64 * h;
        let s = PI * r_out.sin().powi(2);
        let s_prev = PI * r_in.sin().powi(2);
        let a = PI * (r_out + r_in).sin() * (r_out - r_in).sin();
        let ell = FRAC_PI_2 * ((2.0 * r_out).sin() + (2.0 * r_in).sin());
        let nu = ceil_log2(20.0 * s * ell / (epsilon * a));
        let n = 1u64 << nu;
        let nf = n as f64;
        rings.push(RingParams {
            k,
            r_in,
            r_out,
            s,
            s_prev,
            a,
            ell,
            nu,
            n,
            ell_plus: s * ell / (nf * a),
            ell_minus: s_prev * ell / (nf * a),
            width: TAU * s / (nf * a),
            width_minus: TAU * s_prev / (nf * a),
            theta: 0.0,
            mu: 1,
        });
    }
    for k in (1..m).rev() {
        let (lo, hi) = rings.split_at_mut(k);
        let (cur, next) = (&mut lo[k - 1], &hi[0]);
        if next.n % cur.n != 0 {
            return Err(NetError::Ring { k, detail: format!("n_{} = {} is not a multiple of n_k = {}", k + 1, next.n, cur.n) });
        }
        cur.mu = next.n / cur.n;
        // p_{k,0} = q_{k+1,0}: θ_k + π/n_k = θ_{k+1}.
        cur.theta = next.theta - PI / cur.n as f64;
    }
    Ok(NetParams { epsilon, m, rings })
}

impl NetParams {
    /// Ring `k`, `1 ≤ k ≤ m`.
    pub fn ring(&self, k: usize) -> &RingParams {
        &self.rings[k - 1]
    }

    /// `Card A_ε = Σ n_k`.
    pub fn card(&self) -> u64 {
        self.rings.iter().map(|r| r.n).sum()
    }

    pub fn n_m(&self) -> u64 {
        self.ring(self.m).n
    }

    /// Central azimuth `θ_k + 2πj/n_k` of `β⁺_{k,j}`.
    pub fn center(&self, k: usize, j: u64) -> f64 {
        let r = self.ring(k);
        r.theta + TAU * (j % r.n) as f64 / r.n as f64
    }

    pub fn beta_plus(&self, k: usize, j: u64) -> Region {
        let r = self.ring(k);
        Region::sector(r.r_in, r.r_out, self.center(k, j) - 0.5 * r.width, r.width)
    }

    /// `β⁺_{k,j} ∩ β⁺_{k,j+1}`.
    pub fn beta_minus(&self, k: usize, j: u64) -> Region {
        let r = self.ring(k);
        let mid = self.center(k, j) + PI / r.n as f64;
        Region::sector(r.r_in, r.r_out, mid - 0.5 * r.width_minus, r.width_minus)
    }

    /// `p_{k,j}`: midpoint of `∂Δ_k ∩ β⁻_{k,j}`.
    pub fn p_point(&self, k: usize, j: u64) -> ProjPoint {
        let r = self.ring(k);
        ProjPoint::from_polar(r.r_out, self.center(k, j) + PI / r.n as f64)
    }

    /// `q_{k,j}`: midpoint of `∂Δ_{k−1} ∩ β⁺_{k,j}`.
    pub fn q_point(&self, k: usize, j: u64) -> ProjPoint {
        ProjPoint::from_polar(self.ring(k).r_in, self.center(k, j))
    }

    /// The two halves of the planar arc `α⁺_{k,j}`, zero-length pieces dropped.
    pub fn half_arcs(&self, k: usize, j: u64) -> [Vec<PlanarPiece>; 2] {
        let r = self.ring(k);
        let c = self.center(k, j);
        let half = 0.5 * r.width;
        let step = PI / r.n as f64;
        let keep = |v: Vec<PlanarPiece>| v.into_iter().filter(|p| p.length() > 1e-14).collect::<Vec<_>>();
        let h0 = vec![
            PlanarPiece::Lat(Latitude { r: r.r_out, az0: c + step, az1: c + half }),
            PlanarPiece::Mer(Meridian { az: c + half, r0: r.r_out, r1: r.r_in }),
            PlanarPiece::Lat(Latitude { r: r.r_in, az0: c + half, az1: c }),
        ];
        let h1 = vec![
            PlanarPiece::Lat(Latitude { r: r.r_in, az0: c, az1: c - half }),
            PlanarPiece::Mer(Meridian { az: c - half, r0: r.r_in, r1: r.r_out }),
            PlanarPiece::Lat(Latitude { r: r.r_out, az0: c - half, az1: c - step }),
        ];
        [keep(h0), keep(h1)]
    }

    /// Failures of the ladder invariants: the `ℓ⁺` interval, growth of `ν`,
    /// the sector area identities and the closed forms of `s_k`, `a_k`, `ℓ_k`.
    pub fn check(&self) -> Vec<String> {
        let mut out = Vec::new();
        let eps = self.epsilon;
        let m = self.m as f64;
        if self.m != (10.0 * PI / eps).floor() as usize + 1 {
            out.push(format!("m = {} does not match ε = {eps}", self.m));
        }
        let rel = |x: f64, y: f64| if y == 0.0 { x.abs() } else { ((x - y) / y).abs() };
        for (idx, r) in self.rings.iter().enumerate() {
            let k = r.k;
            let kf = k as f64;
            if !(eps / 40.0 < r.ell_plus && r.ell_plus <= eps / 20.0) {
                out.push(format!("ring {k}: ℓ⁺ = {} outside (ε/40, ε/20]", r.ell_plus));
            }
            if r.n != 1u64 << r.nu {
                out.push(format!("ring {k}: n ≠ 2^ν"));
            }
            if let Some(next) = self.rings.get(idx + 1) {
                if !(r.nu <= next.nu && next.nu <= r.nu + 2) {
                    out.push(format!("ring {k}: ν jumps from {} to {}", r.nu, next.nu));
                }
                if ![1, 2, 4].contains(&r.mu) || r.mu * r.n != next.n {
                    out.push(format!("ring {k}: μ = {}", r.mu));
                }
            }
            let s_closed = FRAC_PI_2 * (1.0 - (kf * PI / m).cos());
            let s_prev_closed = FRAC_PI_2 * (1.0 - ((kf - 1.0) * PI / m).cos());
            let ell_closed = FRAC_PI_2 * ((kf * PI / m).sin() + ((kf - 1.0) * PI / m).sin());
            for (name, got, want) in [
                ("s", r.s, s_closed),
                ("a", r.a, s_closed - s_prev_closed),
                ("ℓ", r.ell, ell_closed),
            ] {
                if (got - want).abs() > 1e-12 {
                    out.push(format!("ring {k}: {name} = {got} differs from the closed form {want}"));
                }
            }
            let plus = self.beta_plus(k, 0).area();
            if rel(plus, r.s / r.n as f64) > 1e-12 {
                out.push(format!("ring {k}: area β⁺ = {plus}, expected s_k/n_k = {}", r.s / r.n as f64));
            }
            let minus = self.beta_minus(k, 0).area();
            let want = r.s_prev / r.n as f64;
            let err = if want == 0.0 { minus.abs() / (r.s / r.n as f64) } else { rel(minus, want) };
            if err > 1e-12 {
                out.push(format!("ring {k}: area β⁻ = {minus}, expected s_(k−1)/n_k = {want}"));
            }
        }
        out
    }
}

/// One smooth piece of a planar arc: a latitude or a meridian about `p₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanarPiece {
    Lat(Latitude),
    Mer(Meridian),
}

impl PlanarPiece {
    pub fn length(&self) -> f64 {
        match self {
            PlanarPiece::Lat(l) => l.length(),
            PlanarPiece::Mer(m) => m.length(),
        }
    }

    pub fn is_meridian(&self) -> bool {
        matches!(self, PlanarPiece::Mer(_))
    }
}

impl Curve for PlanarPiece {
    fn point(&self, t: f64) -> C2 {
        match self {
            PlanarPiece::Lat(l) => l.point(t),
            PlanarPiece::Mer(m) => m.point(t),
        }
    }
    fn velocity(&self, t: f64) -> C2 {
        match self {
            PlanarPiece::Lat(l) => l.velocity(t),
            PlanarPiece::Mer(m) => m.velocity(t),
        }
    }
    fn phase(&self, t0: f64, t1: f64) -> Option<f64> {
        match self {
            PlanarPiece::Lat(l) => l.phase(t0, t1),
            PlanarPiece::Mer(m) => m.phase(t0, t1),
        }
    }
}

/// Regions and midpoints of the construction.
#[derive(Clone, Debug, Serialize)]
pub struct RingRegions {
    pub k: usize,
    pub beta_plus: Region,
    pub beta_minus: Region,
    pub p: ProjPoint,
    pub q: ProjPoint,
}

/// `β^±_{k,0}` and `p_{k,0}`, `q_{k,0}` for every ring; other `j` follow by
/// rotation ([`NetParams::beta_plus`] etc.). The overlap is recomputed as the
/// intersection of two neighbouring sectors and checked against the ladder.
pub fn build_regions(params: &NetParams) -> Result<Vec<RingRegions>, NetError> {
    let mut out = Vec::with_capacity(params.m);
    for r in &params.rings {
        let k = r.k;
        let lo = params.center(k, 1) - 0.5 * r.width;
        let hi = params.center(k, 0) + 0.5 * r.width;
        let overlap = hi - lo;
        if overlap < -1e-12 {
            return Err(NetError::EmptyOverlap { k });
        }
        if (overlap - r.width_minus).abs() > 1e-12 * TAU {
            return Err(NetError::Ring { k, detail: format!("overlap width {overlap} ≠ {}", r.width_minus) });
        }
        out.push(RingRegions {
            k,
            beta_plus: params.beta_plus(k, 0),
            beta_minus: params.beta_minus(k, 0),
            p: params.p_point(k, 0),
            q: params.q_point(k, 0),
        });
    }
    Ok(out)
}

/// Handle blocks: `h0(k, ·)`, `h1(k, ·)` for each ring, then the arcs of `Γ`.
#[derive(Clone, Debug)]
pub struct HandleLayout {
    base: Handle,
    offsets: Vec<u64>,
    n: Vec<u64>,
    mu: Vec<u64>,
    gamma: u64,
    total: u64,
}

/// Endpoint identities of the lifted arcs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NetPoint {
    /// `p̃_{m,j}` on `Γ`.
    P(u64),
    /// `q̃_{k,j}`; all `q̃_{1,j}` coincide and are reported as `Q(1, 0)`.
    Q(usize, u64),
}

impl HandleLayout {
    pub fn new(params: &NetParams) -> Self {
        let mut offsets = Vec::with_capacity(params.m);
        let mut total = 0;
        for r in &params.rings {
            offsets.push(total);
            total += 2 * r.n;
        }
        let gamma = total;
        total += params.n_m();
        HandleLayout {
            base: Handle::reserve(total),
            offsets,
            n: params.rings.iter().map(|r| r.n).collect(),
            mu: params.rings.iter().map(|r| r.mu).collect(),
            gamma,
            total,
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn m(&self) -> usize {
        self.n.len()
    }

    fn wrap(&self, k: usize, j: i64) -> u64 {
        j.rem_euclid(self.n[k - 1] as i64) as u64
    }

    fn idx_h0(&self, k: usize, j: i64) -> u64 {
        self.offsets[k - 1] + self.wrap(k, j)
    }

    fn idx_h1(&self, k: usize, j: i64) -> u64 {
        self.offsets[k - 1] + self.n[k - 1] + self.wrap(k, j)
    }

    fn idx_gamma(&self, j: i64) -> u64 {
        self.gamma + self.wrap(self.m(), j)
    }

    pub fn h0(&self, k: usize, j: i64) -> Handle {
        self.base.offset(self.idx_h0(k, j))
    }

    pub fn h1(&self, k: usize, j: i64) -> Handle {
        self.base.offset(self.idx_h1(k, j))
    }

    /// The arc of `Γ` from `p̃_{m,j−1}` to `p̃_{m,j}`.
    pub fn gamma(&self, j: i64) -> Handle {
        self.base.offset(self.idx_gamma(j))
    }

    pub fn handle(&self, index: u64) -> Handle {
        self.base.offset(index)
    }

    /// `h1(k, j)` after the merge at the innermost ring, where the second half
    /// of `α⁺_{1,j}` is the first half of `α⁺_{1,j−1}` traversed backwards.
    fn h1_merged(&self, k: usize, j: i64) -> (u64, i32) {
        if k == 1 {
            (self.idx_h0(1, j - 1), -1)
        } else {
            (self.idx_h1(k, j), 1)
        }
    }

    /// Legendrian and transverse terms of the cell `α̃_{k,j}`, as
    /// `(handle index, multiplicity)`.
    fn cell_terms(&self, k: usize, j: u64, leg: &mut Vec<(u64, i32)>, pt: &mut Vec<(u64, i32)>) {
        leg.clear();
        pt.clear();
        let j = j as i64;
        leg.push((self.idx_h0(k, j), 1));
        leg.push(self.h1_merged(k, j));
        if k == self.m() {
            pt.push((self.idx_gamma(j), 1));
            return;
        }
        let mu = self.mu[k - 1] as i64;
        for i in mu * (j - 1)..mu * j {
            // α̃⁻_{k+1,i} = h1(k+1, i+1) + h0(k+1, i).
            let (h, s) = self.h1_merged(k + 1, i + 1);
            leg.push((h, -s));
            leg.push((self.idx_h0(k + 1, i), -1));
        }
    }

    /// `p̃_{k,j}` as an endpoint identity.
    fn p_id(&self, k: usize, j: i64) -> NetPoint {
        if k == self.m() {
            NetPoint::P(self.wrap(k, j))
        } else {
            self.q_id(k + 1, j * self.mu[k - 1] as i64)
        }
    }

    fn q_id(&self, k: usize, j: i64) -> NetPoint {
        if k == 1 {
            NetPoint::Q(1, 0)
        } else {
            NetPoint::Q(k, self.wrap(k, j))
        }
    }

    /// Ring, half and index of a handle index; `(0, 2, j)` for `Γ`.
    fn locate(&self, index: u64) -> (usize, u8, i64) {
        if index >= self.gamma {
            return (0, 2, (index - self.gamma) as i64);
        }
        let k = self.offsets.partition_point(|&o| o <= index);
        let local = index - self.offsets[k - 1];
        let n = self.n[k - 1];
        if local < n {
            (k, 0, local as i64)
        } else {
            (k, 1, (local - n) as i64)
        }
    }

    /// Tail and head of the arc with the given handle index.
    pub fn endpoints(&self, index: u64) -> (NetPoint, NetPoint) {
        match self.locate(index) {
            (_, 2, j) => (NetPoint::P(self.wrap(self.m(), j - 1)), NetPoint::P(self.wrap(self.m(), j))),
            (k, 0, j) => (self.p_id(k, j), self.q_id(k, j)),
            (k, _, j) => (self.q_id(k, j), self.p_id(k, j - 1)),
        }
    }
}

/// One cycle of the net.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetCell {
    pub k: usize,
    pub j: u64,
    pub legendrian_part: Chain1,
    pub transverse_part: Chain1,
}

impl NetCell {
    pub fn combined(&self) -> Chain1 {
        &self.legendrian_part + &self.transverse_part
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Lift every arc.
    Full,
    /// Lift a few representatives per ring and rely on rotation equivariance.
    Sampled,
}

impl Mode {
    pub fn default_for(epsilon: f64) -> Mode {
        if epsilon >= 0.2 {
            Mode::Full
        } else {
            Mode::Sampled
        }
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full" => Ok(Mode::Full),
            "sampled" => Ok(Mode::Sampled),
            _ => Err(format!("unknown mode `{s}` (expected full or sampled)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::Sampled => "sampled",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NetOptions {
    pub mode: Mode,
    pub tolerances: Tolerances,
    pub sampling: Sampling,
    pub exec: Exec,
}

impl NetOptions {
    pub fn new(mode: Mode) -> Self {
        NetOptions { mode, tolerances: Tolerances::default(), sampling: Sampling::default(), exec: Exec::default() }
    }
}

/// Lifted halves of `α̃⁺_{k,j}` kept with their samples.
#[derive(Clone, Debug)]
pub struct RepArc {
    pub j: u64,
    pub h0: SampledPath,
    pub h1: SampledPath,
}

/// Measured quantities of one ring (maxima over the lifted arcs).
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RingStats {
    pub k: usize,
    pub n: u64,
    pub lifted: u64,
    pub closure: f64,
    pub eta: f64,
    pub projection: f64,
    pub rotation: f64,
    /// `|len_S³ − len_P¹|` of the lifted halves.
    pub length_defect: f64,
    pub alpha_plus_length: f64,
    pub alpha_minus_length: f64,
    pub cell_length: f64,
    /// `∫ η` over `γ̃_{k,j}` (representative).
    pub gamma_eta: f64,
    /// Largest deviation of `∫_{γ̃_{k,j}} η` from `2s_k/n_k`.
    pub gamma_eta_error: f64,
    /// Distance between the two coinciding halves at the innermost ring.
    pub merge: f64,
}

#[derive(Clone, Debug)]
pub struct RingLift {
    pub k: usize,
    /// `p̃_{k,0}`.
    pub p0: C2,
    /// `q̃_{k,0}`.
    pub q0: C2,
    pub reps: Vec<RepArc>,
    pub stats: RingStats,
}

/// A lifted net with its measured geometry.
#[derive(Clone, Debug)]
pub struct LegendrianNet {
    pub params: NetParams,
    pub options: NetOptions,
    pub layout: HandleLayout,
    /// Index `k − 1`.
    pub rings: Vec<RingLift>,
    /// The arc `γ̃_{m,0}` of `Γ` from `p̃_{m,−1}` to `p̃_{m,0}`.
    pub gamma_rep: SampledPath,
    /// Smallest `η` sampled along `Γ`.
    pub gamma_eta_min: f64,
}

impl LegendrianNet {
    pub fn card(&self) -> u64 {
        self.params.card()
    }

    pub fn cell(&self, k: usize, j: u64) -> NetCell {
        let (mut leg, mut pt) = (Vec::new(), Vec::new());
        self.layout.cell_terms(k, j, &mut leg, &mut pt);
        let to_chain = |v: &[(u64, i32)]| Chain1::from_terms(v.iter().map(|&(i, m)| (self.layout.handle(i), m as i64)));
        NetCell { k, j, legendrian_part: to_chain(&leg), transverse_part: to_chain(&pt) }
    }

    /// All cells, ring by ring from the outside.
    pub fn cells(&self) -> impl Iterator<Item = NetCell> + '_ {
        (1..=self.params.m).rev().flat_map(move |k| (0..self.params.ring(k).n).map(move |j| self.cell(k, j)))
    }

    /// The target cycle `Γ` as a chain.
    pub fn gamma_chain(&self) -> Chain1 {
        Chain1::from_terms((0..self.params.n_m() as i64).map(|j| (self.layout.gamma(j), 1)))
    }
}

/// `(z, w) ↦ (e^{iθ}z, w)`.
#[inline]
fn rot(p: &C2, theta: f64) -> C2 {
    C2::new(p.z * C64::from_polar(1.0, theta), p.w)
}

fn rot_path(path: &SampledPath, theta: f64) -> SampledPath {
    path.map_linear(|p| rot(p, theta))
}

fn max_sample_distance(a: &SampledPath, b: &SampledPath) -> f64 {
    if a.sample_count() != b.sample_count() {
        return f64::INFINITY;
    }
    a.samples().zip(b.samples()).map(|(x, y)| x.p.distance(&y.p)).fold(0.0, f64::max)
}

struct HalfLift {
    path: SampledPath,
    end: C2,
    s3_length: f64,
    p1_length: f64,
    eta: f64,
    projection: f64,
}

fn lift_half(pieces: &[PlanarPiece], start: C2, sampling: &Sampling, tol: &Tolerances) -> HalfLift {
    let p1_length: f64 = pieces.iter().map(|p| p.length()).sum();
    let total = sampling.points_for(p1_length) as f64;
    let counts: Vec<usize> = pieces.iter().map(|p| ((total * p.length() / p1_length).ceil() as usize).max(4)).collect();
    let dyn_pieces: Vec<&dyn Curve> = pieces.iter().map(|p| p as &dyn Curve).collect();
    let lifted = lift_pieces(&dyn_pieces, &counts, start, tol.quadrature * 1e-6);
    let mut eta: f64 = 0.0;
    let mut projection: f64 = 0.0;
    let mut out = Vec::with_capacity(lifted.len());
    for (i, (piece, curve)) in lifted.into_iter().zip(pieces).enumerate() {
        let shift = i as f64;
        out.push(
            piece
                .samples
                .into_iter()
                .map(|s| {
                    eta = eta.max(eta_at(&s.p, &s.v).abs());
                    projection = projection.max(s.p.wedge(&curve.point(s.t)).norm());
                    Sample { t: s.t + shift, ..s }
                })
                .collect::<Vec<_>>(),
        );
    }
    let path = SampledPath::from_pieces(Space::S3, out).expect("shifted pieces are contiguous");
    let end = path.end().expect("non-empty lift");
    let s3_length = path_length(&path);
    HalfLift { path, end, s3_length, p1_length, eta, projection }
}

struct ArcResult {
    j: u64,
    q: C2,
    end: C2,
    len0: f64,
    len1: f64,
    eta: f64,
    projection: f64,
    length_defect: f64,
    paths: Option<(SampledPath, SampledPath)>,
}

fn lift_arc(params: &NetParams, k: usize, j: u64, start: C2, keep: bool, opts: &NetOptions) -> ArcResult {
    let [p0, p1] = params.half_arcs(k, j);
    let a = lift_half(&p0, start, &opts.sampling, &opts.tolerances);
    let b = lift_half(&p1, a.end, &opts.sampling, &opts.tolerances);
    ArcResult {
        j,
        q: a.end,
        end: b.end,
        len0: a.s3_length,
        len1: b.s3_length,
        eta: a.eta.max(b.eta),
        projection: a.projection.max(b.projection),
        length_defect: (a.s3_length - a.p1_length).abs().max((b.s3_length - b.p1_length).abs()),
        paths: keep.then_some((a.path, b.path)),
    }
}

/// The latitude arc over `∂Δ_{k−1}` from `q̃_{k,i}` to `q̃_{k,i+1}`, with the
/// extra fiber phase interpolated linearly so both endpoints are hit exactly.
/// Returns the path and `Δλ`, the phase it picks up beyond the horizontal lift.
#[derive(Clone, Copy, Debug)]
struct PhasedLatitude {
    lat: Latitude,
    lambda0: f64,
    dlambda: f64,
}

impl PhasedLatitude {
    fn between(lat: Latitude, from: &C2, to: &C2) -> Self {
        let s0 = lat.point(0.0);
        let s1 = lat.point(1.0);
        let lambda0 = s0.inner(from).arg();
        let lambda1 = s1.inner(to).arg();
        PhasedLatitude { lat, lambda0, dlambda: crate::s3::principal_angle(lambda1 - lambda0) }
    }

    /// Closed form of `∫ η`: `Δλ + sin²r·Δφ`.
    fn eta_integral(&self) -> f64 {
        self.dlambda + self.lat.r.sin().powi(2) * (self.lat.az1 - self.lat.az0)
    }
}

impl Curve for PhasedLatitude {
    fn point(&self, t: f64) -> C2 {
        self.lat.point(t).scale(C64::from_polar(1.0, self.lambda0 + self.dlambda * t))
    }
    fn velocity(&self, t: f64) -> C2 {
        let e = C64::from_polar(1.0, self.lambda0 + self.dlambda * t);
        (self.lat.velocity(t) + self.lat.point(t).times_i() * self.dlambda).scale(e)
    }
}

/// The arc of `Γ` from `(e^{iφ₀}, 0)` turning by `dphi`.
fn gamma_arc(phi0: f64, dphi: f64, n: usize) -> SampledPath {
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            let e = C64::from_polar(1.0, phi0 + dphi * t);
            Sample { t, p: C2::new(e, C64::new(0.0, 0.0)), v: C2::new(e * C64::new(0.0, dphi), C64::new(0.0, 0.0)) }
        })
        .collect();
    SampledPath::single(Space::S3, samples).expect("uniform parameters")
}

fn representatives(n: u64) -> Vec<u64> {
    if n <= 8 {
        return (0..n).collect();
    }
    vec![0, 1, n - 1]
}

/// Lifts the net ring by ring, from `Γ` inwards.
pub fn lift_net(params: &NetParams, options: &NetOptions) -> Result<LegendrianNet, NetError> {
    let m = params.m;
    let layout = HandleLayout::new(params);
    let n_m = params.n_m();
    let tol = options.tolerances;
    let full = options.mode == Mode::Full;

    // Γ and the seeds p̃_{m,j} = (e^{2πij/n_m}, 0).
    let seed = |j: u64| C2::new(C64::from_polar(1.0, TAU * j as f64 / n_m as f64), C64::new(0.0, 0.0));
    let gamma_n = options.sampling.points_for(TAU / n_m as f64);
    let gamma_rep = gamma_arc(-TAU / n_m as f64, TAU / n_m as f64, gamma_n);
    let gamma_eta_min = gamma_rep.samples().map(|s| eta_at(&s.p, &s.v)).fold(f64::INFINITY, f64::min);
    let gamma_eta = eta_integral(&gamma_rep).expect("path on S³");

    let mut anchors: Vec<C2> = if full { (0..n_m).map(seed).collect() } else { vec![seed(0)] };
    let mut rings: Vec<Option<RingLift>> = vec![None; m];
    let mut prev_lengths: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut gamma_eta_next = (gamma_eta, (gamma_eta - 2.0 * PI / n_m as f64).abs());

    for k in (1..=m).rev() {
        let rp = params.ring(k);
        let n = rp.n;
        let turn = TAU / n as f64;
        let reps = representatives(n);
        let anchor = |j: u64| if full { anchors[j as usize] } else { rot(&anchors[0], turn * j as f64) };
        let indices: Vec<u64> = if full { (0..n).collect() } else { reps.clone() };
        let keep = |j: u64| reps.contains(&j);
        let results: Vec<ArcResult> = par::map_slice(options.exec, &indices, |&j| lift_arc(params, k, j, anchor(j), keep(j), options));

        let mut stats = RingStats { k, n, lifted: results.len() as u64, ..RingStats::default() };
        (stats.gamma_eta, stats.gamma_eta_error) = gamma_eta_next;
        for r in &results {
            let target = anchor((r.j + n - 1) % n);
            let residual = r.end.distance(&target);
            if !(residual <= tol.closure) {
                return Err(NetError::Closure { k, j: r.j, residual });
            }
            stats.closure = stats.closure.max(residual);
            stats.eta = stats.eta.max(r.eta);
            stats.projection = stats.projection.max(r.projection);
            stats.length_defect = stats.length_defect.max(r.length_defect);
            stats.alpha_plus_length = stats.alpha_plus_length.max(r.len0 + r.len1);
        }
        let by_j = |j: u64| -> &ArcResult {
            if full {
                &results[j as usize]
            } else {
                results.iter().find(|r| r.j == j).expect("representative lifted")
            }
        };
        let p0 = anchor(0);
        let q0 = by_j(0).q;

        // Rotation equivariance: lifted representatives against rotated copies of j = 0.
        let mut rep_arcs = Vec::new();
        for r in &results {
            if let Some((a, b)) = &r.paths {
                rep_arcs.push(RepArc { j: r.j, h0: a.clone(), h1: b.clone() });
            }
        }
        let zero = rep_arcs.iter().find(|r| r.j == 0).cloned().expect("j = 0 kept");
        for r in &rep_arcs {
            let th = turn * r.j as f64;
            let d = max_sample_distance(&r.h0, &rot_path(&zero.h0, th)).max(max_sample_distance(&r.h1, &rot_path(&zero.h1, th)));
            stats.rotation = stats.rotation.max(d);
        }
        if full {
            for r in &results {
                let th = turn * r.j as f64;
                let d = anchor(r.j).distance(&rot(&p0, th)).max(r.q.distance(&rot(&q0, th)));
                stats.rotation = stats.rotation.max(d);
            }
        }

        // Innermost ring: h1(1, j+1) retraces h0(1, j).
        if k == 1 {
            for r in &rep_arcs {
                let next = rep_arcs.iter().find(|x| x.j == (r.j + 1) % n);
                let d = next.map(|x| max_sample_distance(&x.h1.reversed_samples(), &r.h0)).unwrap_or(f64::INFINITY);
                stats.merge = stats.merge.max(d);
            }
        }

        // Lengths per j (all equal in sampled mode), merged at k = 1.
        let (len0, len1): (Vec<f64>, Vec<f64>) = if full {
            (results.iter().map(|r| r.len0).collect(), results.iter().map(|r| r.len1).collect())
        } else {
            (vec![by_j(0).len0], vec![by_j(0).len1])
        };
        let get = |v: &[f64], j: i64| if v.len() == 1 { v[0] } else { v[j.rem_euclid(v.len() as i64) as usize] };
        let len1_merged = |j: i64| if k == 1 { get(&len0, j - 1) } else { get(&len1, j) };
        let cells_here = if full { n } else { 1 };
        let mut minus_len: f64 = 0.0;
        for j in 0..n as i64 {
            minus_len = minus_len.max(len1_merged(j + 1) + get(&len0, j));
            if !full {
                break;
            }
        }
        stats.alpha_minus_length = minus_len;
        for j in 0..cells_here as i64 {
            let mut len = get(&len0, j) + len1_merged(j);
            match &prev_lengths {
                None => len += path_length(&gamma_rep),
                Some((l0, l1)) => {
                    let mu = rp.mu as i64;
                    for i in mu * (j - 1)..mu * j {
                        len += get(l1, i + 1) + get(l0, i);
                    }
                }
            }
            stats.cell_length = stats.cell_length.max(len);
        }
        prev_lengths = Some((len0, len1));

        // γ̃_{k−1,j} = Σ_{i<μ} γ̃⁻_{k,·}: latitude arcs over ∂Δ_{k−1} between the q̃.
        if k > 1 {
            let prev = params.ring(k - 1);
            let target = 2.0 * prev.s / prev.n as f64;
            let lat = |i: u64| Latitude { r: rp.r_in, az0: params.center(k, i), az1: params.center(k, i) + turn };
            let q_of = |i: u64| if full { results[(i % n) as usize].q } else { rot(&q0, turn * i as f64) };
            let rep = PhasedLatitude::between(lat(0), &q_of(0), &q_of(1));
            let path = rep.sample(options.sampling.points_for(lat(0).length()), Space::S3);
            let by_quadrature = eta_integral(&path).expect("path on S³") * prev.mu as f64;
            let mut err = (by_quadrature - target).abs();
            if full {
                for j in 0..prev.n {
                    let total: f64 = (j * prev.mu..(j + 1) * prev.mu)
                        .map(|i| PhasedLatitude::between(lat(i), &q_of(i), &q_of(i + 1)).eta_integral())
                        .sum();
                    err = err.max((total - target).abs());
                }
            }
            gamma_eta_next = (by_quadrature, err);
            anchors = if full { (0..prev.n).map(|j| results[(j * prev.mu) as usize].q).collect() } else { vec![q0] };
        }

        rings[k - 1] = Some(RingLift { k, p0, q0, reps: rep_arcs, stats });
    }
    Ok(LegendrianNet {
        params: params.clone(),
        options: *options,
        layout,
        rings: rings.into_iter().map(|r| r.expect("every ring lifted")).collect(),
        gamma_rep,
        gamma_eta_min,
    })
}

trait ReversedSamples {
    fn reversed_samples(&self) -> SampledPath;
}

impl ReversedSamples for SampledPath {
    /// The same points in reverse order, as a path on `[0, T]`.
    fn reversed_samples(&self) -> SampledPath {
        let (lo, hi) = self.param_range();
        let pieces = self
            .pieces()
            .iter()
            .rev()
            .map(|piece| piece.iter().rev().map(|s| Sample { t: lo + hi - s.t, p: s.p, v: -s.v }).collect())
            .collect();
        SampledPath::from_pieces(self.space(), pieces).expect("reversal keeps pieces contiguous")
    }
}

/// Verification summary. `failures` is empty exactly when every check passed.
#[derive(Clone, Debug, Serialize)]
pub struct NetReport {
    pub epsilon: f64,
    pub m: usize,
    pub card: u64,
    pub mode: Mode,
    /// `Σ cells = Γ` on handles.
    pub identity_exact: bool,
    /// `Σ_j α̃_{k,j} = α̃_k − α̃_{k+1}` for `k < m`, `= α̃_m + Γ` for `k = m`.
    pub telescoping_exact: bool,
    /// Every cell has empty boundary.
    pub cycles_closed: bool,
    pub max_cell_length: f64,
    pub max_closure: f64,
    pub max_eta_residual: f64,
    pub max_projection: f64,
    pub max_rotation: f64,
    pub max_length_defect: f64,
    pub merge_residual: f64,
    pub condition_iii_error: f64,
    pub gamma_eta_min: f64,
    pub arc_budget_ok: bool,
    pub ring_bound_ok: bool,
    pub mu_ok: bool,
    pub rings: Vec<RingStats>,
    pub failures: Vec<String>,
}

impl NetReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for NetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "net ε = {}  m = {}  cells = {}  mode = {}", self.epsilon, self.m, self.card, self.mode)?;
        writeln!(f, "  sum of cells = Γ (handles)     {}", yes(self.identity_exact))?;
        writeln!(f, "  ring telescoping               {}", yes(self.telescoping_exact))?;
        writeln!(f, "  every cell is a cycle          {}", yes(self.cycles_closed))?;
        writeln!(f, "  max cell length                {:.6} (< {})", self.max_cell_length, self.epsilon)?;
        writeln!(f, "  max closure residual           {:.3e}", self.max_closure)?;
        writeln!(f, "  max |η| on Legendrian arcs     {:.3e}", self.max_eta_residual)?;
        writeln!(f, "  max re-projection error        {:.3e}", self.max_projection)?;
        writeln!(f, "  max rotation residual          {:.3e}", self.max_rotation)?;
        writeln!(f, "  max S³/P¹ length defect        {:.3e}", self.max_length_defect)?;
        writeln!(f, "  innermost merge residual       {:.3e}", self.merge_residual)?;
        writeln!(f, "  ∫η over γ̃ vs 2s_k/n_k          {:.3e}", self.condition_iii_error)?;
        writeln!(f, "  min η along Γ                  {:.6}", self.gamma_eta_min)?;
        writeln!(f, "  arc budget / ring bound / μ    {} / {} / {}", yes(self.arc_budget_ok), yes(self.ring_bound_ok), yes(self.mu_ok))?;
        if self.failures.is_empty() {
            writeln!(f, "PASS")
        } else {
            for e in &self.failures {
                writeln!(f, "  FAIL {e}")?;
            }
            writeln!(f, "FAIL ({} problems)", self.failures.len())
        }
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

/// Exact handle identities, computed ring by ring with `O(n_m)` memory.
struct Identities {
    identity: bool,
    telescoping: bool,
    cycles: bool,
    notes: Vec<String>,
}

fn check_identities(layout: &HandleLayout, exec: Exec) -> Identities {
    let m = layout.m();
    let mut notes = Vec::new();
    let block = |k: usize| (layout.offsets[k - 1], 2 * layout.n[k - 1]);

    // Cycle property, in parallel over rings.
    let bad_cycles: Vec<(usize, u64)> = par::map_range(exec, m, |idx| {
        let k = idx + 1;
        let (mut leg, mut pt) = (Vec::new(), Vec::new());
        let mut pts: Vec<(NetPoint, i32)> = Vec::new();
        for j in 0..layout.n[k - 1] {
            layout.cell_terms(k, j, &mut leg, &mut pt);
            pts.clear();
            for &(h, s) in leg.iter().chain(&pt) {
                let (a, b) = layout.endpoints(h);
                pts.push((b, s));
                pts.push((a, -s));
            }
            pts.sort_unstable_by_key(|x| x.0);
            let mut open = false;
            let mut i = 0;
            while i < pts.len() {
                let mut sum = 0;
                let p = pts[i].0;
                while i < pts.len() && pts[i].0 == p {
                    sum += pts[i].1;
                    i += 1;
                }
                open |= sum != 0;
            }
            if open {
                return Some((k, j));
            }
        }
        None
    })
    .into_iter()
    .flatten()
    .collect();
    for (k, j) in &bad_cycles {
        notes.push(format!("cell ({k}, {j}) has non-empty boundary"));
    }

    // Σ_j cells(k) against α̃_k − α̃_{k+1} (or α̃_m + Γ), and the global sum
    // Σ cells = Γ accumulated block by block: block k only receives terms from
    // cells of rings k and k − 1.
    let mut telescoping = true;
    let mut identity = true;
    let (mut leg, mut pt) = (Vec::new(), Vec::new());
    let mut gamma_acc = vec![0i32; layout.n[m - 1] as usize];
    let mut global_next: Vec<i32> = Vec::new();
    for k in (1..=m).rev() {
        let (off_k, len_k) = block(k);
        let (off_n, len_n) = if k < m { block(k + 1) } else { (layout.gamma, 0) };
        let mut ring = vec![0i32; len_k as usize];
        let mut outer = vec![0i32; len_n as usize];
        let mut gam = vec![0i32; gamma_acc.len()];
        for j in 0..layout.n[k - 1] {
            layout.cell_terms(k, j, &mut leg, &mut pt);
            for &(h, s) in leg.iter().chain(&pt) {
                if h >= layout.gamma {
                    gam[(h - layout.gamma) as usize] += s;
                } else if h >= off_k && h < off_k + len_k {
                    ring[(h - off_k) as usize] += s;
                } else if k < m && h >= off_n && h < off_n + len_n {
                    outer[(h - off_n) as usize] += s;
                } else {
                    telescoping = false;
                    notes.push(format!("cell in ring {k} uses a handle outside rings {k}, {}", k + 1));
                }
            }
        }
        // Expected: +α̃_k on ring k (zero at k = 1 after the merge), −α̃_{k+1}
        // on ring k + 1, and Γ from the last ring.
        let n = layout.n[k - 1] as usize;
        let ring_ok = if k == 1 { ring.iter().all(|&x| x == 0) } else { ring.iter().all(|&x| x == 1) && ring.len() == 2 * n };
        let outer_ok = outer.iter().all(|&x| x == -1);
        let gamma_ok = if k == m { gam.iter().all(|&x| x == 1) } else { gam.iter().all(|&x| x == 0) };
        if !(ring_ok && outer_ok && gamma_ok) {
            telescoping = false;
            notes.push(format!("ring {k}: sum of cells is not the telescoping difference"));
        }
        // Global accumulation: finish block k + 1 with the contributions of ring k.
        if k < m {
            for (x, y) in global_next.iter_mut().zip(&outer) {
                *x += y;
            }
            if global_next.iter().any(|&x| x != 0) {
                identity = false;
                notes.push(format!("sum of cells leaves arcs of ring {} behind", k + 1));
            }
        }
        for (x, y) in gamma_acc.iter_mut().zip(&gam) {
            *x += y;
        }
        global_next = ring;
    }
    if global_next.iter().any(|&x| x != 0) {
        identity = false;
        notes.push("sum of cells leaves arcs of ring 1 behind".into());
    }
    if gamma_acc.iter().any(|&x| x != 1) {
        identity = false;
        notes.push("sum of cells does not cover Γ exactly once".into());
    }
    Identities { identity, telescoping, cycles: bad_cycles.is_empty(), notes }
}

/// Checks everything the construction promises and lists what fails.
pub fn verify_net(net: &LegendrianNet) -> NetReport {
    let params = &net.params;
    let tol = net.options.tolerances;
    let eps = params.epsilon;
    let mut failures: Vec<String> = params.check();
    let ids = check_identities(&net.layout, net.options.exec);
    failures.extend(ids.notes);

    let stats: Vec<RingStats> = net.rings.iter().map(|r| r.stats.clone()).collect();
    let fold = |f: fn(&RingStats) -> f64| stats.iter().map(f).fold(0.0, f64::max);
    let max_cell_length = fold(|s| s.cell_length);
    let max_closure = fold(|s| s.closure);
    let max_eta_residual = fold(|s| s.eta);
    let max_projection = fold(|s| s.projection);
    let max_rotation = fold(|s| s.rotation);
    let max_length_defect = fold(|s| s.length_defect);
    let merge_residual = fold(|s| s.merge);
    let condition_iii_error = fold(|s| s.gamma_eta_error);

    let mut check = |ok: bool, what: String| {
        if !ok {
            failures.push(what);
        }
    };
    check(max_cell_length < eps, format!("a cell has length {max_cell_length} ≥ ε"));
    check(max_closure <= tol.closure, format!("closure residual {max_closure:e}"));
    check(max_eta_residual <= tol.lift, format!("|η| = {max_eta_residual:e} on a Legendrian arc"));
    check(max_projection <= tol.lift, format!("lift leaves its base curve by {max_projection:e}"));
    check(max_rotation <= 1e-12, format!("rotation equivariance off by {max_rotation:e}"));
    check(max_length_defect <= 1e-6, format!("lifted length differs from base length by {max_length_defect:e}"));
    check(merge_residual <= tol.closure, format!("innermost halves differ by {merge_residual:e}"));
    check(condition_iii_error <= 1e-6, format!("∫η over γ̃ off by {condition_iii_error:e}"));
    check(net.gamma_eta_min > 0.0, "Γ is not positively transverse".into());

    let m = params.m as f64;
    let mut arc_budget_ok = true;
    let mut ring_bound_ok = true;
    let mut mu_ok = true;
    for (idx, r) in params.rings.iter().enumerate() {
        let k = r.k;
        let plus = params.beta_plus(k, 0).boundary_length();
        let minus = params.beta_minus(k, 0).boundary_length();
        let slack = 1e-12;
        if plus > 2.0 * r.ell_plus + PI / m + slack || minus > 2.0 * r.ell_minus + PI / m + slack || 2.0 * r.ell_plus + PI / m > eps / 5.0 + slack {
            arc_budget_ok = false;
            failures.push(format!("ring {k}: boundary budget exceeded (∂β⁺ = {plus}, ∂β⁻ = {minus})"));
        }
        if r.mu > 4 {
            mu_ok = false;
            failures.push(format!("ring {k}: μ = {}", r.mu));
        }
        if k < params.m {
            let mu = r.mu as f64;
            let next = &params.rings[idx + 1];
            let minus_next = params.beta_minus(next.k, 0).boundary_length();
            let measured = stats[idx].alpha_plus_length + mu * stats[idx + 1].alpha_minus_length;
            if (1.0 + mu) * eps / 5.0 > eps || plus + mu * minus_next > (1.0 + mu) * eps / 5.0 + slack || measured > (1.0 + mu) * eps / 5.0 + slack {
                ring_bound_ok = false;
                failures.push(format!("ring {k}: (1 + μ)ε/5 bound fails"));
            }
        }
    }
    NetReport {
        epsilon: eps,
        m: params.m,
        card: params.card(),
        mode: net.options.mode,
        identity_exact: ids.identity,
        telescoping_exact: ids.telescoping,
        cycles_closed: ids.cycles,
        max_cell_length,
        max_closure,
        max_eta_residual,
        max_projection,
        max_rotation,
        max_length_defect,
        merge_residual,
        condition_iii_error,
        gamma_eta_min: net.gamma_eta_min,
        arc_budget_ok,
        ring_bound_ok,
        mu_ok,
        rings: stats,
        failures,
    }
}

/// Writes `{params, anchors, cells}`. Samples are attached to the arcs that
/// were kept during lifting; with `all_cells` false only the cells `j = 0`
/// are listed.
pub fn write_json<W: Write>(net: &LegendrianNet, mut w: W, all_cells: bool) -> crate::Result<()> {
    #[derive(Serialize)]
    struct Anchor {
        k: usize,
        n: u64,
        p: [f64; 4],
        q: [f64; 4],
    }
    #[derive(Serialize)]
    struct Arc {
        handle: Handle,
        sign: i64,
        samples: Option<Vec<[f64; 4]>>,
    }
    #[derive(Serialize)]
    struct Cell {
        k: usize,
        j: u64,
        arcs: Vec<Arc>,
    }
    let samples_of = |h: Handle| -> Option<Vec<[f64; 4]>> {
        let flat = |p: &SampledPath| p.samples().map(|s| s.p.coords()).collect();
        if h == net.layout.gamma(0) {
            return Some(flat(&net.gamma_rep));
        }
        for ring in &net.rings {
            for rep in &ring.reps {
                if h == net.layout.h0(ring.k, rep.j as i64) {
                    return Some(flat(&rep.h0));
                }
                if h == net.layout.h1(ring.k, rep.j as i64) {
                    return Some(flat(&rep.h1));
                }
            }
        }
        None
    };
    w.write_all(b"{\"params\":")?;
    serde_json::to_writer(&mut w, &net.params)?;
    w.write_all(b",\"anchors\":")?;
    let anchors: Vec<Anchor> =
        net.rings.iter().map(|r| Anchor { k: r.k, n: net.params.ring(r.k).n, p: r.p0.coords(), q: r.q0.coords() }).collect();
    serde_json::to_writer(&mut w, &anchors)?;
    w.write_all(b",\"cells\":[")?;
    let mut first = true;
    for k in (1..=net.params.m).rev() {
        let count = if all_cells { net.params.ring(k).n } else { 1 };
        for j in 0..count {
            let cell = net.cell(k, j);
            let arcs = cell
                .legendrian_part
                .terms()
                .chain(cell.transverse_part.terms())
                .map(|(handle, sign)| Arc { handle, sign, samples: samples_of(handle) })
                .collect();
            if !first {
                w.write_all(b",")?;
            }
            first = false;
            serde_json::to_writer(&mut w, &Cell { k, j, arcs })?;
        }
    }
    w.write_all(b"]}\n")?;
    Ok(())
}

/// Most sectors drawn by [`write_svg`].
pub const SVG_SECTOR_BUDGET: u64 = 20_000;

/// SVG of the planar arcs `α⁺_{k,j}` under `ζ = z/w` (stereographic projection
/// from `p_∞`), for the rings with `r_k ≤ clip`. One polyline per smooth
/// piece; latitudes and meridians get different classes. When the rings hold
/// more than [`SVG_SECTOR_BUDGET`] sectors only a wedge of azimuths is drawn.
pub fn write_svg<W: Write>(params: &NetParams, mut w: W, clip: f64) -> crate::Result<()> {
    let clip = clip.clamp(1e-3, FRAC_PI_2 - 1e-3);
    let radius = clip.tan();
    let size = 800.0;
    let scale = 0.48 * size / radius;
    writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#)?;
    writeln!(w, "<style>.lat{{stroke:#1f4e9c;fill:none;stroke-width:0.4}} .mer{{stroke:#b23a2a;fill:none;stroke-width:0.4}}</style>")?;
    writeln!(w, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##)?;
    let drawn: Vec<&RingParams> = params.rings.iter().filter(|r| r.r_out <= clip + 1e-12).collect();
    let total: u64 = drawn.iter().map(|r| r.n).sum();
    let fraction = (SVG_SECTOR_BUDGET as f64 / total.max(1) as f64).min(1.0);
    for r in drawn {
        let count = ((r.n as f64 * fraction).ceil() as u64).clamp(1, r.n);
        for j in 0..count {
            for half in params.half_arcs(r.k, j) {
                for piece in half {
                    let n = (piece.length() / 0.005).ceil().clamp(2.0, 64.0) as usize;
                    let (class, pts) = match piece {
                        PlanarPiece::Mer(m) => ("mer", [m.r0, m.r1].iter().map(|&rr| (rr, m.az)).collect::<Vec<_>>()),
                        PlanarPiece::Lat(l) => (
                            "lat",
                            (0..n).map(|i| (l.r, l.az0 + (l.az1 - l.az0) * i as f64 / (n - 1) as f64)).collect(),
                        ),
                    };
                    write!(w, r#"<polyline class="{class}" points=""#)?;
                    for (rr, az) in pts {
                        let rho = rr.tan() * scale;
                        write!(w, "{:.2},{:.2} ", 0.5 * size + rho * az.cos(), 0.5 * size - rho * az.sin())?;
                    }
                    writeln!(w, r#""/>"#)?;
                }
            }
        }
    }
    writeln!(w, "</svg>")?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub m: usize,
    pub n_m: u64,
    pub card: u64,
    pub lower_quadratic: f64,
    pub lower_cubic: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `log card` against `log(1/ε)`.
    pub slope: f64,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, w: W) -> crate::Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Least-squares slope of `y` against `x`.
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Component counts and lower bounds for each `ε`; no lifting.
pub fn sweep(epsilons: &[f64], exec: Exec) -> crate::Result<SweepTable> {
    if epsilons.len() < 2 {
        return Err(NetError::Sweep("need at least two values of ε".into()).into());
    }
    let rows: Vec<crate::Result<SweepRow>> = par::map_slice(exec, epsilons, |&eps| {
        let p = compute_params(eps)?;
        let (q, c) = bounds::lower_bounds(eps)?;
        Ok(SweepRow { epsilon: eps, m: p.m, n_m: p.n_m(), card: p.card(), lower_quadratic: q, lower_cubic: c })
    });
    let rows = rows.into_iter().collect::<crate::Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| (1.0 / r.epsilon).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| (r.card as f64).ln()).collect();
    Ok(SweepTable { slope: regression_slope(&x, &y), rows })
}
