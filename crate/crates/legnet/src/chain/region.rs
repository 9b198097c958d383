//! 2-chains of spherical regions on `P¹`.
//!
//! Regions are metric caps, annulus sectors about a pole, and the whole of
//! `P¹`. A chain is also a function: [`multiplicity_at`] evaluates it at a
//! point. Positive/negative parts and boundary lengths are computed on an
//! exact arrangement: all regions sharing a pole are cut along every radius and
//! azimuth that occurs, and each grid cell gets a constant multiplicity.
//! Regions about different poles must have disjoint bounding disks.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::ChainError;
use crate::quad::GaussRule;
use crate::s3::{fs_distance, polar_rep, wrap_angle, ProjPoint, C2};

const SNAP: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// Metric disk of radius `radius` about `center`.
    Cap { center: ProjPoint, radius: f64 },
    /// `{r_in ≤ dist(pole, ·) ≤ r_out}` restricted to azimuths in
    /// `[az_start, az_start + az_width]`, azimuth measured in the frame of `pole`.
    Sector { pole: ProjPoint, r_in: f64, r_out: f64, az_start: f64, az_width: f64 },
    /// The whole projective line.
    Full,
}

impl Region {
    pub fn cap(center: ProjPoint, radius: f64) -> Self {
        Region::Cap { center, radius }
    }

    /// Annulus sector about `p₀`.
    pub fn sector(r_in: f64, r_out: f64, az_start: f64, az_width: f64) -> Self {
        Region::Sector { pole: ProjPoint::p0(), r_in, r_out, az_start, az_width }
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        let ok_r = |r: f64| (0.0..=FRAC_PI_2 + SNAP).contains(&r);
        match *self {
            Region::Cap { radius, .. } if !ok_r(radius) => Err(ChainError::Region(format!("cap radius {radius}"))),
            Region::Sector { r_in, r_out, az_width, .. } => {
                if !ok_r(r_in) || !ok_r(r_out) || r_in > r_out {
                    Err(ChainError::Region(format!("sector radii [{r_in}, {r_out}]")))
                } else if !(az_width >= 0.0) {
                    Err(ChainError::Region(format!("sector width {az_width}")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Fubini–Study area.
    pub fn area(&self) -> f64 {
        match *self {
            Region::Cap { radius, .. } => PI * radius.sin().powi(2),
            // sin²a − sin²b = sin(a + b)·sin(a − b), without cancellation.
            Region::Sector { r_in, r_out, az_width, .. } => 0.5 * az_width.min(TAU) * (r_out + r_in).sin() * (r_out - r_in).sin(),
            Region::Full => PI,
        }
    }

    /// Length of the boundary of the region alone.
    pub fn boundary_length(&self) -> f64 {
        match *self {
            Region::Cap { radius, .. } => PI * (2.0 * radius).sin(),
            Region::Sector { r_in, r_out, az_width, .. } => {
                let w = az_width.min(TAU);
                let arcs = 0.5 * w * ((2.0 * r_in).sin() + (2.0 * r_out).sin());
                let sides = if az_width >= TAU { 0.0 } else { 2.0 * (r_out - r_in) };
                arcs + sides
            }
            Region::Full => 0.0,
        }
    }

    /// Closed-set membership.
    pub fn contains(&self, p: &ProjPoint) -> bool {
        match self {
            Region::Cap { center, radius } => fs_distance(center, p) <= radius + SNAP,
            Region::Sector { pole, r_in, r_out, az_start, az_width } => {
                let (r, az) = polar_about(pole, p);
                if r < r_in - SNAP || r > r_out + SNAP {
                    return false;
                }
                if *az_width >= TAU - SNAP || r < SNAP {
                    return true;
                }
                let rel = wrap_angle(az - az_start);
                rel <= az_width + SNAP || rel >= TAU - SNAP
            }
            Region::Full => true,
        }
    }

    fn as_sector(&self) -> Option<(ProjPoint, f64, f64, f64, f64)> {
        match *self {
            Region::Cap { center, radius } => Some((center, 0.0, radius, 0.0, TAU)),
            Region::Sector { pole, r_in, r_out, az_start, az_width } => Some((pole, r_in, r_out, az_start, az_width)),
            Region::Full => None,
        }
    }
}

/// Colatitude and azimuth of `p` in the frame of `pole`.
pub fn polar_about(pole: &ProjPoint, p: &ProjPoint) -> (f64, f64) {
    let u = pole.frame();
    let q = p.rep();
    // Inverse of a unitary frame is its conjugate transpose.
    let inv = [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]];
    ProjPoint::from_c2(q.apply(&inv)).expect("unit vector").polar()
}

/// Point at colatitude `r`, azimuth `az` in the frame of `pole`.
pub fn point_about(pole: &ProjPoint, r: f64, az: f64) -> C2 {
    polar_rep(r, az).apply(&pole.frame())
}

/// A formal integer sum of regions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Chain2 {
    pub terms: Vec<(Region, i64)>,
}

impl Chain2 {
    pub fn new() -> Self {
        Chain2::default()
    }

    pub fn single(region: Region, m: i64) -> Self {
        Chain2 { terms: vec![(region, m)] }
    }

    pub fn push(&mut self, region: Region, m: i64) {
        if m != 0 {
            self.terms.push((region, m));
        }
    }

    pub fn extend(&mut self, other: &Chain2, sign: i64) {
        for (r, m) in &other.terms {
            self.push(r.clone(), sign * m);
        }
    }

    /// Signed area `Σ m·area`.
    pub fn area(&self) -> f64 {
        self.terms.iter().map(|(r, m)| *m as f64 * r.area()).sum()
    }

    /// Boundary length of the chain viewed as a multiplicity function.
    pub fn boundary_length(&self) -> Result<f64, ChainError> {
        Ok(Arrangement::build(self)?.boundary_length())
    }

    /// `(β⁺, β⁻)` with `β = β⁺ − β⁻`, both nonnegative as functions.
    pub fn parts(&self) -> Result<(Chain2, Chain2), ChainError> {
        Ok(Arrangement::build(self)?.parts())
    }

    /// Positive/negative areas, boundary length, boundary connectivity and
    /// support diameter in one pass.
    pub fn diagnostics(&self) -> Result<IsoDiagnostics, ChainError> {
        let arr = Arrangement::build(self)?;
        let (plus, minus) = arr.part_areas();
        let edges = arr.boundary_edges();
        let connected = arr.edges_connected(&edges);
        let diameter = arr.support_diameter(self, &edges);
        Ok(IsoDiagnostics {
            area: self.area(),
            plus_area: plus,
            minus_area: minus,
            boundary_length: arr.boundary_length(),
            boundary_connected: connected,
            support_diameter: diameter,
        })
    }

    /// `Σ m·∫_region f ω` on a product Gauss grid in polar coordinates.
    pub fn moment<F: Fn(&ProjPoint) -> f64>(&self, f: F, grid: &MomentGrid) -> f64 {
        self.terms.iter().map(|(r, m)| *m as f64 * region_moment(r, &f, grid)).sum()
    }
}

/// The chain as a function on `P¹`.
pub fn multiplicity_at(b: &Chain2, p: &ProjPoint) -> i64 {
    b.terms.iter().filter(|(r, _)| r.contains(p)).map(|(_, m)| m).sum()
}

/// Summary used by the isoperimetric checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IsoDiagnostics {
    pub area: f64,
    pub plus_area: f64,
    pub minus_area: f64,
    pub boundary_length: f64,
    pub boundary_connected: bool,
    pub support_diameter: f64,
}

/// Resolution of the polar product grid used by [`Chain2::moment`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentGrid {
    pub radial_panels: usize,
    pub azimuth_panels: usize,
    pub order: usize,
}

impl Default for MomentGrid {
    fn default() -> Self {
        MomentGrid { radial_panels: 32, azimuth_panels: 64, order: 8 }
    }
}

fn region_moment<F: Fn(&ProjPoint) -> f64>(region: &Region, f: &F, grid: &MomentGrid) -> f64 {
    let (pole, r0, r1, a0, w) = match region.as_sector() {
        Some(s) => s,
        None => (ProjPoint::p0(), 0.0, FRAC_PI_2, 0.0, TAU),
    };
    let w = w.min(TAU);
    let rule = GaussRule::new(grid.order.max(1));
    let nr = grid.radial_panels.max(1);
    let na = grid.azimuth_panels.max(1);
    let hr = (r1 - r0) / nr as f64;
    let ha = w / na as f64;
    let frame = pole.frame();
    let mut total = 0.0;
    for i in 0..nr {
        let lo = r0 + hr * i as f64;
        for (r, wr) in rule.mapped(lo, lo + hr) {
            let jac = 0.5 * (2.0 * r).sin();
            let mut ring = 0.0;
            for j in 0..na {
                let alo = a0 + ha * j as f64;
                for (az, wa) in rule.mapped(alo, alo + ha) {
                    let p = ProjPoint::from_c2(polar_rep(r, az).apply(&frame)).expect("unit vector");
                    ring += wa * f(&p);
                }
            }
            total += wr * jac * ring;
        }
    }
    total
}

struct Group {
    pole: ProjPoint,
    radii: Vec<f64>,
    azs: Vec<f64>,
    /// Multiplicity of cell `(i, j)` at `i * azs.len() + j`, including the
    /// contribution of full-sphere terms.
    mult: Vec<i64>,
}

impl Group {
    fn n_az(&self) -> usize {
        self.azs.len()
    }

    fn n_r(&self) -> usize {
        self.radii.len() - 1
    }

    fn m(&self, i: usize, j: usize) -> i64 {
        self.mult[i * self.n_az() + j]
    }

    fn az_cell(&self, j: usize) -> (f64, f64) {
        let a = self.azs[j];
        let b = if j + 1 < self.azs.len() { self.azs[j + 1] } else { self.azs[0] + TAU };
        (a, b - a)
    }

    fn outer(&self) -> f64 {
        *self.radii.last().expect("at least two radii")
    }
}

struct Arrangement {
    groups: Vec<Group>,
    base: i64,
}

fn snap_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        if out.last().is_none_or(|&l| x - l > SNAP) {
            out.push(x);
        }
    }
    out
}

impl Arrangement {
    fn build(chain: &Chain2) -> Result<Self, ChainError> {
        let mut base = 0;
        let mut by_pole: Vec<(ProjPoint, Vec<(f64, f64, f64, f64, i64)>)> = Vec::new();
        for (region, m) in &chain.terms {
            region.validate()?;
            match region.as_sector() {
                None => base += m,
                Some((pole, r0, r1, a0, w)) => {
                    let entry = (r0, r1, a0, w, *m);
                    match by_pole.iter_mut().find(|(p, _)| p.approx_eq(&pole, SNAP)) {
                        Some((_, list)) => list.push(entry),
                        None => by_pole.push((pole, vec![entry])),
                    }
                }
            }
        }
        let mut groups = Vec::with_capacity(by_pole.len());
        for (pole, list) in by_pole {
            let mut radii = vec![0.0];
            let mut azs = vec![];
            for &(r0, r1, a0, w, _) in &list {
                radii.push(r0);
                radii.push(r1);
                if w < TAU - SNAP {
                    azs.push(wrap_angle(a0));
                    azs.push(wrap_angle(a0 + w));
                }
            }
            let radii = snap_sorted(radii);
            let mut azs = snap_sorted(azs);
            if azs.len() > 1 && azs[0] + TAU - azs[azs.len() - 1] <= SNAP {
                azs.pop();
            }
            if azs.is_empty() {
                azs.push(0.0);
            }
            if radii.len() < 2 {
                // Every region in the group is empty.
                continue;
            }
            let mut g = Group { pole, radii, azs, mult: Vec::new() };
            let (nr, na) = (g.n_r(), g.n_az());
            g.mult = vec![base; nr * na];
            for i in 0..nr {
                let rm = 0.5 * (g.radii[i] + g.radii[i + 1]);
                for j in 0..na {
                    let (a, w) = g.az_cell(j);
                    let am = a + 0.5 * w;
                    for &(r0, r1, a0, sw, m) in &list {
                        if rm < r0 || rm > r1 {
                            continue;
                        }
                        let inside = sw >= TAU - SNAP || wrap_angle(am - a0) <= sw;
                        if inside {
                            g.mult[i * na + j] += m;
                        }
                    }
                }
            }
            groups.push(g);
        }
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                let (ga, gb) = (&groups[a], &groups[b]);
                let d = fs_distance(&ga.pole, &gb.pole);
                if d <= ga.outer() + gb.outer() + SNAP {
                    return Err(ChainError::Arrangement(format!(
                        "regions about different poles overlap (pole distance {d:.6}, radii {:.6} and {:.6})",
                        ga.outer(),
                        gb.outer()
                    )));
                }
            }
        }
        Ok(Arrangement { groups, base })
    }

    fn cell_region(g: &Group, i: usize, j: usize) -> Region {
        let (a, w) = g.az_cell(j);
        if g.radii[i] == 0.0 && w >= TAU - SNAP {
            Region::Cap { center: g.pole, radius: g.radii[i + 1] }
        } else {
            Region::Sector { pole: g.pole, r_in: g.radii[i], r_out: g.radii[i + 1], az_start: a, az_width: w }
        }
    }

    fn parts(&self) -> (Chain2, Chain2) {
        let mut plus = Chain2::new();
        let mut minus = Chain2::new();
        let base_plus = self.base.max(0);
        let base_minus = (-self.base).max(0);
        plus.push(Region::Full, base_plus);
        minus.push(Region::Full, base_minus);
        for g in &self.groups {
            for i in 0..g.n_r() {
                for j in 0..g.n_az() {
                    let m = g.m(i, j);
                    let region = Self::cell_region(g, i, j);
                    plus.push(region.clone(), m.max(0) - base_plus);
                    minus.push(region, (-m).max(0) - base_minus);
                }
            }
        }
        (plus, minus)
    }

    fn part_areas(&self) -> (f64, f64) {
        let mut covered = 0.0;
        let (mut plus, mut minus) = (0.0, 0.0);
        for g in &self.groups {
            for i in 0..g.n_r() {
                for j in 0..g.n_az() {
                    let a = Self::cell_region(g, i, j).area();
                    covered += a;
                    let m = g.m(i, j) as f64;
                    plus += m.max(0.0) * a;
                    minus += (-m).max(0.0) * a;
                }
            }
        }
        let rest = (PI - covered).max(0.0);
        let b = self.base as f64;
        (plus + b.max(0.0) * rest, minus + (-b).max(0.0) * rest)
    }

    /// Boundary edges with nonzero multiplicity jump:
    /// `(group, kind, i, j, |jump|)` where kind 0 is a latitude edge at
    /// `radii[i]` over azimuth cell `j`, kind 1 a meridian edge at `azs[j]`
    /// over radial cell `i`.
    fn boundary_edges(&self) -> Vec<(usize, u8, usize, usize, i64)> {
        let mut out = Vec::new();
        for (gi, g) in self.groups.iter().enumerate() {
            let (nr, na) = (g.n_r(), g.n_az());
            for i in 1..=nr {
                for j in 0..na {
                    let below = g.m(i - 1, j);
                    let above = if i == nr { self.base } else { g.m(i, j) };
                    let jump = (above - below).abs();
                    if jump != 0 && (2.0 * g.radii[i]).sin() > SNAP {
                        out.push((gi, 0, i, j, jump));
                    }
                }
            }
            if na > 1 {
                for i in 0..nr {
                    for j in 0..na {
                        let prev = g.m(i, (j + na - 1) % na);
                        let jump = (g.m(i, j) - prev).abs();
                        if jump != 0 {
                            out.push((gi, 1, i, j, jump));
                        }
                    }
                }
            }
        }
        out
    }

    fn edge_length(&self, e: &(usize, u8, usize, usize, i64)) -> f64 {
        let g = &self.groups[e.0];
        match e.1 {
            0 => 0.5 * g.az_cell(e.3).1 * (2.0 * g.radii[e.2]).sin(),
            _ => g.radii[e.2 + 1] - g.radii[e.2],
        }
    }

    fn boundary_length(&self) -> f64 {
        self.boundary_edges().iter().map(|e| e.4 as f64 * self.edge_length(e)).sum()
    }

    fn vertex(&self, g: usize, i: usize, j: usize) -> (usize, usize, usize) {
        let grp = &self.groups[g];
        if grp.radii[i] < SNAP || grp.radii[i] > FRAC_PI_2 - SNAP {
            (g, i, 0)
        } else {
            (g, i, j % grp.n_az())
        }
    }

    fn edges_connected(&self, edges: &[(usize, u8, usize, usize, i64)]) -> bool {
        let mut ids: Vec<(usize, usize, usize)> = Vec::new();
        let mut pairs = Vec::new();
        for e in edges {
            let (a, b) = match e.1 {
                0 => (self.vertex(e.0, e.2, e.3), self.vertex(e.0, e.2, e.3 + 1)),
                _ => (self.vertex(e.0, e.2, e.3), self.vertex(e.0, e.2 + 1, e.3)),
            };
            pairs.push((a, b));
            ids.push(a);
            ids.push(b);
        }
        ids.sort();
        ids.dedup();
        if ids.len() <= 1 {
            return true;
        }
        let index = |v: &(usize, usize, usize)| ids.binary_search(v).expect("vertex registered");
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (a, b) in pairs {
            let (ra, rb) = (find(&mut parent, index(&a)), find(&mut parent, index(&b)));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let root = find(&mut parent, 0);
        (0..ids.len()).all(|x| find(&mut parent, x) == root)
    }

    fn support_diameter(&self, chain: &Chain2, edges: &[(usize, u8, usize, usize, i64)]) -> f64 {
        let mut pts = Vec::new();
        for e in edges {
            let g = &self.groups[e.0];
            let n = 16;
            for k in 0..=n {
                let s = k as f64 / n as f64;
                let (r, az) = match e.1 {
                    0 => {
                        let (a, w) = g.az_cell(e.3);
                        (g.radii[e.2], a + s * w)
                    }
                    _ => (g.radii[e.2] + s * (g.radii[e.2 + 1] - g.radii[e.2]), g.azs[e.3]),
                };
                pts.push(ProjPoint::from_c2(point_about(&g.pole, r, az)).expect("unit vector"));
            }
        }
        if pts.is_empty() {
            let any = self.base != 0 || self.groups.iter().any(|g| g.mult.iter().any(|&m| m != 0));
            return if any { FRAC_PI_2 } else { 0.0 };
        }
        let mut d: f64 = 0.0;
        for (a, p) in pts.iter().enumerate() {
            for q in &pts[a + 1..] {
                d = d.max(fs_distance(p, q));
            }
        }
        // A farthest point can only be interior when it is antipodal.
        if pts.iter().any(|p| multiplicity_at(chain, &p.antipode()) != 0) {
            d = FRAC_PI_2;
        }
        d
    }
}
