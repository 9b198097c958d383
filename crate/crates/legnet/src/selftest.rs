//! Built-in invariant suites behind `legnet selftest`.
//!
//! Each suite draws its random inputs from its own generator seeded by the run
//! seed and the suite name, so a suite's output does not depend on which other
//! suites run or in what order. Reported numbers are rounded to three
//! significant digits; the report is byte-identical for a fixed seed.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{self, c0_moment, c0_moment_grid, lower_bounds, s_r, transverse_stats, C0};
use crate::chain::region::MomentGrid;
use crate::chain::{extract_circuits, Chain1, Chain2, Handle, PtscCurve, Region};
use crate::net::{compute_params, lift_net, verify_net, Mode, NetOptions};
use crate::r3::{self, PlanarPath};
use crate::s3::{
    cap_area, eta_at, eta_integral, holonomy, legendrian_lift, CapCircle, Curve, Fiber, ProjPoint, Space, SpherePoint, TangentS3, C2,
};
use crate::sections::{self, Polynomial, TraceOptions};
use crate::{par, Exec, Tolerances};

pub const SUITES: [&str; 6] = ["s3", "chain", "r3", "net", "bounds", "sections"];

#[derive(Clone, Debug)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Run only suites whose name contains this string.
    pub filter: Option<String>,
    pub exec: Exec,
    pub tolerances: Tolerances,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions { seed: 0, filter: None, exec: Exec::default(), tolerances: Tolerances::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelftestReport {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed() == s.checks.len())
    }

    pub fn counts(&self) -> (usize, usize) {
        let total = self.suites.iter().map(|s| s.checks.len()).sum();
        let passed = self.suites.iter().map(|s| s.passed()).sum();
        (passed, total)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "selftest seed = {}", self.seed)?;
        for s in &self.suites {
            writeln!(f, "[{}] {}/{}", s.name, s.passed(), s.checks.len())?;
            for c in &s.checks {
                writeln!(f, "  {} {:<34} {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail)?;
            }
        }
        let (p, t) = self.counts();
        writeln!(f, "{p}/{t} checks passed")
    }
}

/// Three significant digits, stable across platforms.
fn sig(x: f64) -> String {
    format!("{x:.2e}")
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn new() -> Self {
        Suite { checks: Vec::new() }
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    /// A check whose computation may fail; the error becomes the detail.
    fn try_check<E: fmt::Display>(&mut self, name: &str, r: Result<(bool, String), E>) {
        match r {
            Ok((ok, d)) => self.check(name, ok, d),
            Err(e) => self.check(name, false, format!("error: {e}")),
        }
    }
}

fn suite_rng(seed: u64, name: &str) -> ChaCha8Rng {
    // FNV-1a over the name, mixed into the seed.
    let h = name.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3));
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

fn random_sphere_point(rng: &mut ChaCha8Rng) -> SpherePoint {
    loop {
        let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n2: f64 = c.iter().map(|x| x * x).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            if let Ok(p) = SpherePoint::from_coords(c) {
                return p;
            }
        }
    }
}

fn random_c2(rng: &mut ChaCha8Rng) -> C2 {
    C2::from_coords(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
}

/// Runs the selected suites, concurrently when `exec` allows it. The report
/// lists suites in the fixed order of [`SUITES`].
pub fn run(opts: &SelftestOptions) -> SelftestReport {
    let names: Vec<&'static str> = SUITES
        .iter()
        .copied()
        .filter(|n| opts.filter.as_deref().map_or(true, |f| n.contains(f)))
        .collect();
    let suites = par::map_slice(opts.exec, &names, |&name| SuiteReport { name, checks: run_suite(name, opts) });
    SelftestReport { seed: opts.seed, suites }
}

fn run_suite(name: &str, opts: &SelftestOptions) -> Vec<Check> {
    let mut rng = suite_rng(opts.seed, name);
    let mut s = Suite::new();
    match name {
        "s3" => s3_suite(&mut s, &mut rng, opts),
        "chain" => chain_suite(&mut s, &mut rng),
        "r3" => r3_suite(&mut s, &mut rng),
        "net" => net_suite(&mut s, opts),
        "bounds" => bounds_suite(&mut s, &mut rng),
        "sections" => sections_suite(&mut s),
        _ => s.check("unknown suite", false, name.to_string()),
    }
    s.checks
}

fn s3_suite(s: &mut Suite, rng: &mut ChaCha8Rng, opts: &SelftestOptions) {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = random_sphere_point(rng);
        let v = TangentS3::project(p, random_c2(rng));
        let e = crate::s3::eta(&v);
        worst = worst.max((v.norm().powi(2) - (e * e + v.projected_norm().powi(2))).abs());
    }
    s.check("metric split, 200 tangents", worst <= 1e-10, sig(worst));

    let p = random_sphere_point(rng);
    let fiber = eta_integral(&Fiber::full(p.c2()).sample(400, Space::S3));
    s.try_check("fiber integral = 2π", fiber.map(|b| ((b - TAU).abs() <= 1e-9, sig(b - TAU))));

    let mut worst: f64 = 0.0;
    let mut err = None;
    for r in [0.1, 0.3, 0.5, 0.7] {
        let center = ProjPoint::from_polar(rng.gen_range(0.0..FRAC_PI_2), rng.gen_range(0.0..TAU));
        let loop_ = CapCircle::new(&center, r).sample(200, Space::P1);
        let start = match SpherePoint::new(loop_.start().expect("sampled")) {
            Ok(p) => p,
            Err(e) => {
                err = Some(e.to_string());
                break;
            }
        };
        match (holonomy(&loop_, &start, &opts.tolerances), cap_area(r)) {
            (Ok(h), Ok(a)) => worst = worst.max((h - 2.0 * a).abs()),
            (Err(e), _) | (_, Err(e)) => err = Some(e.to_string()),
        }
    }
    match err {
        Some(e) => s.check("holonomy = 2·area, four caps", false, e),
        None => s.check("holonomy = 2·area, four caps", worst <= 1e-7, sig(worst)),
    }

    let center = ProjPoint::from_polar(rng.gen_range(0.0..PI / 2.0), rng.gen_range(0.0..TAU));
    let base = CapCircle::new(&center, 0.4).sample(300, Space::P1);
    let start = SpherePoint::new(base.start().expect("sampled")).expect("unit representative");
    let lifted = legendrian_lift(&base, &start, &opts.tolerances);
    s.try_check(
        "lift is horizontal",
        lifted.map(|l| {
            let w = l.samples().map(|x| eta_at(&x.p, &x.v).abs()).fold(0.0, f64::max);
            (w <= opts.tolerances.lift, sig(w))
        }),
    );
}

fn chain_suite(s: &mut Suite, rng: &mut ChaCha8Rng) {
    let mut a = Chain1::new();
    let base = Handle::reserve(50);
    for _ in 0..200 {
        a.add_term(base.offset(rng.gen_range(0..50)), rng.gen_range(-3..=3));
    }
    let zero = &a + &(-&a);
    s.check("α + (−α) = 0", zero.is_empty(), format!("{} terms left", zero.len()));

    let fibers: Vec<_> = (0..3)
        .map(|k| Fiber::full(crate::s3::polar_rep(0.3 + 0.4 * k as f64, 0.0)).sample(200, Space::S3))
        .collect();
    let disjoint = PtscCurve::new(fibers, vec![]);
    s.try_check("three disjoint fibers → 3 circuits", extract_circuits(&disjoint).map(|c| (c.len() == 3, format!("{}", c.len()))));

    let two = sections::two_line_ptsc(400);
    s.try_check("two-line section → 1 circuit", extract_circuits(&two).map(|c| (c.len() == 1, format!("{}", c.len()))));

    let two_x = sections::two_crossing_ptsc(400);
    s.try_check("two crossings → 2 circuits", extract_circuits(&two_x).map(|c| (c.len() == 2, format!("{}", c.len()))));

    let mut b = Chain2::single(Region::cap(ProjPoint::p0(), 0.3), 1);
    b.push(Region::cap(ProjPoint::p0(), 0.3), -1);
    s.try_check("cap − cap has empty boundary", b.boundary_length().map(|l| (l.abs() <= 1e-12, sig(l))));
}

fn r3_suite(s: &mut Suite, rng: &mut ChaCha8Rng) {
    let mut resid: f64 = 0.0;
    let mut bound_ok = true;
    for _ in 0..100 {
        let c: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
        let path = PlanarPath::from_fn(64, |t| {
            let (st, ct) = (TAU * t).sin_cos();
            ([c[0] + c[2] * t + c[4] * st, c[1] + c[3] * t + c[5] * ct], [c[2] + TAU * c[4] * ct, c[3] - TAU * c[5] * st])
        });
        let lifted = r3::lift_planar(&path, 0.0);
        resid = resid.max(lifted.legendrian_residual());
        let y0 = path.start().expect("sampled")[1];
        bound_ok &= lifted.length() <= r3::lift_length_bound(path.length(), y0) * (1.0 + 1e-12);
    }
    s.check("lift residual, 100 paths", resid <= 1e-9, sig(resid));
    s.check("lift length bound, 100 paths", bound_ok, "");

    let c1 = r3::connector_constant();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..100 {
        let eps = rng.gen_range(0.05..0.49);
        let p0 = [rng.gen_range(-2.0..2.0), rng.gen_range(-0.99..0.99), rng.gen_range(-2.0..2.0)];
        let d: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let dn = d.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-9);
        let len = rng.gen_range(0.0..0.99) * eps * eps;
        let mut p1: [f64; 3] = std::array::from_fn(|i| p0[i] + d[i] / dn * len);
        p1[1] = p1[1].clamp(-0.999, 0.999);
        match r3::connector_checked(p0, p1, eps) {
            Ok(spec) => worst = worst.max(spec.length() / (c1 * eps)),
            Err(_) => failures += 1,
        }
    }
    s.check("connector ≤ c₁·ε, 100 pairs", failures == 0 && worst <= 1.0, format!("max ratio {}", sig(worst)));

    let alpha = r3::figure_eight(32);
    let cone = r3::Triangulation::cone([1.0, 0.0, 0.0], &alpha);
    let eps = 0.45;
    match r3::decompose_cycle(&alpha, &cone, eps, 5_000_000) {
        Ok(d) => {
            let input = d.expand(&Chain1::from_terms(alpha.iter().map(|a| (a.handle, 1))));
            s.check("decomposition sums to the cycle", d.sum() == input, format!("{} cycles", d.len()));
            s.check("decomposed cycles shorter than ε", d.max_length() < eps, sig(d.max_length()));
        }
        Err(e) => s.check("decomposition sums to the cycle", false, e.to_string()),
    }

    let mut dist = Vec::new();
    let mut err = None;
    for k in 1..=6 {
        match r3::solve_branches(C64::new(0.0, 10f64.powi(-k)), (-1.0, 1.0), 201) {
            Ok((a, b)) => dist.push(a.distance_to_limit().max(b.distance_to_limit())),
            Err(e) => err = Some(e.to_string()),
        }
    }
    match err {
        Some(e) => s.check("branches approach S₀^±", false, e),
        None => s.check("branches approach S₀^±", dist.windows(2).all(|w| w[1] < w[0]), sig(*dist.last().unwrap_or(&f64::NAN))),
    }
}

fn net_suite(s: &mut Suite, opts: &SelftestOptions) {
    let mut problems = Vec::new();
    for i in 1..=18 {
        let eps = 0.05 * i as f64;
        match compute_params(eps) {
            Ok(p) => problems.extend(p.check().into_iter().map(|m| format!("ε = {eps:.2}: {m}"))),
            Err(e) => problems.push(e.to_string()),
        }
    }
    s.check("ladder identities, ε ∈ [0.05, 0.9]", problems.is_empty(), problems.first().cloned().unwrap_or_default());

    let params = compute_params(0.5).expect("0.5 is in range");
    let mut nopts = NetOptions::new(Mode::Sampled);
    nopts.tolerances = opts.tolerances;
    nopts.exec = opts.exec;
    match lift_net(&params, &nopts) {
        Ok(net) => {
            let rep = verify_net(&net);
            s.check("net ε = 0.5 verifies", rep.passed(), format!("max cell length {}", sig(rep.max_cell_length)));
        }
        Err(e) => s.check("net ε = 0.5 verifies", false, e.to_string()),
    }
}

fn bounds_suite(s: &mut Suite, rng: &mut ChaCha8Rng) {
    let c0 = c0_moment(&ProjPoint::p0());
    s.check("c₀ = π²/4 (radial)", (c0 - C0).abs() <= 1e-8, sig(c0 - C0));
    let grid = c0_moment_grid(&ProjPoint::p0(), &MomentGrid::default());
    s.check("c₀ grid cross-check", (grid - c0).abs() <= 1e-6, sig(grid - c0));

    let eps: Vec<f64> = (1..=30).map(|i| 0.05 * i as f64).collect();
    let rows = bounds::bounds_table(&eps);
    s.try_check(
        "lower bounds decrease in ε",
        rows.map(|r| (r.windows(2).all(|w| w[1].n_quad < w[0].n_quad && w[1].n_cubic < w[0].n_cubic), String::new())),
    );

    let mut ok = true;
    for _ in 0..100 {
        let r = rng.gen_range(0.2..2.0);
        let parts: Vec<f64> = (0..rng.gen_range(2..6)).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = parts.iter().sum();
        let scale = rng.gen_range(0.0..TAU * r) / total;
        let sum_s: f64 = parts.iter().map(|a| s_r(a * scale, r).unwrap_or(f64::NAN)).sum();
        ok &= s_r(total * scale, r).map_or(false, |v| v >= sum_s - 1e-12);
    }
    s.check("S_R superadditive, 100 partitions", ok, "");

    let mut ok = true;
    let mut detail = String::new();
    for _ in 0..100 {
        let center = ProjPoint::from_polar(rng.gen_range(0.0..FRAC_PI_2), rng.gen_range(0.0..TAU));
        let r = rng.gen_range(0.01..0.2);
        match closed_cap_loop(&center, r) {
            Ok(gamma) => match transverse_stats(&gamma, 1e-9) {
                Ok(t) => ok &= t.triangle_holds && t.area_bound_holds != Some(false) && t.length_bound_holds != Some(false),
                Err(e) => {
                    ok = false;
                    detail = e.to_string();
                }
            },
            Err(e) => {
                ok = false;
                detail = e;
            }
        }
    }
    s.check("transverse bounds, 100 small caps", ok, detail);

    let b = Chain2::single(Region::cap(ProjPoint::p0(), 0.3), 1);
    s.try_check("isoperimetric, single cap", bounds::isoperimetric_check(&b).map(|r| (r.area_holds == Some(true) && r.diameter_holds == Some(true), String::new())));
    match lower_bounds(0.1) {
        Ok((q, c)) => {
            let quad = 8.0 * PI * PI / 0.01 - 2.0;
            let cubic = 8.0 * C0 * PI / 1e-3;
            s.check("lower bounds at ε = 0.1", (q - quad).abs() < 0.05 && (c / cubic - 1.0).abs() < 0.01, format!("{q:.1} / {c:.0}"))
        }
        Err(e) => s.check("lower bounds at ε = 0.1", false, e.to_string()),
    }
}

/// The Legendrian lift of `∂Δ(center, r)` followed by the fiber arc back to
/// its start.
pub fn closed_cap_loop(center: &ProjPoint, r: f64) -> Result<crate::s3::SampledPath, String> {
    let tol = Tolerances::default();
    let base = CapCircle::new(center, r).sample(200, Space::P1);
    let start = SpherePoint::new(base.start().ok_or("empty")?).map_err(|e| e.to_string())?;
    let lifted = legendrian_lift(&base, &start, &tol).map_err(|e| e.to_string())?;
    let end = lifted.end().ok_or("empty")?;
    let h = holonomy(&base, &start, &tol).map_err(|e| e.to_string())?;
    let close = Fiber { base: end, from: 0.0, to: h }.sample(64, Space::S3);
    let back = close.end().ok_or("empty")?;
    if back.distance(&start.c2()) > 1e-8 {
        return Err(format!("fiber arc misses the start by {:e}", back.distance(&start.c2())));
    }
    crate::s3::SampledPath::concat(&[lifted, close], None).map_err(|e| e.to_string())
}

fn sections_suite(s: &mut Suite) {
    s.try_check(
        "line z = 0.6: radius 0.8",
        sections::line_section(C2::real(0.6, 0.0), C2::real(0.0, 1.0)).map(|l| ((l.radius - 0.8).abs() <= 1e-14 && l.residual(64) <= 1e-10, sig(l.residual(64)))),
    );

    let p0 = SpherePoint::new(C2::real(0.6, 0.8)).expect("unit");
    s.try_check(
        "sphere ratio → π",
        sections::legendrian_ratio_experiment(&p0, &[0.2, 0.1, 0.05, 0.025]).map(|rows| {
            let last = rows.last().map(|r| r.ratio_plus).unwrap_or(0.0);
            let monotone = rows.windows(2).all(|w| (w[1].ratio_plus - PI).abs() < (w[0].ratio_plus - PI).abs());
            (monotone && (last / PI - 1.0).abs() < 0.01, sig(last - PI))
        }),
    );

    s.try_check(
        "quadric ∫η ≥ 2π, a ∈ {0.5, 1, 2}",
        [0.5, 1.0, 2.0]
            .iter()
            .map(|&a| sections::quadric_boundary(C64::new(a, 0.0), 2000).map(|q| q.eta_total))
            .collect::<Result<Vec<_>, _>>()
            .map(|v| {
                let m = v.iter().copied().fold(f64::INFINITY, f64::min);
                (m >= TAU - 1e-6, sig(m - TAU))
            }),
    );

    s.try_check(
        "level set r = 1e-3: one component",
        sections::trace_level_set(Polynomial::TwoLine, 1e-3, FRAC_PI_2, &TraceOptions::default())
            .map(|c| (c.component_count() == 1, format!("{}", c.component_count()))),
    );
}
