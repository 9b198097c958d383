//! End-to-end acceptance checks. Runs without the libtest harness and prints
//! one line per criterion.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use legnet::bounds::{c0_moment, c0_moment_grid, s_half, C0};
use legnet::chain::region::MomentGrid;
use legnet::chain::{extract_circuits, Chain1, PtscCurve};
use legnet::net::{compute_params, lift_net, sweep, verify_net, Mode, NetOptions};
use legnet::r3::{connector_checked, connector_constant, decompose_cycle, figure_eight, lift_length_bound, lift_planar, solve_branches, PlanarPath, Triangulation};
use legnet::s3::*;
use legnet::sections::{hausdorff, legendrian_ratio_experiment, quadric_sweep, trace_level_set, two_crossing_ptsc, two_line_ptsc, Polynomial, TraceOptions};
use legnet::{Exec, Tolerances};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x1e9e_0001)
}

fn metric_split() -> Outcome {
    let mut rng = rng();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 200 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        if c.iter().map(|x| x * x).sum::<f64>() < 1e-3 {
            continue;
        }
        let p = SpherePoint::from_coords(c).map_err(|e| e.to_string())?;
        let v = C2::from_coords(std::array::from_fn(|_| rng.gen_range(-2.0..2.0)));
        let t = TangentS3::project(p, v);
        let e = eta(&t);
        worst = worst.max((t.norm().powi(2) - e * e - t.projected_norm().powi(2)).abs());
        count += 1;
    }
    ensure(worst <= 1e-10, || format!("residual {worst:.2e}"))?;
    Ok(format!("max residual {worst:.2e}"))
}

fn fiber_integral() -> Outcome {
    let fiber = Fiber::full(C2::real(0.6, 0.8)).sample(400, Space::S3);
    let e = eta_integral(&fiber).map_err(|e| e.to_string())?;
    ensure((e - TAU).abs() <= 1e-9, || format!("∫η = {e}"))?;
    Ok(format!("∫η − 2π = {:.2e}", e - TAU))
}

fn holonomy_area() -> Outcome {
    let tol = Tolerances::default();
    let mut worst: f64 = 0.0;
    for r in [0.1, 0.3, 0.5, 0.7] {
        let base = CapCircle::new(&ProjPoint::from_polar(0.8, 2.0), r).sample(400, Space::P1);
        let start = SpherePoint::new(base.start().ok_or("empty loop")?).map_err(|e| e.to_string())?;
        let h = holonomy(&base, &start, &tol).map_err(|e| e.to_string())?;
        let want = 2.0 * cap_area(r).map_err(|e| e.to_string())?;
        worst = worst.max((h - want).abs());
    }
    ensure(worst <= 1e-7, || format!("error {worst:.2e}"))?;
    Ok(format!("max error {worst:.2e}"))
}

fn net_construction() -> Outcome {
    let mut notes = Vec::new();
    for eps in [0.5, 0.3, 0.2] {
        let params = compute_params(eps).map_err(|e| e.to_string())?;
        let net = lift_net(&params, &NetOptions::new(Mode::Full)).map_err(|e| e.to_string())?;
        let rep = verify_net(&net);
        ensure(rep.identity_exact, || format!("ε = {eps}: Σ cells ≠ Γ"))?;
        ensure(rep.cycles_closed, || format!("ε = {eps}: open cell"))?;
        ensure(rep.max_cell_length < eps, || format!("ε = {eps}: cell length {}", rep.max_cell_length))?;
        ensure(rep.max_closure <= 1e-6, || format!("ε = {eps}: closure {:.2e}", rep.max_closure))?;
        ensure(rep.passed(), || format!("ε = {eps}: {:?}", rep.failures))?;
        notes.push(format!("ε={eps}: card {} max {:.4}", rep.card, rep.max_cell_length));
    }
    Ok(notes.join(", "))
}

fn parameter_ladder() -> Outcome {
    let rel = |x: f64, y: f64| ((x - y) / y).abs();
    let mut rings = 0;
    for i in 1..=18 {
        let eps = 0.05 * i as f64;
        let p = compute_params(eps).map_err(|e| e.to_string())?;
        let issues = p.check();
        ensure(issues.is_empty(), || format!("ε = {eps}: {issues:?}"))?;
        let m = p.m as f64;
        // π·sin²(kπ/2m), free of the cancellation in 1 − cos for small k.
        let s_of = |k: f64| PI * (0.5 * k * PI / m).sin().powi(2);
        for (idx, r) in p.rings.iter().enumerate() {
            let kf = r.k as f64;
            let ell = FRAC_PI_2 * ((kf * PI / m).sin() + ((kf - 1.0) * PI / m).sin());
            let target = 20.0 * s_of(kf) * ell / (eps * (s_of(kf) - s_of(kf - 1.0)));
            let nu = (0..64).find(|&nu| 2f64.powi(nu) >= target).unwrap_or(64) as u32;
            ensure(r.nu == nu, || format!("ε = {eps}, k = {}: ν = {} vs {nu}", r.k, r.nu))?;
            ensure(eps / 40.0 < r.ell_plus && r.ell_plus <= eps / 20.0, || format!("ε = {eps}, k = {}: ℓ⁺ = {}", r.k, r.ell_plus))?;
            if let Some(next) = p.rings.get(idx + 1) {
                ensure(r.nu <= next.nu && next.nu <= r.nu + 2, || format!("ε = {eps}, k = {}: ν growth", r.k))?;
            }
            let n = r.n as f64;
            for j in [0, r.n - 1] {
                let plus = p.beta_plus(r.k, j).area();
                ensure(rel(plus, s_of(kf) / n) <= 1e-12, || format!("ε = {eps}, k = {}: β⁺ area", r.k))?;
                let minus = p.beta_minus(r.k, j).area();
                let ok = if r.k == 1 { minus.abs() <= 1e-15 } else { rel(minus, s_of(kf - 1.0) / n) <= 1e-12 };
                ensure(ok, || format!("ε = {eps}, k = {}: β⁻ area", r.k))?;
            }
            rings += 1;
        }
    }
    Ok(format!("{rings} rings over 18 values of ε"))
}

fn count_scaling() -> Outcome {
    let eps = [0.4, 0.3, 0.2, 0.15, 0.1];
    let t = sweep(&eps, Exec::default()).map_err(|e| e.to_string())?;
    ensure((2.5..=3.3).contains(&t.slope), || format!("slope {}", t.slope))?;
    for r in &t.rows {
        let s = s_half(r.epsilon).map_err(|e| e.to_string())?;
        let bound = (TAU / s).max(2.0 * C0 / (r.epsilon * s));
        ensure(r.card as f64 >= bound, || format!("ε = {}: card {} < {bound}", r.epsilon, r.card))?;
    }
    Ok(format!("slope {:.3}", t.slope))
}

fn moment_constant() -> Outcome {
    let target = ProjPoint::p0();
    let radial = c0_moment(&target);
    let grid = c0_moment_grid(&target, &MomentGrid::default());
    let want = PI * PI / 4.0;
    ensure((radial - want).abs() <= 1e-8, || format!("radial {radial}"))?;
    ensure((grid - want).abs() <= 1e-6, || format!("grid {grid}"))?;
    Ok(format!("radial {:.1e}, grid {:.1e}", radial - want, grid - want))
}

fn quadric_length() -> Outcome {
    let rows = quadric_sweep(0.2, 3.0, 30, 4000).map_err(|e| e.to_string())?;
    ensure(rows.len() == 30, || format!("{} rows", rows.len()))?;
    let best = rows.iter().min_by(|a, b| a.total_length.total_cmp(&b.total_length)).ok_or("no rows")?;
    ensure(best.total_length < 4.0 * PI, || format!("min length {}", best.total_length))?;
    for r in &rows {
        ensure(r.eta_integral >= TAU - 1e-6, || format!("a = {}: Σ∫η = {}", r.a, r.eta_integral))?;
    }
    Ok(format!("min {:.4} at a = {:.3} (4π = {:.4})", best.total_length, best.a, 4.0 * PI))
}

fn sphere_ratio() -> Outcome {
    let p0 = SpherePoint::new(C2::real(0.6, 0.8)).map_err(|e| e.to_string())?;
    let rows = legendrian_ratio_experiment(&p0, &[0.2, 0.1, 0.05, 0.025]).map_err(|e| e.to_string())?;
    let last = rows.last().ok_or("no rows")?;
    ensure(last.skipped.is_none(), || format!("skipped: {:?}", last.skipped))?;
    for r in [last.ratio_plus, last.ratio_minus] {
        ensure((r / PI - 1.0).abs() < 0.01, || format!("ratio {r}"))?;
    }
    Ok(format!("t = {}: {:.5}, {:.5}", last.t, last.ratio_plus, last.ratio_minus))
}

fn r3_model() -> Outcome {
    let mut rng = rng();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let c: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
        let path = PlanarPath::from_fn(64, |t| {
            let (st, ct) = (TAU * t).sin_cos();
            ([c[0] + c[2] * t + c[4] * st, c[1] + c[3] * t + c[5] * ct], [c[2] + TAU * c[4] * ct, c[3] - TAU * c[5] * st])
        });
        let lifted = lift_planar(&path, rng.gen_range(-1.0..1.0));
        worst = worst.max(lifted.legendrian_residual());
        let y0 = path.start().ok_or("empty path")?[1];
        ensure(lifted.length() < lift_length_bound(path.length(), y0), || "lift length bound".into())?;
    }
    ensure(worst <= 1e-9, || format!("Legendrian residual {worst:.2e}"))?;

    let c1 = connector_constant();
    let mut pairs = 0;
    while pairs < 100 {
        let eps = rng.gen_range(0.05..0.49);
        let p0 = [rng.gen_range(-2.0..2.0), rng.gen_range(-0.99..0.99), rng.gen_range(-2.0..2.0)];
        let d: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let dn = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let len = rng.gen_range(0.0..0.99) * eps * eps;
        let p1 = [p0[0] + d[0] / dn * len, p0[1] + d[1] / dn * len, p0[2] + d[2] / dn * len];
        if dn < 1e-6 || p1[1].abs() >= 1.0 {
            continue;
        }
        let spec = connector_checked(p0, p1, eps).map_err(|e| e.to_string())?;
        ensure(spec.length() <= c1 * eps, || format!("connector {} > c₁ε", spec.length()))?;
        pairs += 1;
    }

    let eps = 0.45;
    let alpha = figure_eight(32);
    let cone = Triangulation::cone([1.0, 0.0, 0.0], &alpha);
    let d = decompose_cycle(&alpha, &cone, eps, 5_000_000).map_err(|e| e.to_string())?;
    let input = Chain1::from_terms(alpha.iter().map(|a| (a.handle, 1)));
    ensure(d.sum() == d.expand(&input), || "cycles do not sum to the input".into())?;
    ensure(d.max_length() < eps, || format!("cycle length {}", d.max_length()))?;
    Ok(format!("residual {worst:.1e}, c₁ = {c1:.2}, {} cycles (max {:.3})", d.len(), d.max_length()))
}

fn branches() -> Outcome {
    let mut last = f64::INFINITY;
    for k in 1..=6 {
        let c = C64::new(0.0, 10f64.powi(-k));
        let (p, m) = solve_branches(c, (-1.0, 1.0), 201).map_err(|e| e.to_string())?;
        for (b, s) in [(&p, 1.0), (&m, -1.0)] {
            ensure(b.points().all(|[x, y, _]| s * (x + y) > 0.0), || format!("k = {k}: branches not separated"))?;
            let u: Vec<f64> = b.points().map(|[x, y, _]| 0.5 * (x - y)).collect();
            ensure(u.windows(2).all(|w| w[1] > w[0]), || format!("k = {k}: not monotone in u"))?;
        }
        let d = p.distance_to_limit().max(m.distance_to_limit());
        ensure(d < last, || format!("k = {k}: distance {d} did not decrease"))?;
        last = d;
    }
    Ok(format!("distance at k = 6: {last:.2e}"))
}

fn circuits() -> Outcome {
    for n in 1..=4 {
        let fibers = (0..n)
            .map(|k| {
                let lam = 0.2 + 0.3 * k as f64;
                Fiber::full(C2::real(lam.cos(), lam.sin())).sample(100, Space::S3)
            })
            .collect();
        let got = extract_circuits(&PtscCurve::new(fibers, vec![])).map_err(|e| e.to_string())?.len();
        ensure(got == n, || format!("{n} disjoint circles → {got} circuits"))?;
    }
    let two_x = extract_circuits(&two_crossing_ptsc(400)).map_err(|e| e.to_string())?.len();
    ensure(two_x == 2, || format!("two crossings → {two_x} circuits"))?;

    let s = two_line_ptsc(400);
    let circuits = extract_circuits(&s).map_err(|e| e.to_string())?;
    ensure(circuits.len() == 1, || format!("two-line → {} circuits", circuits.len()))?;
    let level = trace_level_set(Polynomial::TwoLine, 1e-3, FRAC_PI_2, &TraceOptions::default()).map_err(|e| e.to_string())?;
    ensure(level.component_count() == circuits.len(), || format!("{} components", level.component_count()))?;
    let cloud: Vec<C2> = circuits.iter().flat_map(|c| c.polyline(&s, 2000)).collect();
    let h = hausdorff(&level.polylines(2).concat(), &cloud);
    ensure(h <= 0.05, || format!("Hausdorff {h}"))?;
    Ok(format!("Hausdorff {h:.4}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("metric split", metric_split),
        ("fiber integral", fiber_integral),
        ("holonomy = 2 × area", holonomy_area),
        ("net construction", net_construction),
        ("parameter ladder", parameter_ladder),
        ("count scaling", count_scaling),
        ("moment constant", moment_constant),
        ("quadric length", quadric_length),
        ("sphere ratio", sphere_ratio),
        ("R³ model", r3_model),
        ("branches near zero", branches),
        ("circuit extraction", circuits),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        let t = Instant::now();
        let out = f();
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("criterion {:>2} {:<22} PASS {secs:>8.2}s  {detail}", i + 1, name),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {:<22} FAIL {secs:>8.2}s  {why}", i + 1, name);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
