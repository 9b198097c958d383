use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::OnceLock;

use legnet::chain::region::MomentGrid;
use legnet::chain::{Chain1, Chain2};
use legnet::net::*;
use legnet::s3::{cap_area, eta_integral};
use legnet::Exec;

/// Ladder recomputed from the closed forms, independently of the library.
struct Oracle {
    m: usize,
    s: Vec<f64>,
    a: Vec<f64>,
    ell: Vec<f64>,
    nu: Vec<u32>,
}

fn oracle(eps: f64) -> Oracle {
    let m = (10.0 * PI / eps).floor() as usize + 1;
    let mf = m as f64;
    let s_of = |k: f64| FRAC_PI_2 * (1.0 - (k * PI / mf).cos());
    let mut o = Oracle { m, s: vec![], a: vec![], ell: vec![], nu: vec![] };
    for k in 1..=m {
        let kf = k as f64;
        let s = s_of(kf);
        let a = s - s_of(kf - 1.0);
        let ell = FRAC_PI_2 * ((kf * PI / mf).sin() + ((kf - 1.0) * PI / mf).sin());
        let target = 20.0 * s * ell / (eps * a);
        let nu = (0..64).find(|&nu| 2f64.powi(nu as i32) >= target).unwrap();
        o.s.push(s);
        o.a.push(a);
        o.ell.push(ell);
        o.nu.push(nu);
    }
    o
}

fn rel(x: f64, y: f64) -> f64 {
    ((x - y) / y).abs()
}

#[test]
fn ladder_at_one_half() {
    let p = compute_params(0.5).unwrap();
    assert_eq!(p.m, 63);
    let r1 = p.ring(1);
    let s1 = FRAC_PI_2 * (1.0 - (PI / 63.0).cos());
    assert!(rel(r1.s, s1) < 1e-12 && rel(r1.a, s1) < 1e-12);
    assert!(rel(r1.ell, FRAC_PI_2 * (PI / 63.0).sin()) < 1e-12);
    assert!((20.0 * r1.ell / 0.5 - 3.13).abs() < 0.01);
    assert_eq!((r1.nu, r1.n), (2, 4));
    assert!((r1.ell_plus - 0.0196).abs() < 1e-4);
    assert!(0.0125 < r1.ell_plus && r1.ell_plus <= 0.025);
    let rm = p.ring(63);
    let x = 20.0 * rm.s * rm.ell / (0.5 * rm.a);
    assert!((x - 5.04e3).abs() < 5.0, "{x}");
    assert_eq!((rm.nu, rm.n, p.n_m()), (13, 8192, 8192));
    assert_eq!(rm.theta, 0.0);
}

#[test]
fn ladder_matches_oracle_on_grid() {
    for i in 1..=18 {
        let eps = 0.05 * i as f64;
        let p = compute_params(eps).unwrap();
        let o = oracle(eps);
        assert_eq!(p.m, o.m);
        assert!(p.check().is_empty(), "ε = {eps}: {:?}", p.check());
        for (idx, r) in p.rings.iter().enumerate() {
            assert!((r.s - o.s[idx]).abs() <= 1e-12);
            assert!((r.a - o.a[idx]).abs() <= 1e-12);
            assert!((r.ell - o.ell[idx]).abs() <= 1e-12);
            assert_eq!(r.nu, o.nu[idx], "ε = {eps}, k = {}", r.k);
            assert!(eps / 40.0 < r.ell_plus && r.ell_plus <= eps / 20.0);
            assert!(rel(r.ell_plus * r.n as f64, r.s * r.ell / r.a) < 1e-12);
            if let Some(next) = p.rings.get(idx + 1) {
                assert!(r.n <= next.n);
                assert!(next.nu <= r.nu + 2);
                assert!([1, 2, 4].contains(&r.mu));
                assert_eq!(r.mu * r.n, next.n);
                // p_{k,0} = q_{k+1,0}.
                assert!(p.p_point(r.k, 0).approx_eq(&p.q_point(r.k + 1, 0), 1e-12));
            }
        }
    }
}

#[test]
fn epsilon_range() {
    for eps in [0.0, 1.0, -0.1, 2.0, f64::NAN] {
        assert!(matches!(compute_params(eps), Err(NetError::EpsilonOutOfRange(_))));
    }
    assert!(compute_params(0.99).is_ok());
}

#[test]
fn sector_areas() {
    let p = compute_params(0.3).unwrap();
    let grid = MomentGrid { radial_panels: 2, azimuth_panels: 2, order: 12 };
    for r in &p.rings {
        let n = r.n as f64;
        for j in [0, 1, r.n - 1] {
            let plus = p.beta_plus(r.k, j).area();
            let minus = p.beta_minus(r.k, j).area();
            assert!(rel(plus, r.s / n) <= 1e-12);
            if r.k == 1 {
                assert!(minus.abs() <= 1e-15);
            } else {
                assert!(rel(minus, r.s_prev / n) <= 1e-12);
            }
            // Independent oracle: integrate 1 over the sector.
            let quad = Chain2::single(p.beta_plus(r.k, j), 1).moment(|_| 1.0, &grid);
            assert!(rel(quad, r.s / n) <= 1e-10, "k = {}: {quad}", r.k);
        }
    }
    let total: f64 = p.rings.iter().map(|r| r.a).sum();
    assert!(rel(total, cap_area(FRAC_PI_2).unwrap()) < 1e-12);
}

#[test]
fn regions_and_anchors() {
    let p = compute_params(0.5).unwrap();
    let regions = build_regions(&p).unwrap();
    assert_eq!(regions.len(), p.m);
    for r in &regions {
        let ring = p.ring(r.k);
        let (rp, _) = r.p.polar();
        let (rq, _) = r.q.polar();
        assert!((rp - ring.r_out).abs() < 1e-12 && (rq - ring.r_in).abs() < 1e-12);
    }
}

#[test]
fn half_arcs_of_inner_ring_share_a_meridian() {
    let p = compute_params(0.5).unwrap();
    let [h0, h1] = p.half_arcs(1, 0);
    // r_in = 0, so the latitudes at the centre vanish.
    assert!(h0.last().unwrap().is_meridian() && h1[0].is_meridian());
    let len: f64 = h0.iter().chain(&h1).map(|x| x.length()).sum();
    let r = p.ring(1);
    let expected = 2.0 * r.r_out + 0.5 * (2.0 * r.r_out).sin() * (r.width - TAU / r.n as f64);
    assert!(rel(len, expected) < 1e-12);
}

fn net_half() -> &'static LegendrianNet {
    static NET: OnceLock<LegendrianNet> = OnceLock::new();
    NET.get_or_init(|| lift_net(&compute_params(0.5).unwrap(), &NetOptions::new(Mode::Full)).unwrap())
}

#[test]
fn full_net_at_one_half_verifies() {
    let net = net_half();
    let rep = verify_net(net);
    assert!(rep.passed(), "{:?}", rep.failures);
    assert!(rep.identity_exact && rep.telescoping_exact && rep.cycles_closed);
    assert!(rep.max_cell_length < 0.5);
    assert!(rep.max_closure <= 1e-6);
    assert!(rep.max_eta_residual <= 1e-8);
    assert!(rep.max_rotation <= 1e-12);
    assert!(rep.condition_iii_error <= 1e-6);
    assert!(rep.mu_ok && rep.ring_bound_ok && rep.arc_budget_ok);
    assert!(rep.gamma_eta_min > 0.0);
    assert_eq!(rep.card, 247_924);
}

#[test]
fn cells_sum_to_gamma() {
    let net = net_half();
    let mut total = Chain1::new();
    let mut count = 0u64;
    for cell in net.cells() {
        total.add_assign(&cell.combined());
        count += 1;
    }
    assert_eq!(count, net.card());
    assert_eq!(total, net.gamma_chain());
}

#[test]
fn every_cell_is_a_cycle() {
    let net = net_half();
    let base = net.layout.handle(0).0;
    for k in 1..=net.params.m {
        for j in [0, 1, net.params.ring(k).n - 1] {
            let cell = net.cell(k, j);
            let mut bd: BTreeMap<NetPoint, i64> = BTreeMap::new();
            for (h, m) in cell.combined().terms() {
                let (tail, head) = net.layout.endpoints(h.0 - base);
                *bd.entry(head).or_default() += m;
                *bd.entry(tail).or_default() -= m;
            }
            assert!(bd.values().all(|&m| m == 0), "k = {k}, j = {j}: {bd:?}");
            if k < net.params.m {
                assert!(cell.transverse_part.is_empty());
            }
        }
    }
}

#[test]
fn innermost_ring_cancels() {
    // The two halves of α̃⁺_{1,j} coincide with neighbouring halves reversed,
    // so summing the innermost cells leaves only arcs of ring 2.
    let net = net_half();
    let n1 = net.params.ring(1).n as i64;
    let mut sum = Chain1::new();
    for j in 0..n1 as u64 {
        sum.add_assign(&net.cell(1, j).combined());
    }
    for j in 0..n1 {
        assert_eq!(sum.multiplicity(net.layout.h0(1, j)), 0);
        assert_eq!(sum.multiplicity(net.layout.h1(1, j)), 0);
    }
    assert!(!sum.is_empty());
}

#[test]
fn transverse_arcs_carry_their_share() {
    let net = net_half();
    let m = net.params.m;
    let expected = TAU / net.params.n_m() as f64;
    let got = eta_integral(&net.gamma_rep).unwrap();
    assert!((got - expected).abs() < 1e-9);
    let stats = &net.rings[m - 1].stats;
    assert!((stats.gamma_eta - 2.0 * net.params.ring(m).s / net.params.n_m() as f64).abs() < 1e-6);
    for r in &net.rings {
        assert!(r.stats.gamma_eta_error <= 1e-6, "k = {}", r.k);
    }
}

#[test]
fn sampled_and_sequential_agree_with_full() {
    let params = compute_params(0.5).unwrap();
    let mut o = NetOptions::new(Mode::Sampled);
    o.exec = Exec::Sequential;
    let sampled = verify_net(&lift_net(&params, &o).unwrap());
    let full = verify_net(net_half());
    assert!(sampled.passed());
    assert!((sampled.max_cell_length - full.max_cell_length).abs() < 1e-9);
}

#[test]
fn json_schema() {
    let net = lift_net(&compute_params(0.9).unwrap(), &NetOptions::new(Mode::Full)).unwrap();
    let mut buf = Vec::new();
    write_json(&net, &mut buf, false).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
    assert_eq!(v["params"]["m"].as_u64().unwrap() as usize, net.params.m);
    assert_eq!(v["anchors"].as_array().unwrap().len(), net.params.m);
    let cells = v["cells"].as_array().unwrap();
    assert_eq!(cells.len(), net.params.m);
    assert!(cells.iter().all(|c| c["arcs"].as_array().is_some_and(|a| !a.is_empty())));

    let mut all = Vec::new();
    write_json(&net, &mut all, true).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&all).unwrap();
    assert_eq!(v["cells"].as_array().unwrap().len() as u64, net.card());
}

#[test]
fn svg_output() {
    let mut buf = Vec::new();
    write_svg(&compute_params(0.5).unwrap(), &mut buf, 1.2).unwrap();
    let s = String::from_utf8(buf).unwrap();
    assert!(s.starts_with("<svg") || s.starts_with("<?xml"));
    assert!(s.trim_end().ends_with("</svg>"));
    assert!(s.contains("<polyline"));
}

#[test]
fn sweep_table() {
    let eps = [0.4, 0.3, 0.2, 0.15, 0.1];
    let t = sweep(&eps, Exec::default()).unwrap();
    assert!((2.5..=3.3).contains(&t.slope), "{}", t.slope);
    for r in &t.rows {
        assert_eq!(r.card, compute_params(r.epsilon).unwrap().card());
        assert!(r.card as f64 >= r.lower_quadratic.max(r.lower_cubic));
    }
    let mut buf = Vec::new();
    t.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("epsilon,m,n_m,card,lower_quadratic,lower_cubic\n"));
    assert_eq!(text.lines().count(), 6);
    assert!(sweep(&[0.3], Exec::default()).is_err());
}

#[test]
fn mode_parsing() {
    assert_eq!("full".parse::<Mode>().unwrap(), Mode::Full);
    assert_eq!("sampled".parse::<Mode>().unwrap(), Mode::Sampled);
    assert!("fast".parse::<Mode>().is_err());
    assert_eq!(Mode::default_for(0.2), Mode::Full);
    assert_eq!(Mode::default_for(0.1), Mode::Sampled);
}
