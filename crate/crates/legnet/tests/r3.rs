use std::f64::consts::{PI, TAU};

use legnet::chain::Chain1;
use legnet::r3::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[test]
fn lift_of_flat_segment() {
    let lifted = lift_planar(&PlanarPath::segment([0.0, 0.0], [1.0, 0.0], 20), 0.0);
    assert!(lifted.samples().all(|s| s.p[2] == 0.0));
    assert!((lifted.length() - 1.0).abs() < 1e-14);
}

#[test]
fn lift_of_unit_circle_drops_by_its_area() {
    let circle = PlanarPath::arc([0.0, 0.0], 1.0, 0.0, TAU, 400);
    let end = lift_planar(&circle, 0.0).end().unwrap();
    assert!((end[2] + PI).abs() < 1e-9, "{}", end[2]);
    assert!((end[0] - 1.0).abs() < 1e-12 && end[1].abs() < 1e-12);
}

#[test]
fn lift_along_unit_height() {
    let end = lift_planar(&PlanarPath::segment([0.0, 1.0], [1.0, 1.0], 10), 5.0).end().unwrap();
    assert!((end[2] - 6.0).abs() < 1e-14);
}

#[test]
fn connector_examples() {
    let c1 = connector_constant();
    assert!(c1 > 0.0 && c1.is_finite());

    let same = connector([0.3, 0.2, 0.1], [0.3, 0.2, 0.1], 0.4).unwrap();
    assert!(same.is_empty());
    assert_eq!(same.length(), 0.0);

    let d = 1e-4;
    let vertical = connector_checked([0.0; 3], [0.0, 0.0, d], 0.4).unwrap();
    assert_eq!(vertical.segment_length(), 0.0);
    let circumference = 2.0 * (PI * d).sqrt();
    assert!((circumference - 0.0354).abs() < 1e-4);
    // The circle has radius √(δ/π) ≈ 0.0056 and sits near y = 0, so its lift
    // is longer than the planar circle by a relative O(r²).
    assert!((vertical.length() - circumference).abs() < 1e-4 * circumference, "{}", vertical.length());
    let path = connector([0.0; 3], [0.0, 0.0, d], 0.4).unwrap();
    assert!(dist(path.end().unwrap(), [0.0, 0.0, d]) < 1e-10);
    assert!(path.legendrian_residual() < 1e-12, "{}", path.legendrian_residual());

    let flat = connector_checked([0.0; 3], [1e-4, 0.0, 0.0], 0.4).unwrap();
    assert_eq!(flat.radius, 0.0);
    assert!((flat.length() - 1e-4).abs() < 1e-18);
}

#[test]
fn connector_preconditions() {
    assert!(matches!(connector([0.0; 3], [0.0; 3], 0.5), Err(R3Error::EpsilonOutOfRange(_))));
    assert!(matches!(connector([0.0, 1.0, 0.0], [0.0; 3], 0.4), Err(R3Error::YOutOfRange { which: "start", .. })));
    assert!(matches!(connector([0.0; 3], [0.0, -1.2, 0.0], 0.4), Err(R3Error::YOutOfRange { which: "end", .. })));
    assert!(matches!(connector([0.0; 3], [0.2, 0.0, 0.0], 0.4), Err(R3Error::TooFar { .. })));
}

#[test]
fn empty_cycle_decomposes_to_nothing() {
    let d = decompose_cycle(&[], &Triangulation::cone([0.0; 3], &[]), 0.5, 1000).unwrap();
    assert!(d.is_empty());
    assert!(d.sum().is_empty());
}

fn alpha_chain(alpha: &[R3Arc]) -> Chain1 {
    Chain1::from_terms(alpha.iter().map(|a| (a.handle, 1)))
}

#[test]
fn figure_eight_is_a_closed_legendrian_cycle() {
    let alpha = figure_eight(32);
    assert_eq!(alpha.len(), 8);
    for (i, a) in alpha.iter().enumerate() {
        assert!(a.path.legendrian_residual() < 1e-12);
        let next = &alpha[(i + 1) % 8];
        assert!(dist(a.path.end().unwrap(), next.path.start().unwrap()) < 1e-12);
    }
    let total: f64 = alpha.iter().map(|a| a.path.length()).sum();
    // Eight unit sides, each with |y| ≤ ½ and ż = y ẋ.
    assert!(total > 8.0 && total < 8.0 * (1.25f64).sqrt());
}

#[test]
fn coarse_decomposition() {
    let alpha = figure_eight(32);
    let cone = Triangulation::cone([1.0, 0.0, 0.0], &alpha);
    let d = decompose_cycle(&alpha, &cone, 6.0, 1_000_000).unwrap();
    assert!(d.max_length() < 6.0);
    assert_eq!(d.sum(), d.expand(&alpha_chain(&alpha)));
    for c in d.cycles() {
        assert_eq!(c.len(), 3);
    }
}

#[test]
fn fine_decomposition() {
    let alpha = figure_eight(32);
    let cone = Triangulation::cone([1.0, 0.0, 0.0], &alpha);
    let coarse = decompose_cycle(&alpha, &cone, 6.0, 1_000_000).unwrap();
    let d = decompose_cycle(&alpha, &cone, 0.5, 5_000_000).unwrap();
    assert!(d.len() > coarse.len());
    assert!(d.max_length() < 0.5);
    assert_eq!(d.sum(), d.expand(&alpha_chain(&alpha)));
}

#[test]
fn decomposition_reports_the_triangle_limit() {
    let alpha = figure_eight(16);
    let cone = Triangulation::cone([1.0, 0.0, 0.0], &alpha);
    assert!(matches!(decompose_cycle(&alpha, &cone, 0.5, 1000), Err(R3Error::RefinementFailed { .. })));
}

#[test]
fn decomposition_rejects_a_foreign_cone() {
    let alpha = figure_eight(16);
    let other = figure_eight(16);
    let cone = Triangulation::cone([1.0, 0.0, 0.0], &other);
    assert!(matches!(decompose_cycle(&alpha, &cone, 6.0, 1000), Err(R3Error::Spanning(_))));
}

#[test]
fn decomposition_rejects_open_chains() {
    let mut alpha = figure_eight(16);
    alpha.pop();
    let cone = Triangulation::cone([1.0, 0.0, 0.0], &alpha);
    assert!(matches!(decompose_cycle(&alpha, &cone, 6.0, 1000), Err(R3Error::NotClosed(..))));
}

#[test]
fn branches_of_real_level() {
    let (p, m) = solve_branches(C64::new(1.0, 0.0), (0.0, 0.0), 2).unwrap();
    for (b, s) in [(&p, 1.0), (&m, -1.0)] {
        let [u, v, z] = b.samples[0];
        assert_eq!((u, z), (0.0, 0.0));
        assert!((v - s).abs() < 1e-15);
        let [x, y, _] = b.points().next().unwrap();
        assert!((x + y - 2.0 * s).abs() < 1e-15);
    }
}

#[test]
fn branches_of_imaginary_level() {
    let (p, m) = solve_branches(C64::new(0.0, 1.0), (0.0, 0.0), 2).unwrap();
    let r = 0.5f64.sqrt();
    for (b, s) in [(&p, 1.0), (&m, -1.0)] {
        let [u, v, z] = b.samples[0];
        assert!((v - s * r).abs() < 1e-15 && (z - s * r).abs() < 1e-15);
        assert!((v * v - u * u - z * z).abs() < 1e-15);
        assert!(b.residual() < 1e-15);
    }
}

#[test]
fn branches_near_zero_hug_the_limit() {
    let mut last = f64::INFINITY;
    for k in 1..=6 {
        let b = 10f64.powi(-k);
        let (p, m) = solve_branches(C64::new(0.0, b), (-1.0, 1.0), 201).unwrap();
        let d = p.distance_to_limit().max(m.distance_to_limit());
        assert!(d < last);
        // Worst at u = 0, where v = z = √(b/2) and the distance is √b.
        assert!(d <= 1.0001 * b.sqrt(), "k = {k}: {d}");
        last = d;
    }
}

#[test]
fn negative_real_levels_are_singular() {
    for c in [C64::new(0.0, 0.0), C64::new(-2.0, 0.0)] {
        assert!(matches!(solve_branches(c, (-1.0, 1.0), 10), Err(R3Error::SingularLevel(_))));
    }
    assert!(solve_branches(C64::new(-2.0, 1e-12), (-1.0, 1.0), 10).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lifts_are_legendrian_and_bounded(c in prop::array::uniform6(-0.5f64..0.5)) {
        let path = PlanarPath::from_fn(64, |t| {
            let (st, ct) = (TAU * t).sin_cos();
            ([c[0] + c[2] * t + c[4] * st, c[1] + c[3] * t + c[5] * ct], [c[2] + TAU * c[4] * ct, c[3] - TAU * c[5] * st])
        });
        let lifted = lift_planar(&path, 0.0);
        prop_assert!(lifted.legendrian_residual() <= 1e-9);
        let y0 = path.start().unwrap()[1];
        prop_assert!(lifted.length() < lift_length_bound(path.length(), y0));
        for (a, b) in path.pieces[0].iter().zip(lifted.samples()) {
            prop_assert_eq!(a.p, [b.p[0], b.p[1]]);
        }
    }

    #[test]
    fn connectors_are_short(
        eps in 0.05f64..0.49,
        x0 in -2.0f64..2.0, y0 in -0.99f64..0.99, z0 in -2.0f64..2.0,
        d in prop::array::uniform3(-1.0f64..1.0),
        frac in 0.0f64..0.99,
    ) {
        let dn = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt().max(1e-9);
        let len = frac * eps * eps;
        let p0 = [x0, y0, z0];
        let p1 = [x0 + d[0] / dn * len, (y0 + d[1] / dn * len).clamp(-0.999, 0.999), z0 + d[2] / dn * len];
        prop_assume!(dist(p0, p1) < eps * eps);
        let spec = connector_checked(p0, p1, eps).unwrap();
        prop_assert!(spec.length() <= connector_constant() * eps);
        let path = spec.path(48);
        if p0 != p1 {
            prop_assert!(dist(path.start().unwrap(), p0) <= 1e-10);
            prop_assert!(dist(path.end().unwrap(), p1) <= 1e-10);
            prop_assert!(path.legendrian_residual() <= 1e-9);
            prop_assert!((path.length() - spec.length()).abs() <= 1e-6 * spec.length().max(1e-12));
        }
    }

    #[test]
    fn branches_are_graphs_over_u(re in -3.0f64..3.0, im in 1e-6f64..3.0, flip in any::<bool>()) {
        let c = C64::new(re, if flip { -im } else { im });
        let (p, m) = solve_branches(c, (-2.0, 2.0), 101).unwrap();
        for (b, s) in [(&p, 1.0), (&m, -1.0)] {
            prop_assert!(b.residual() <= 1e-10 * (1.0 + c.norm()));
            prop_assert!(b.points().all(|[x, y, _]| s * (x + y) > 0.0));
            let u: Vec<f64> = b.points().map(|[x, y, _]| 0.5 * (x - y)).collect();
            prop_assert!(u.windows(2).all(|w| w[1] > w[0]));
        }
    }
}
