use std::f64::consts::{FRAC_PI_2, PI, TAU};

use legnet::bounds::*;
use legnet::chain::region::MomentGrid;
use legnet::chain::{Chain2, Region};
use legnet::s3::*;
use legnet::selftest::closed_cap_loop;
use proptest::prelude::*;

#[test]
fn isoperimetric_function_values() {
    assert_eq!(s_half(0.0).unwrap(), 0.0);
    assert!((s_half(PI).unwrap() - FRAC_PI_2).abs() < 1e-15);
    assert!(s_half(PI + 1e-9).is_err());
    assert!(s_half(-1e-9).is_err());
    assert!(s_r(1.0, 0.0).is_err());
    // A cap of radius r on the sphere of radius R has perimeter 2πR sin(r/R)
    // and area 2πR²(1 − cos(r/R)).
    for (r, big) in [(0.3, 0.5), (1.0, 2.0), (0.1, 1.0)] {
        let a = TAU * big * (r / big).sin();
        let area = TAU * big * big * (1.0 - (r / big).cos());
        assert!((s_r(a, big).unwrap() - area).abs() < 1e-13);
    }
}

#[test]
fn series_expansion_at_small_length() {
    let a: f64 = 0.1;
    let series = a.powi(2) / (4.0 * PI) + a.powi(4) / (16.0 * PI.powi(3));
    let rem = (s_half(a).unwrap() - series).abs();
    assert!(rem < 1e-9, "{rem}");
    // Next term: a⁶/(32π⁵).
    assert!(rem < 2.0 * a.powi(6) / (32.0 * PI.powi(5)));
}

#[test]
fn isoperimetric_single_cap() {
    let b = Chain2::single(Region::cap(ProjPoint::p0(), 0.3), 1);
    let r = isoperimetric_check(&b).unwrap();
    assert_eq!(r.status, IsoStatus::Applicable);
    assert_eq!(r.area_holds, Some(true));
    assert_eq!(r.diameter_holds, Some(true));
    assert!((r.area - cap_area(0.3).unwrap()).abs() < 1e-14);
    assert!((r.boundary_length - cap_circumference(0.3).unwrap()).abs() < 1e-12);
    // Caps are extremal: the area bound is attained.
    assert!((r.bound.unwrap() - r.area).abs() < 1e-12);
    assert!((r.diameter - 0.6).abs() < 1e-9);
}

#[test]
fn isoperimetric_opposite_caps() {
    let mut b = Chain2::single(Region::cap(ProjPoint::from_polar(0.4, 0.0), 0.2), 1);
    b.push(Region::cap(ProjPoint::from_polar(0.4, PI), 0.25), -1);
    let r = isoperimetric_check(&b).unwrap();
    let (a1, a2) = (cap_area(0.2).unwrap(), cap_area(0.25).unwrap());
    assert!((r.plus_area - a1).abs() < 1e-14);
    assert!((r.minus_area - a2).abs() < 1e-14);
    assert!((r.area - (a1 - a2)).abs() < 1e-14);
    assert_eq!(r.area_holds, Some(true));
    assert!(!r.boundary_connected);
    assert_eq!(r.diameter_holds, None);
}

#[test]
fn isoperimetric_zero_chain() {
    let mut b = Chain2::single(Region::cap(ProjPoint::p0(), 0.3), 1);
    b.push(Region::cap(ProjPoint::p0(), 0.3), -1);
    let r = isoperimetric_check(&b).unwrap();
    assert_eq!(r.area, 0.0);
    assert_eq!(r.area_holds, Some(true));
}

#[test]
fn isoperimetric_not_applicable() {
    let r = isoperimetric_check(&Chain2::single(Region::cap(ProjPoint::p0(), 1.0), 1)).unwrap();
    assert!(matches!(r.status, IsoStatus::NotApplicable { .. }));
    assert_eq!(r.area_holds, None);
}

#[test]
fn wrapped_inequality_on_caps() {
    for r in [0.1, 0.5, 0.9, 1.4] {
        let b = Chain2::single(Region::cap(ProjPoint::p0(), r), 1);
        let (lhs, holds) = wrapped_isoperimetric_check(&b).unwrap();
        assert!(holds, "r = {r}: {lhs}");
    }
    // A full sphere has no boundary and wraps to zero.
    assert!(wrapped_isoperimetric_lhs(PI, 0.5).abs() < 1e-12);
}

#[test]
fn transverse_stats_of_fibers() {
    let fiber = Fiber::full(C2::real(0.6, 0.8)).sample(200, Space::S3);
    let t = transverse_stats(&fiber, 1e-9).unwrap();
    assert!(t.a.abs() < 1e-12);
    assert!((t.b - TAU).abs() < 1e-12 && (t.ell - TAU).abs() < 1e-12);
    assert!(t.triangle_holds);
    assert_eq!(t.area_bound_holds, None);

    let lam: f64 = 0.7;
    let torus = Fiber::full(C2::real(lam.cos(), lam.sin())).sample(200, Space::S3);
    let t = transverse_stats(&torus, 1e-9).unwrap();
    assert!(t.a.abs() < 1e-12 && (t.b - TAU).abs() < 1e-12 && (t.ell - t.a - t.b).abs() < 1e-12);
}

#[test]
fn transverse_stats_of_a_closed_lift() {
    let gamma = closed_cap_loop(&ProjPoint::from_polar(0.7, 1.0), 0.05).unwrap();
    let t = transverse_stats(&gamma, 1e-9).unwrap();
    assert!((t.a - PI * 0.1f64.sin()).abs() < 1e-9);
    assert!((t.b - 2.0 * cap_area(0.05).unwrap()).abs() < 1e-9);
    // Lift and fiber arc are orthogonal pieces: the length is a + b.
    assert!((t.ell - t.a - t.b).abs() < 1e-8);
    assert!(t.triangle_holds);
    // A cap is extremal, so b = 2·S_{1/2}(a) up to quadrature.
    assert!((t.b - 2.0 * s_half(t.a).unwrap()).abs() < 1e-8);
    assert_eq!(t.area_bound_holds, Some(true));
    assert_eq!(t.length_bound_holds, Some(true));
}

#[test]
fn transverse_stats_rejects_bad_curves() {
    let back = Fiber::full(C2::real(1.0, 0.0)).sample(64, Space::S3).reversed();
    assert!(matches!(transverse_stats(&back, 1e-9), Err(BoundsError::NotTransverse { .. })));
    let open = Fiber { base: C2::real(1.0, 0.0), from: 0.0, to: 1.0 }.sample(64, Space::S3);
    assert!(matches!(transverse_stats(&open, 1e-9), Err(BoundsError::NotClosed(_))));
}

#[test]
fn moment_constant() {
    let c0 = c0_moment(&ProjPoint::p0());
    assert!((c0 - PI * PI / 4.0).abs() < 1e-8);
    assert_eq!(C0, PI * PI / 4.0);
    for target in [ProjPoint::p0(), ProjPoint::p_inf(), ProjPoint::from_polar(0.6, 2.0)] {
        assert_eq!(c0_moment(&target), c0);
        let grid = c0_moment_grid(&target, &MomentGrid::default());
        assert!((grid - c0).abs() < 1e-6, "{grid}");
    }
}

#[test]
fn lower_bound_values() {
    let (q, c) = lower_bounds(0.1).unwrap();
    let quad = 8.0 * PI * PI / 0.01 - 2.0;
    assert!((q - quad).abs() < 0.05, "{q} vs {quad}");
    assert!((q - 7.894e3).abs() < 1.0);
    assert!((c / 6.20e4 - 1.0).abs() < 0.01);
    assert!((c / (8.0 * C0 * PI / 1e-3) - 1.0).abs() < 0.01);

    let (q, c) = lower_bounds(0.01).unwrap();
    assert!((c / q / (PI / 0.04) - 1.0).abs() < 0.01);
    assert!(lower_bounds(0.0).is_err() && lower_bounds(FRAC_PI_2).is_err());
}

#[test]
fn lower_bounds_decrease() {
    let eps: Vec<f64> = (1..=30).map(|i| 0.05 * i as f64).collect();
    let rows = bounds_table(&eps).unwrap();
    assert!(rows.windows(2).all(|w| w[1].n_quad < w[0].n_quad && w[1].n_cubic < w[0].n_cubic));
    let mut buf = Vec::new();
    write_bounds_csv(&rows, &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("epsilon,n_quad,n_cubic\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn isoperimetric_function_is_convex(r in 0.2f64..2.0, x in 0.0f64..1.0, y in 0.0f64..1.0, t in 0.0f64..1.0) {
        let (a, b) = (x * TAU * r, y * TAU * r);
        let mid = t * a + (1.0 - t) * b;
        let lhs = s_r(mid, r).unwrap();
        let rhs = t * s_r(a, r).unwrap() + (1.0 - t) * s_r(b, r).unwrap();
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn isoperimetric_function_is_superadditive(r in 0.2f64..2.0, parts in prop::collection::vec(0.01f64..1.0, 2..6), fill in 0.0f64..1.0) {
        let total: f64 = parts.iter().sum();
        let scale = fill * TAU * r / total;
        let sum: f64 = parts.iter().map(|p| s_r(p * scale, r).unwrap()).sum();
        prop_assert!(s_r(total * scale, r).unwrap() >= sum - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn small_closed_lifts_obey_the_length_bounds(cr in 0.0f64..FRAC_PI_2, caz in 0.0f64..TAU, r in 0.01f64..0.2) {
        let gamma = closed_cap_loop(&ProjPoint::from_polar(cr, caz), r).unwrap();
        let t = transverse_stats(&gamma, 1e-9).unwrap();
        prop_assert!(t.triangle_holds);
        prop_assert_ne!(t.area_bound_holds, Some(false));
        prop_assert_ne!(t.length_bound_holds, Some(false));
    }
}
