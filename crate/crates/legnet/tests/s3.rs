use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI, TAU};

use legnet::s3::*;
use legnet::Tolerances;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn projection_of_axis_points() {
    let inf = hopf_project(&SpherePoint::new(C2::real(1.0, 0.0)).unwrap());
    let zero = hopf_project(&SpherePoint::new(C2::real(0.0, 1.0)).unwrap());
    assert_eq!(inf, ProjPoint::p_inf());
    assert_eq!(zero, ProjPoint::p0());
}

#[test]
fn projection_ignores_fiber_phase() {
    let p = SpherePoint::new(C2::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8))).unwrap();
    let q = p.fiber_rotate(1.234);
    assert!(hopf_project(&p).approx_eq(&hopf_project(&q), 1e-15));
    assert!((hopf_project(&p).rep() - hopf_project(&q).rep()).norm() < 1e-15);
}

#[test]
fn eta_on_coordinate_vectors() {
    let base = SpherePoint::from_coords([1.0, 0.0, 0.0, 0.0]).unwrap();
    let along = TangentS3::new(base, C2::from_coords([0.0, 1.0, 0.0, 0.0])).unwrap();
    let across = TangentS3::new(base, C2::from_coords([0.0, 0.0, 1.0, 0.0])).unwrap();
    assert_eq!(eta(&along), 1.0);
    assert_eq!(eta(&across), 0.0);
    let p = SpherePoint::new(C2::new(C64::new(0.3, -0.4), C64::new(0.5, 0.1))).unwrap();
    assert!(close(eta(&p.fiber_tangent()), 1.0, 1e-15));
}

#[test]
fn fubini_study_distances() {
    assert!(close(fs_distance(&ProjPoint::p0(), &ProjPoint::p_inf()), FRAC_PI_2, 1e-15));
    let p = ProjPoint::from_polar(0.7, 2.0);
    assert_eq!(fs_distance(&p, &p), 0.0);
    // Chordal angle 2·arctan|ζ| on the unit sphere, halved on the sphere of radius 1/2.
    let one = ProjPoint::from_affine(C64::new(1.0, 0.0));
    assert!(close(fs_distance(&ProjPoint::p0(), &one), FRAC_PI_4, 1e-15));
    let z = C64::new(-0.3, 2.2);
    assert!(close(fs_distance(&ProjPoint::p0(), &ProjPoint::from_affine(z)), z.norm().atan(), 1e-15));
}

#[test]
fn cap_formulas() {
    assert_eq!(cap_area(0.0).unwrap(), 0.0);
    assert!(close(cap_area(FRAC_PI_2).unwrap(), PI, 1e-15));
    assert!(close(cap_area(FRAC_PI_4).unwrap(), FRAC_PI_2, 1e-15));
    assert!(close(cap_circumference(FRAC_PI_4).unwrap(), PI, 1e-15));
    assert!(cap_area(-0.1).is_err());
    assert!(cap_area(1.6).is_err());
}

#[test]
fn path_lengths() {
    let fiber = Fiber::full(C2::real(1.0, 0.0)).sample(200, Space::S3);
    assert!(close(path_length(&fiber), TAU, 1e-12));
    let circle = CapCircle::new(&ProjPoint::p0(), FRAC_PI_4).sample(200, Space::P1);
    assert!(close(path_length(&circle), PI, 1e-10));
    assert_eq!(path_length(&SampledPath::constant(Space::S3, C2::real(1.0, 0.0))), 0.0);
}

#[test]
fn fiber_eta_integrals() {
    let fiber = Fiber::full(C2::real(1.0, 0.0)).sample(200, Space::S3);
    assert!(close(eta_integral(&fiber).unwrap(), TAU, 1e-12));
    assert!(close(eta_integral(&fiber.reversed()).unwrap(), -TAU, 1e-12));
    let p1 = CapCircle::new(&ProjPoint::p0(), 0.4).sample(50, Space::P1);
    assert!(eta_integral(&p1).is_err());
}

#[test]
fn lift_of_constant_path_is_constant() {
    let tol = Tolerances::default();
    let path = SampledPath::single(
        Space::P1,
        (0..10).map(|i| Sample { t: i as f64, p: C2::real(1.0, 0.0), v: C2::real(0.0, 0.0) }).collect(),
    )
    .unwrap();
    let lifted = legendrian_lift(&path, &SpherePoint::new(C2::real(1.0, 0.0)).unwrap(), &tol).unwrap();
    for s in lifted.samples() {
        assert!((s.p - C2::real(1.0, 0.0)).norm() < 1e-15);
    }
}

#[test]
fn lift_rejects_start_off_the_fiber() {
    let tol = Tolerances::default();
    let loop_ = CapCircle::new(&ProjPoint::p0(), 0.3).sample(50, Space::P1);
    let wrong = SpherePoint::new(C2::real(0.0, 1.0)).unwrap();
    assert!(matches!(legendrian_lift(&loop_, &wrong, &tol), Err(GeometryError::StartOffFiber { .. })));
}

fn lift_and_gap(r: f64) -> (SampledPath, f64) {
    let tol = Tolerances::default();
    let loop_ = CapCircle::new(&ProjPoint::from_polar(0.9, 1.0), r).sample(400, Space::P1);
    let start = SpherePoint::new(loop_.start().unwrap()).unwrap();
    let lifted = legendrian_lift(&loop_, &start, &tol).unwrap();
    // Phase that carries the lift's endpoint back to the start along the fiber.
    let gap = lifted.end().unwrap().inner(&start.c2()).arg();
    (lifted, gap)
}

#[test]
fn hemisphere_lift_misses_by_half_a_turn() {
    let (lifted, gap) = lift_and_gap(FRAC_PI_4);
    assert!(close(gap.abs(), PI, 1e-8));
    let e = eta_integral(&lifted).unwrap();
    assert!(close(e, 0.0, 1e-8), "{e}");
}

#[test]
fn holonomy_of_caps() {
    let tol = Tolerances::default();
    for (r, expected) in [(FRAC_PI_4, PI), (FRAC_PI_6, FRAC_PI_2)] {
        let loop_ = CapCircle::new(&ProjPoint::p0(), r).sample(400, Space::P1);
        let start = SpherePoint::new(loop_.start().unwrap()).unwrap();
        assert!(close(holonomy(&loop_, &start, &tol).unwrap(), expected, 1e-8));
    }
    let point = SampledPath::single(
        Space::P1,
        (0..5).map(|i| Sample { t: i as f64, p: C2::real(0.6, 0.8), v: C2::real(0.0, 0.0) }).collect(),
    )
    .unwrap();
    let start = SpherePoint::new(C2::real(0.6, 0.8)).unwrap();
    assert_eq!(holonomy(&point, &start, &tol).unwrap(), 0.0);
}

#[test]
fn holonomy_of_whole_sphere_loop_is_a_full_turn() {
    let tol = Tolerances::default();
    let loop_ = CapCircle::new(&ProjPoint::p0(), FRAC_PI_2 - 1e-9).sample(400, Space::P1);
    let start = SpherePoint::new(loop_.start().unwrap()).unwrap();
    let h = holonomy(&loop_, &start, &tol).unwrap();
    assert!(close(h, TAU, 1e-7), "{h}");
}

#[test]
fn holonomy_rejects_open_paths() {
    let tol = Tolerances::default();
    let arc = Latitude { r: 0.5, az0: 0.0, az1: 2.0 }.sample(50, Space::P1);
    let start = SpherePoint::new(arc.start().unwrap()).unwrap();
    assert!(matches!(holonomy(&arc, &start, &tol), Err(GeometryError::NotClosed { .. })));
}

fn arb_sphere_point() -> impl Strategy<Value = SpherePoint> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("away from the origin", |c| c.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|c| SpherePoint::from_coords(c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metric_splits(p in arb_sphere_point(), v in prop::array::uniform4(-2.0f64..2.0)) {
        let t = TangentS3::project(p, C2::from_coords(v));
        let e = eta(&t);
        prop_assert!((t.norm().powi(2) - e * e - t.projected_norm().powi(2)).abs() <= 1e-10);
    }

    #[test]
    fn projection_is_fiber_invariant(p in arb_sphere_point(), theta in 0.0f64..TAU) {
        let a = hopf_project(&p);
        let b = hopf_project(&p.fiber_rotate(theta));
        prop_assert!((a.rep() - b.rep()).norm() <= 1e-14);
    }

    #[test]
    fn polar_round_trip(r in 0.01f64..1.56, az in 0.0f64..TAU) {
        let (r2, az2) = ProjPoint::from_polar(r, az).polar();
        prop_assert!((r - r2).abs() < 1e-13);
        prop_assert!(principal_angle(az - az2).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lifts_are_horizontal_and_project_back(r in 0.05f64..1.2, cr in 0.0f64..1.5, caz in 0.0f64..TAU) {
        let tol = Tolerances::default();
        let base = CapCircle::new(&ProjPoint::from_polar(cr, caz), r).sample(300, Space::P1);
        let start = SpherePoint::new(base.start().unwrap()).unwrap();
        let lifted = legendrian_lift(&base, &start, &tol).unwrap();
        for (a, b) in base.samples().zip(lifted.samples()) {
            prop_assert!(eta_at(&b.p, &b.v).abs() <= 1e-8);
            let back = ProjPoint::from_c2(b.p).unwrap();
            prop_assert!(fs_distance(&back, &ProjPoint::from_c2(a.p).unwrap()) <= 1e-8);
        }
        prop_assert!((path_length(&lifted) - path_length(&base)).abs() <= 1e-7);
        let h = holonomy(&base, &start, &tol).unwrap();
        prop_assert!((h - 2.0 * cap_area(r).unwrap()).abs() <= 1e-7);
    }
}
