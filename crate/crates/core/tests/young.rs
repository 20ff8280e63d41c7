use fracg::young::{mean_value_point, MeanValuePoint, ESTIMATE_T_MAX, ESTIMATE_T_MIN};
use fracg::*;
use proptest::prelude::*;

fn y(spec: &str) -> YoungFunction64 {
    YoungFunction64::parse(spec).unwrap()
}

#[test]
fn power_three_closed_form() {
    let p = make_builtin(FamilyKind::Power, &[3.0]).unwrap();
    assert_eq!(p.g(2.0), 12.0);
    assert_eq!(p.g(-2.0), -12.0);
    assert_eq!(p.gprime(2.0), 12.0);
    assert_eq!((p.p_minus, p.p_plus), (3.0, 3.0));
}

#[test]
fn double_phase_indices() {
    let d: YoungFunction64 = make_builtin(FamilyKind::DoublePhase, &[3.0, 4.0]).unwrap();
    assert!((d.p_minus - 3.0).abs() < 1e-9 && (d.p_plus - 4.0).abs() < 1e-9);
    // t g'(t) / g(t) = (6 + 12 t) / (3 + 4 t) at t = 1
    let r: f64 = d.gprime(1.0) / d.g(1.0);
    assert!((r - 18.0 / 7.0).abs() < 1e-12);
}

#[test]
fn invalid_exponents_rejected() {
    assert!(matches!(
        make_builtin(FamilyKind::Power, &[2.0]),
        Err(Error::InvalidExponents { .. })
    ));
    assert!(make_builtin(FamilyKind::DoublePhase, &[4.0, 3.0]).is_err());
    assert!(make_builtin(FamilyKind::Power, &[f64::NAN]).is_err());
    assert!(YoungFunction64::parse("cubic:3").is_err());
}

#[test]
fn estimated_indices() {
    let p = y("power:3");
    let (a, b) = estimate_indices(&p.family, 1e-6, 1e6, 2000).unwrap();
    assert!((a - 3.0).abs() < 1e-9 && (b - 3.0).abs() < 1e-9);
    let d = y("double_phase:3,4");
    let (a, b) = estimate_indices(&d.family, 1e-6, 1e6, 2000).unwrap();
    assert!((a - 3.0).abs() < 1e-4 && (b - 4.0).abs() < 1e-4, "{a} {b}");
    let l = y("power_log:3");
    let (a, b) = estimate_indices(&l.family, ESTIMATE_T_MIN, ESTIMATE_T_MAX, 4000).unwrap();
    assert!(3.0 <= a && a <= b && b <= 4.0 + 1e-3, "{a} {b}");
    assert!(estimate_indices(&p.family, 1.0, 0.5, 200).is_err());
}

#[test]
fn mean_value_point_closed_form() {
    let p = y("power:3");
    match mean_value_point(&p, -1.0, 1.0) {
        // 6 xi = (g(1) - g(-1)) / 2 = 3
        MeanValuePoint::Found(xi) => assert!((xi - 0.5f64).abs() < 1e-10),
        other => panic!("{other:?}"),
    }
    match mean_value_point(&p, 1.0, 1.001) {
        MeanValuePoint::Found(xi) => assert!(xi > 1.0 && xi < 1.001),
        other => panic!("{other:?}"),
    }
}

#[test]
fn certifiers_report_no_violations() {
    for spec in ["power:3", "double_phase:3,4", "power_log:3"] {
        let yf = y(spec);
        for r in certify_all(&yf, 20_000, 11, SampleRange::default()) {
            assert!(r.passed(), "{spec}: {r:?}");
            assert_eq!(r.n_samples, 20_000);
        }
    }
}

#[test]
fn certifiers_are_seeded() {
    let yf = y("double_phase:3,4");
    let a = certify_lemma22(&yf, 1000, 5, SampleRange::symmetric(10.0));
    let b = certify_lemma22(&yf, 1000, 5, SampleRange::symmetric(10.0));
    assert_eq!(a, b);
    let c = certify_lemma22(&yf, 1000, 6, SampleRange::symmetric(10.0));
    assert_ne!(a.worst_sample, c.worst_sample);
}

#[test]
fn f32_instantiation() {
    let p = YoungFunction32::parse("power:3").unwrap();
    assert_eq!(p.g(2.0f32), 12.0);
    let r = certify_lemita(&p, 2000, 1, SampleRange::symmetric(10.0));
    assert!(r.passed(), "{r:?}");
}

proptest! {
    #[test]
    fn g_is_odd_and_monotone(t in -1e3f64..1e3, dt in 0.0f64..10.0) {
        for spec in ["power:3", "double_phase:3,4", "power_log:3"] {
            let yf = y(spec);
            prop_assert_eq!(yf.g(-t), -yf.g(t));
            prop_assert!(yf.g(t + dt) >= yf.g(t));
            prop_assert!(yf.gprime(t) >= 0.0);
        }
    }

    #[test]
    fn scaling_identity_at_alpha_one(t in 1e-3f64..1e3) {
        let yf = y("double_phase:3,4");
        let (small, big) = fracg::young::scaling_margins(&yf, 1.0, t);
        prop_assert_eq!(small, 0.0);
        prop_assert!(big >= 0.0);
    }
}
