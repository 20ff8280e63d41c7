use fracg::field::io;
use fracg::*;
use proptest::prelude::*;

fn grid_of(f: impl Fn(&[f64]) -> f64, spec: GridSpec<f64>, ext: ExteriorModel<f64>) -> GridField64 {
    let s = (0..spec.len()).map(|i| f(&spec.node(i))).collect();
    GridField::new(spec, s, ext, None).unwrap()
}

#[test]
fn constant_grid_and_exterior() {
    let spec = GridSpec::centered(&[0.0, 0.0], 1.0, 10).unwrap();
    let one = grid_of(|_| 1.0, spec.clone(), ExteriorModel::PowerDecay { c: 1.0, beta: 0.0 });
    for x in [[0.0, 0.0], [0.33, -0.71], [0.99, 0.99]] {
        assert!((one.value(&x) - 1.0).abs() < 1e-14);
    }
    let z = grid_of(|_| 1.0, spec, ExteriorModel::Zero);
    assert_eq!(z.value(&[3.0, 0.0]), 0.0);
}

#[test]
fn analytic_values() {
    let g = ScalarField::gaussian(vec![0.0, 0.0], 1.0, 1.0);
    assert_eq!(g.sample(&[0.0, 0.0]), 1.0);
    let c = ScalarField::constant(3, 2.5);
    assert_eq!(c.sample(&[9.0, -1.0, 4.0]), 2.5);
}

#[test]
fn reflection_examples() {
    let even = ScalarField::gaussian(vec![0.0, 0.0], 1.0, 0.7);
    let r = even.reflect(0.0, 1).unwrap();
    for x in [[0.2, 0.4], [-1.0, -0.3]] {
        assert_eq!(r.sample(&x), even.sample(&x));
    }
    let xn = ScalarField::coordinate(2, 1);
    assert_eq!(xn.reflect(0.0, 1).unwrap().sample(&[0.3, 0.8]), -0.8);
    assert_eq!(xn.reflect(1.0, 1).unwrap().sample(&[0.0, 0.5]), 1.5);
    // reflecting twice is the identity
    let back = xn.reflect(1.0, 1).unwrap().reflect(1.0, 1).unwrap();
    assert_eq!(back.sample(&[0.1, 0.2]), 0.2);
}

#[test]
fn interpolation_accuracy_improves() {
    let f = |x: &[f64]| (-x[0] * x[0]).exp();
    let mut errs = Vec::new();
    for n in [20, 40, 80] {
        let spec = GridSpec::centered(&[0.0], 3.0, n).unwrap();
        let u = grid_of(f, spec, ExteriorModel::Zero);
        let e = (0..200)
            .map(|i| -2.5 + 5.0 * i as f64 / 199.0)
            .map(|x| (u.value(&[x]) - f(&[x])).abs())
            .fold(0.0, f64::max);
        errs.push(e);
    }
    assert!(errs[1] < errs[0] / 4.0 && errs[2] < errs[1] / 4.0, "{errs:?}");
}

#[test]
fn tail_membership() {
    let y = YoungFunction64::parse("power:3").unwrap();
    let bump = ScalarField::bump(vec![0.0], 1.0);
    let r = check_tail_membership(&bump, &y, 0.5, 10.0, 400).unwrap();
    assert!(r.in_l_g && r.in_l_gprime);
    let spec = GridSpec::centered(&[0.0], 2.0, 20).unwrap();
    let bounded = grid_of(|_| 1.0, spec, ExteriorModel::PowerDecay { c: 1.0, beta: 0.0 });
    for yy in ["power:3", "double_phase:3,4", "power_log:3"] {
        let yf = YoungFunction64::parse(yy).unwrap();
        let r = check_tail_membership(&bounded.clone().into(), &yf, 0.5, 10.0, 400).unwrap();
        assert!(r.in_l_g, "{yy}");
        assert!(r.in_l_gprime, "{yy}");
    }
    assert!(check_tail_membership(&bump, &y, 1.5, 10.0, 400).is_err());
}

#[test]
fn file_round_trip() {
    let spec = GridSpec::centered(&[0.5, -0.5], 1.0, 8).unwrap();
    let u = grid_of(|x| x[0] * x[1], spec, ExteriorModel::PowerDecay { c: 0.3, beta: 1.5 });
    let dir = std::env::temp_dir().join(format!("fracg-field-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for name in ["u.field", "u.csv"] {
        let p = dir.join(name);
        io::save(&u, &p).unwrap();
        let v: GridField64 = io::load(&p).unwrap();
        assert_eq!(v.samples(), u.samples());
        assert_eq!(v.spec(), u.spec());
        assert_eq!(v.exterior(), u.exterior());
    }
    std::fs::remove_dir_all(&dir).ok();
    assert!(io::from_bytes::<f64>(b"garbage").is_err());
}

#[test]
fn invalid_grids_rejected() {
    assert!(GridSpec::<f64>::centered(&[0.0], 1.0, 2).is_err());
    assert!(GridSpec::<f64>::centered(&[0.0, 0.0, 0.0], 1.0, 8).is_err());
    let spec = GridSpec::centered(&[0.0], 1.0, 8).unwrap();
    assert!(GridField::new(spec.clone(), vec![0.0; 3], ExteriorModel::Zero, None).is_err());
    let mut s = vec![0.0; spec.len()];
    s[2] = f64::NAN;
    assert!(GridField::new(spec, s, ExteriorModel::Zero, None).is_err());
}

proptest! {
    #[test]
    fn grid_reproduces_samples_at_nodes(vals in prop::collection::vec(-5.0f64..5.0, 9)) {
        let spec = GridSpec::centered(&[0.0], 1.0, 8).unwrap();
        let u = GridField::new(spec.clone(), vals.clone(), ExteriorModel::Zero, None).unwrap();
        for (i, v) in vals.iter().enumerate() {
            prop_assert!((u.value(&spec.node(i)) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn holder_quotient_antisymmetric(a in -3.0f64..3.0, b in -3.0f64..3.0, s in 0.1f64..0.9) {
        prop_assume!((a - b).abs() > 1e-6);
        let u = ScalarField::gaussian(vec![0.3], 1.0, 0.8);
        let p = holder_quotient(&u, &[a], &[b], s).unwrap();
        let q = holder_quotient(&u, &[b], &[a], s).unwrap();
        prop_assert!((p + q).abs() <= 1e-15 * (1.0 + p.abs()));
    }
}
