use fracg::{
    eval_on_grid, ExteriorModel, FracGOperator, GridField, GridSpec, Isometry, KernelModel,
    KernelShape, OperatorParams, ScalarField, SupportBall, YoungFunction64,
};

fn power3() -> YoungFunction64 {
    YoungFunction64::parse("power:3").unwrap()
}

// reference values from 60-digit adaptive quadrature of the 1D integral
const GAUSSIAN_1D: [(f64, f64, f64); 9] = [
    (0.0, 0.25, 8.069_575_296_679_012),
    (0.0, 0.5, 4.614_780_266_318_053),
    (0.0, 0.75, 4.207_870_475_251_172),
    (0.3, 0.25, 6.943_516_278_884_774),
    (0.3, 0.5, 4.600_987_558_683_673_5),
    (0.3, 0.75, 6.489_155_694_229_695),
    (1.0, 0.25, -0.355_111_532_837_408_8),
    (1.0, 0.5, -1.340_716_093_880_612),
    (1.0, 0.75, -3.348_115_962_763_977_4),
];

#[test]
fn gaussian_matches_reference_1d() {
    let y = power3();
    let u = ScalarField::gaussian(vec![0.0], 1.0, 1.0);
    for (x, s, want) in GAUSSIAN_1D {
        let op = FracGOperator::fractional(&y, OperatorParams::new(s)).unwrap();
        let got = op.eval(&u, &[x]).unwrap();
        let rel = (got.value - want).abs() / want.abs();
        assert!(rel < 2e-5, "x={x} s={s}: {} vs {want} (rel {rel:e})", got.value);
    }
}

#[test]
fn constants_vanish() {
    let y = power3();
    for n in 1..=3 {
        for s in [0.2, 0.5, 0.9] {
            let op = FracGOperator::fractional(&y, OperatorParams::new(s)).unwrap();
            let u = ScalarField::constant(n, -4.0);
            let v = op.eval(&u, &vec![0.1; n]).unwrap();
            assert!(v.value.abs() <= 1e-10 * (1.0 + y.gprime(1.0)));
        }
    }
}

#[test]
fn sign_at_extrema() {
    let y = power3();
    let op = FracGOperator::fractional(&y, OperatorParams::new(0.5)).unwrap();
    for n in 1..=2 {
        let c = vec![0.0; n];
        let max = ScalarField::gaussian(c.clone(), 1.0, 0.7);
        let min = ScalarField::gaussian(c.clone(), -1.0, 0.7);
        assert!(op.eval(&max, &c).unwrap().value > 0.0);
        assert!(op.eval(&min, &c).unwrap().value < 0.0);
    }
}

#[test]
fn odd_symmetry() {
    let y = power3();
    let op = FracGOperator::fractional(&y, OperatorParams::new(0.4)).unwrap();
    let u = ScalarField::gaussian(vec![0.2, -0.1], 1.3, 0.8);
    let neg = ScalarField::gaussian(vec![0.2, -0.1], -1.3, 0.8);
    let x = [0.5, 0.3];
    let a = op.eval(&u, &x).unwrap().value;
    let b = op.eval(&neg, &x).unwrap().value;
    assert!((a + b).abs() <= 1e-12 * a.abs());
}

#[test]
fn rotation_invariance_2d() {
    let y = power3();
    let op = FracGOperator::fractional(&y, OperatorParams::new(0.5)).unwrap();
    let u = ScalarField::gaussian(vec![0.3, 0.0], 1.0, 1.0);
    let x = [0.1, 0.4];
    let base = op.eval(&u, &x).unwrap().value;
    for theta in [0.3, 1.1, 2.5] {
        let iso = Isometry::rotation_2d(theta);
        let ur = u.compose(iso.clone()).unwrap();
        // (u o R)(R^T x) = u(x)
        let xr = iso.transpose_apply(&x);
        let v = op.eval(&ur, &xr).unwrap().value;
        assert!((v - base).abs() <= 2e-5 * base.abs(), "{theta}: {v} vs {base}");
    }
}

#[test]
fn radial_input_gives_radial_output() {
    let y = power3();
    let op = FracGOperator::fractional(&y, OperatorParams::new(0.5)).unwrap();
    let u = ScalarField::gaussian(vec![0.0, 0.0, 0.0], 1.0, 1.0);
    let a = op.eval(&u, &[0.6, 0.0, 0.0]).unwrap().value;
    let b = op.eval(&u, &[0.0, 0.36, 0.48]).unwrap().value;
    assert!((a - b).abs() <= 2e-5 * a.abs(), "{a} vs {b}");
}

#[test]
fn two_dimensional_radial_consistency() {
    // in 2D a radial field sampled along different angles gives equal values
    let y = YoungFunction64::parse("double_phase:3,4").unwrap();
    let op = FracGOperator::fractional(&y, OperatorParams::new(0.3)).unwrap();
    let u = ScalarField::bump(vec![0.0, 0.0], 1.0);
    let a = op.eval(&u, &[0.5, 0.0]).unwrap().value;
    let b = op.eval(&u, &[0.3, 0.4]).unwrap().value;
    assert!((a - b).abs() <= 1e-5 * a.abs(), "{a} vs {b}");
}

#[test]
fn quadrature_refinement_converges() {
    let y = power3();
    let u = ScalarField::gaussian(vec![0.0, 0.0], 1.0, 1.0);
    let x = [0.4, 0.2];
    let mut p = OperatorParams::new(0.5);
    let coarse = FracGOperator::fractional(&y, p.clone()).unwrap().eval(&u, &x).unwrap().value;
    p.quad_near = 16;
    p.quad_far = 16;
    p.angular = 64;
    let fine = FracGOperator::fractional(&y, p).unwrap().eval(&u, &x).unwrap().value;
    assert!((coarse - fine).abs() <= 2e-5 * fine.abs(), "{coarse} vs {fine}");
}

#[test]
fn scaled_kernel_scales_value() {
    // k = c t^s with power(p) multiplies the operator by c^{-p}
    let y = power3();
    let u = ScalarField::gaussian(vec![0.0], 1.0, 1.0);
    let p = OperatorParams::new(0.5);
    let base = FracGOperator::fractional(&y, p.clone()).unwrap().eval(&u, &[0.3]).unwrap().value;
    let k = KernelModel::scaled(0.5, 2.0).unwrap();
    let v = FracGOperator::new(&y, p.clone(), k).unwrap().eval(&u, &[0.3]).unwrap().value;
    assert!((v - base / 8.0).abs() <= 1e-9 * base.abs());
    let osc = KernelModel::new(KernelShape::LogOscillating { lo: 0.5, hi: 2.0 }, 0.5).unwrap();
    let w = FracGOperator::new(&y, p, osc).unwrap().eval(&u, &[0.3]).unwrap().value;
    assert!(w.is_finite() && w > 0.0);
}

#[test]
fn grid_field_agrees_with_analytic_source() {
    let y = power3();
    let op = FracGOperator::fractional(&y, OperatorParams::new(0.5)).unwrap();
    let spec = GridSpec::centered(&[0.0], 6.0, 1200).unwrap();
    let samples: Vec<f64> = (0..spec.len())
        .map(|i| {
            let x: f64 = spec.node(i)[0];
            (-x * x).exp()
        })
        .collect();
    // exp(-36) is below round-off, so a zero exterior is exact enough
    let g = GridField::new(spec, samples, ExteriorModel::Zero, None).unwrap();
    let u: ScalarField<f64> = g.into();
    let i = u.as_grid().unwrap().spec().node_index(&[0.3]).unwrap();
    let v = eval_on_grid(&op, &u, &[i]).unwrap().into_values().unwrap()[0];
    assert!((v - 4.600_987_558_683_673_5).abs() < 1e-4 * 4.6, "{v}");
}

#[test]
fn weighted_grid_field_is_symmetric() {
    let y = power3();
    let op = FracGOperator::fractional(&y, OperatorParams::new(0.5)).unwrap();
    let spec = GridSpec::centered(&[0.0], 1.25, 100).unwrap();
    let ball = SupportBall::new(vec![0.0], 1.0, 0.5).unwrap();
    let samples: Vec<f64> = (0..spec.len()).map(|i| ball.weight(&spec.node(i))).collect();
    let u: ScalarField<f64> = GridField::new(spec.clone(), samples, ExteriorModel::Zero, Some(ball))
        .unwrap()
        .into();
    let mask: Vec<usize> = (0..spec.len()).filter(|&i| spec.node(i)[0].abs() < 0.99).collect();
    let ev = eval_on_grid(&op, &u, &mask).unwrap();
    assert!(ev.failures.is_empty());
    let vals = ev.values;
    let m = vals.len();
    for k in 0..m / 2 {
        let (a, b) = (vals[k], vals[m - 1 - k]);
        assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{k}: {a} vs {b}");
    }
    // the torsion-like profile has a positive operator value at the center
    assert!(vals[m / 2] > 0.0);
}

#[test]
fn evaluation_is_deterministic() {
    let y = power3();
    let op = FracGOperator::fractional(&y, OperatorParams::new(0.5)).unwrap();
    let spec = GridSpec::centered(&[0.0, 0.0], 1.25, 16).unwrap();
    let ball = SupportBall::new(vec![0.0, 0.0], 1.0, 0.0).unwrap();
    let samples: Vec<f64> = (0..spec.len())
        .map(|i| {
            let x: Vec<f64> = spec.node(i);
            let r2 = x[0] * x[0] + x[1] * x[1];
            if r2 < 1.0 { (1.0 - r2).powi(2) } else { 0.0 }
        })
        .collect();
    let u: ScalarField<f64> = GridField::new(spec.clone(), samples, ExteriorModel::Zero, Some(ball))
        .unwrap()
        .into();
    let mask: Vec<usize> = (0..spec.len()).collect();
    let a = eval_on_grid(&op, &u, &mask).unwrap();
    let b = eval_on_grid(&op, &u, &mask).unwrap();
    assert_eq!(a.failures.len(), b.failures.len());
    for (p, q) in a.values.iter().zip(&b.values) {
        assert!(p.to_bits() == q.to_bits() || (p.is_nan() && q.is_nan()));
    }
}
