use fracg::*;

fn ball_problem(n: usize, rhs: &str) -> Problem64 {
    Problem64::ball(
        YoungFunction64::parse("power:3").unwrap(),
        OperatorParams64::new(0.5),
        KernelModel::fractional(0.5),
        vec![0.0],
        1.0,
        n,
        Rhs::Nonlinear(Nonlinearity::parse(rhs).unwrap()),
    )
    .unwrap()
}

fn anderson() -> SolverConfig<f64> {
    SolverConfig {
        method: Method::Anderson { depth: 8 },
        ..SolverConfig::default()
    }
}

#[test]
fn zero_rhs_is_a_fixed_point() {
    let p = ball_problem(64, "const:0");
    let s = solve_dirichlet(&p, &SolverConfig::default()).unwrap();
    assert!(s.converged);
    assert_eq!(s.iterations, 1);
    assert!(s.values.iter().all(|&v| v == 0.0));
}

#[test]
fn unit_rhs_gives_positive_even_unimodal_solution() {
    let p = ball_problem(128, "const:1");
    let s = solve_dirichlet(&p, &SolverConfig::default()).unwrap();
    assert!(s.converged, "residual {}", s.final_residual);
    let v = &s.values;
    let m = v.len();
    assert!(v.iter().all(|&x| x > 0.0));
    for k in 0..m / 2 {
        assert!((v[k] - v[m - 1 - k]).abs() < 1e-5 * v[m / 2]);
        assert!(v[k + 1] >= v[k] - 1e-9);
    }
    let peak = v.iter().copied().fold(0.0, f64::max);
    assert_eq!(peak, v[m / 2]);
    // regression value, stable to 1e-6 across N = 128..512
    assert!((v[m / 2] - 0.419132).abs() < 2e-6, "{}", v[m / 2]);
    // exterior is exactly zero
    let g = s.grid();
    for (i, &u) in g.samples().iter().enumerate() {
        if p.mask().binary_search(&i).is_err() {
            assert_eq!(u, 0.0);
        }
    }
    // accepted residuals never increase
    assert!(s.residual_history.windows(2).all(|w| w[1] <= w[0]));
    let (_, sup) = residual(&p, &s.field).unwrap();
    assert!(sup <= s.tol);
}

#[test]
fn asymmetric_start_reaches_the_same_solution() {
    let p = ball_problem(128, "const:1");
    let cfg = anderson();
    let a = solve_dirichlet(&p, &cfg).unwrap();
    let bump = ScalarField::poly_bump(vec![0.3], 0.5);
    let init = a.field.plus_scaled(0.2, &bump).unwrap();
    let b = solve_dirichlet_from(&p, &cfg, Some(&init)).unwrap();
    assert!(b.converged);
    let dev = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(dev < 1e-6, "{dev}");
}

#[test]
fn methods_agree() {
    let p = ball_problem(64, "affine:1,-0.5");
    let a = solve_dirichlet(&p, &SolverConfig::default()).unwrap();
    let b = solve_dirichlet(&p, &anderson()).unwrap();
    assert!(a.converged && b.converged);
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 1e-6);
    }
}

#[test]
fn tiny_iteration_budget_reports_unconverged() {
    let p = ball_problem(32, "const:1");
    let cfg = SolverConfig {
        max_iter: 3,
        ..SolverConfig::default()
    };
    let s = solve_dirichlet(&p, &cfg).unwrap();
    assert!(!s.converged);
    assert_eq!(s.iterations, 3);
}

#[test]
fn refine_study_on_zero_rhs() {
    let p = ball_problem(32, "const:0");
    let r = refine_study(&p, &SolverConfig::default(), 3).unwrap();
    assert!(r.differences.iter().all(|&d| d == 0.0));
    assert_eq!(r.empirical_order, None);
    assert!(r.monotone);
    assert_eq!(r.intervals, vec![32, 64, 128]);
}

#[test]
fn refine_study_converges() {
    let p = ball_problem(32, "const:1");
    let cfg = SolverConfig {
        tol: Some(1e-10),
        ..anderson()
    };
    let r = refine_study(&p, &cfg, 3).unwrap();
    assert!(r.monotone, "{:?}", r.differences);
    assert!(r.empirical_order.unwrap() >= 1.0, "{:?}", r.orders);
}

#[test]
fn invalid_configs_are_rejected() {
    let p = ball_problem(32, "const:1");
    let bad = SolverConfig {
        damping: 1.5,
        ..SolverConfig::default()
    };
    assert!(solve_dirichlet(&p, &bad).is_err());
    assert!(Problem64::ball(
        YoungFunction64::parse("power:3").unwrap(),
        OperatorParams64::new(0.5),
        KernelModel::fractional(0.5),
        vec![0.0, 0.0, 0.0],
        1.0,
        8,
        Rhs::Nonlinear(Nonlinearity::constant(1.0)),
    )
    .is_err());
}
