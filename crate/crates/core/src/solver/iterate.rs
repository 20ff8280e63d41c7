use std::collections::VecDeque;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{residual_with, Method, Problem, Solution, SolverConfig};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::real::Real;

/// Smallest step relative to the initial one before the iteration gives up.
const TAU_FLOOR: f64 = 1e-12;

/// Solves from the zero initial guess.
pub fn solve_dirichlet<T: Real>(problem: &Problem<T>, config: &SolverConfig<T>) -> Result<Solution<T>> {
    solve_dirichlet_from(problem, config, None)
}

/// Pseudo-time iteration `u <- u - tau (L u - f(u))` on the mask with the
/// exterior pinned to zero. A step is accepted only if it does not increase
/// the sup-residual; rejected steps halve `tau`, accepted ones grow it.
pub fn solve_dirichlet_from<T: Real>(
    problem: &Problem<T>,
    config: &SolverConfig<T>,
    init: Option<&ScalarField<T>>,
) -> Result<Solution<T>> {
    config.validate()?;
    let op = problem.operator()?;
    let tol = config.tol.unwrap_or_else(|| problem.default_tol());
    let tau0 = config.tau0.unwrap_or_else(|| problem.default_tau());
    let tau_min = tau0 * T::lit(TAU_FLOOR);
    let mut u: Vec<T> = match init {
        None => vec![T::zero(); problem.mask().len()],
        Some(f) => {
            if f.dim() != problem.grid.dim() {
                return Err(Error::DimensionMismatch {
                    expected: problem.grid.dim(),
                    got: f.dim(),
                });
            }
            problem.mask_nodes().iter().map(|x| f.sample(x)).collect()
        }
    };
    let eval = |v: &[T]| -> Result<(Vec<T>, T)> {
        let field = ScalarField::Grid(Arc::new(problem.field_from_mask(v)?));
        residual_with(problem, &op, &field)
    };

    let (mut r, mut sup) = eval(&u)?;
    if !sup.is_finite() {
        return Err(Error::InvalidField("initial residual is not finite".into()));
    }
    let mut evals = 1;
    let mut rejected = 0;
    let mut res_hist = vec![sup];
    let mut tau_hist = vec![T::zero()];
    let best = sup;
    let mut tau = tau0;
    let depth = match config.method {
        Method::PseudoTime => 0,
        Method::Anderson { depth } => depth,
    };
    let mut dx: VecDeque<Vec<T>> = VecDeque::new();
    let mut dr: VecDeque<Vec<T>> = VecDeque::new();

    while sup > tol && evals < config.max_iter {
        let beta = tau * config.damping;
        let mut cand: Vec<T> = u.iter().zip(&r).map(|(&a, &b)| a - beta * b).collect();
        if !dr.is_empty() {
            let gamma = least_squares(&dr, &r);
            for (j, g) in gamma.iter().enumerate() {
                let g = T::lit(*g);
                for k in 0..cand.len() {
                    cand[k] = cand[k] - g * (dx[j][k] - beta * dr[j][k]);
                }
            }
        }
        let (rc, sc) = eval(&cand)?;
        evals += 1;
        if sc <= sup {
            if depth > 0 {
                dx.push_back(cand.iter().zip(&u).map(|(&a, &b)| a - b).collect());
                dr.push_back(rc.iter().zip(&r).map(|(&a, &b)| a - b).collect());
                if dx.len() > depth {
                    dx.pop_front();
                    dr.pop_front();
                }
            }
            u = cand;
            r = rc;
            sup = sc;
            res_hist.push(sup);
            tau_hist.push(tau);
            tau = tau * config.grow;
        } else {
            rejected += 1;
            if dr.is_empty() {
                tau = tau / T::lit(2.0);
            } else {
                // retry as a plain step before shrinking
                dx.clear();
                dr.clear();
            }
            if tau < tau_min {
                let iteration = evals;
                return Err(if !sc.is_finite() || sc > T::lit(10.0) * best {
                    Error::Diverged {
                        iteration,
                        residual: sc.to_f64_lossy(),
                        best: best.to_f64_lossy(),
                    }
                } else {
                    Error::StalledStep {
                        iteration,
                        tau: tau.to_f64_lossy(),
                    }
                });
            }
        }
    }
    Solution::from_values(problem, u, (res_hist, tau_hist), (evals, rejected), tol)
}

/// `argmin |r - sum gamma_j dr_j|`, by SVD in `f64`.
fn least_squares<T: Real>(dr: &VecDeque<Vec<T>>, r: &[T]) -> Vec<f64> {
    let m = dr.len();
    let n = r.len();
    let a = DMatrix::from_fn(n, m, |i, j| dr[j][i].to_f64_lossy());
    let b = DVector::from_fn(n, |i, _| r[i].to_f64_lossy());
    let svd = a.svd(true, true);
    let cutoff = svd.singular_values.max() * 1e-10;
    match svd.solve(&b, cutoff) {
        Ok(g) => g.iter().copied().collect(),
        Err(_) => vec![0.0; m],
    }
}

/// Successive solves at `h`, `h/2`, ... compared on the coarsest nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport<T> {
    pub intervals: Vec<usize>,
    pub iterations: Vec<usize>,
    pub final_residuals: Vec<T>,
    /// Value at the node nearest the domain's center.
    pub center_values: Vec<T>,
    /// Sup-norm of `u_{k+1} - u_k` on the coarsest mask.
    pub differences: Vec<T>,
    /// `log2(d_k / d_{k+1})`.
    pub orders: Vec<T>,
    pub monotone: bool,
    /// Smallest observed order; `None` with fewer than two nonzero differences.
    pub empirical_order: Option<T>,
}

pub fn refine_study<T: Real>(
    problem: &Problem<T>,
    config: &SolverConfig<T>,
    levels: usize,
) -> Result<ConvergenceReport<T>> {
    if levels < 2 {
        return Err(Error::InvalidProblem("refine_study needs at least two levels".into()));
    }
    let coarse = problem.mask_nodes();
    let center = match &problem.domain {
        super::Domain::Ball { center, .. } => center.clone(),
        super::Domain::Box { lo, hi } => lo.iter().zip(hi).map(|(&a, &b)| (a + b) / T::lit(2.0)).collect(),
    };
    let mut intervals = Vec::new();
    let mut iterations = Vec::new();
    let mut residuals = Vec::new();
    let mut centers = Vec::new();
    let mut on_coarse: Vec<Vec<T>> = Vec::new();
    for level in 0..levels {
        let p = problem.refined(1 << level)?;
        let sol = solve_dirichlet(&p, config)?;
        intervals.push(p.grid.extents[0] - 1);
        iterations.push(sol.iterations);
        residuals.push(sol.final_residual);
        let grid = sol.grid();
        let pick = |x: &[T]| -> T {
            match p.grid.node_index(x) {
                Some(i) => grid.samples()[i],
                None => grid.value(x),
            }
        };
        centers.push(pick(&center));
        on_coarse.push(coarse.iter().map(|x| pick(x)).collect());
    }
    let differences: Vec<T> = on_coarse
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (*a - *b).abs())
                .fold(T::zero(), T::max)
        })
        .collect();
    let orders: Vec<T> = differences
        .windows(2)
        .filter(|w| w[0] > T::zero() && w[1] > T::zero())
        .map(|w| (w[0] / w[1]).log2())
        .collect();
    let monotone = differences.windows(2).all(|w| w[1] < w[0] || w[0] == T::zero());
    let empirical_order = if orders.is_empty() {
        None
    } else {
        Some(orders.iter().copied().fold(T::infinity(), T::min))
    };
    Ok(ConvergenceReport {
        intervals,
        iterations,
        final_residuals: residuals,
        center_values: centers,
        differences,
        orders,
        monotone,
        empirical_order,
    })
}
