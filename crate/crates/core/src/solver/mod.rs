//! Dirichlet problems `(-Delta_g)^s u = f(u)` in a domain, `u = 0` outside.

mod iterate;
mod nonlinearity;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ExteriorModel, GridField, GridSpec, ScalarField, SupportBall};
use crate::operator::{eval_on_grid, FracGOperator, KernelModel, OperatorParams};
use crate::real::{dist, Real};
use crate::young::YoungFunction;

pub use iterate::{refine_study, solve_dirichlet, solve_dirichlet_from, ConvergenceReport};
pub use nonlinearity::{Nonlinearity, NonlinearityKind, FLAG_RANGE};

/// Grid margin around a ball domain, as a multiple of its radius.
pub const BALL_MARGIN: f64 = 1.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Domain<T> {
    Ball { center: Vec<T>, radius: T },
    Box { lo: Vec<T>, hi: Vec<T> },
}

impl<T: Real> Domain<T> {
    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { center, .. } => center.len(),
            Self::Box { lo, .. } => lo.len(),
        }
    }

    /// Open domain membership.
    pub fn contains(&self, x: &[T]) -> bool {
        match self {
            Self::Ball { center, radius } => dist(x, center) < *radius,
            Self::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&v, (&a, &b))| v > a && v < b),
        }
    }
}

/// Right-hand side: a nonlinearity `f(u)` or a fixed source `f(x)`.
#[derive(Debug, Clone)]
pub enum Rhs<T: Real> {
    Nonlinear(Nonlinearity<T>),
    Source(ScalarField<T>),
}

impl<T: Real> Rhs<T> {
    pub fn at(&self, x: &[T], u: T) -> T {
        match self {
            Rhs::Nonlinear(f) => f.f(u),
            Rhs::Source(s) => s.sample(x),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Rhs::Nonlinear(f) => f.describe(),
            Rhs::Source(s) => format!("source {}", s.label()),
        }
    }

    /// `max |f|` at `u` in `{0, 1}`, or over the source at the given nodes.
    fn scale(&self, nodes: &[Vec<T>]) -> T {
        match self {
            Rhs::Nonlinear(f) => f.f(T::zero()).abs().max(f.f(T::one()).abs()),
            Rhs::Source(s) => nodes
                .iter()
                .map(|x| s.sample(x).abs())
                .fold(T::zero(), T::max),
        }
    }
}

/// A discretized Dirichlet problem.
#[derive(Debug, Clone)]
pub struct Problem<T: Real> {
    pub young: YoungFunction<T>,
    pub params: OperatorParams<T>,
    pub kernel: KernelModel<T>,
    pub grid: GridSpec<T>,
    pub domain: Domain<T>,
    pub rhs: Rhs<T>,
    mask: Vec<usize>,
    support: Option<SupportBall<T>>,
}

impl<T: Real> Problem<T> {
    /// Grid with `intervals` cells per axis on the cube of half-width
    /// `BALL_MARGIN * radius` around the ball.
    pub fn ball(
        young: YoungFunction<T>,
        params: OperatorParams<T>,
        kernel: KernelModel<T>,
        center: Vec<T>,
        radius: T,
        intervals: usize,
        rhs: Rhs<T>,
    ) -> Result<Self> {
        if !(radius > T::zero() && radius.is_finite()) {
            return Err(Error::InvalidProblem("radius must be positive".into()));
        }
        let grid = GridSpec::centered(&center, T::lit(BALL_MARGIN) * radius, intervals)?;
        Self::new(young, params, kernel, grid, Domain::Ball { center, radius }, rhs)
    }

    pub fn new(
        young: YoungFunction<T>,
        params: OperatorParams<T>,
        kernel: KernelModel<T>,
        grid: GridSpec<T>,
        domain: Domain<T>,
        rhs: Rhs<T>,
    ) -> Result<Self> {
        params.validate()?;
        let n = grid.dim();
        if domain.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: domain.dim(),
            });
        }
        if n > 2 {
            return Err(Error::InvalidProblem("solves are limited to n <= 2".into()));
        }
        if let Rhs::Source(s) = &rhs {
            if s.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: s.dim(),
                });
            }
        }
        let h = grid.spacing;
        let tiny = T::lit(1e-9) * h;
        let mut mask = Vec::new();
        for i in 0..grid.len() {
            let x = grid.node(i);
            if !domain.contains(&x) {
                continue;
            }
            // nodes on the boundary up to round-off belong to the exterior
            let inside = match &domain {
                Domain::Ball { center, radius } => *radius - dist(&x, center) > tiny,
                Domain::Box { lo, hi } => x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(&v, (&a, &b))| v - a > tiny && b - v > tiny),
            };
            if inside {
                if grid.inner_margin(&x) < T::lit(3.0) * h {
                    return Err(Error::InvalidProblem(
                        "domain must lie strictly inside the grid (three cells of margin)".into(),
                    ));
                }
                mask.push(i);
            }
        }
        if mask.is_empty() {
            return Err(Error::EmptyMask);
        }
        let support = match &domain {
            // boundary behaviour d^s is built into the 1D interpolant
            Domain::Ball { center, radius } => {
                let exponent = if n == 1 { params.s } else { T::zero() };
                Some(SupportBall::new(center.clone(), *radius, exponent)?)
            }
            Domain::Box { .. } => None,
        };
        Ok(Self {
            young,
            params,
            kernel,
            grid,
            domain,
            rhs,
            mask,
            support,
        })
    }

    pub fn mask(&self) -> &[usize] {
        &self.mask
    }

    pub fn support(&self) -> Option<&SupportBall<T>> {
        self.support.as_ref()
    }

    /// Same problem on a grid with `factor` times as many cells per axis.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let extents: Vec<usize> = self.grid.extents.iter().map(|e| (e - 1) * factor + 1).collect();
        let grid = GridSpec::new(
            self.grid.origin.clone(),
            self.grid.spacing / T::from_usize_lossy(factor),
            extents,
        )?;
        Self::new(
            self.young.clone(),
            self.params.clone(),
            self.kernel,
            grid,
            self.domain.clone(),
            self.rhs.clone(),
        )
    }

    /// Field with the given values on the mask and zero elsewhere.
    pub fn field_from_mask(&self, values: &[T]) -> Result<GridField<T>> {
        if values.len() != self.mask.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mask.len(),
                got: values.len(),
            });
        }
        let mut samples = vec![T::zero(); self.grid.len()];
        for (&i, &v) in self.mask.iter().zip(values) {
            samples[i] = v;
        }
        GridField::new(self.grid.clone(), samples, ExteriorModel::Zero, self.support.clone())
    }

    pub fn mask_nodes(&self) -> Vec<Vec<T>> {
        self.mask.iter().map(|&i| self.grid.node(i)).collect()
    }

    /// `1e-6 (1 + max |f|)`.
    pub fn default_tol(&self) -> T {
        T::lit(1e-6) * (T::one() + self.rhs.scale(&self.mask_nodes()))
    }

    /// `0.1 / g'(1 + max |f|)`.
    pub fn default_tau(&self) -> T {
        T::lit(0.1) / self.young.gprime(T::one() + self.rhs.scale(&self.mask_nodes()))
    }

    pub(crate) fn operator(&self) -> Result<FracGOperator<'_, T>> {
        FracGOperator::new(&self.young, self.params.clone(), self.kernel)
    }
}

/// Residual `L u - f(u)` on the mask and its sup-norm.
pub fn residual<T: Real>(problem: &Problem<T>, candidate: &ScalarField<T>) -> Result<(Vec<T>, T)> {
    let outside_tol = T::lit(1e-12);
    for i in 0..problem.grid.len() {
        if problem.mask.binary_search(&i).is_err() {
            let x = problem.grid.node(i);
            let v = candidate.sample(&x);
            if v.abs() > outside_tol {
                return Err(Error::InvalidField(format!(
                    "candidate is {v} outside the domain at {:?}",
                    x.iter().map(|c| c.to_f64_lossy()).collect::<Vec<_>>()
                )));
            }
        }
    }
    let op = problem.operator()?;
    residual_with(problem, &op, candidate)
}

pub(crate) fn residual_with<T: Real>(
    problem: &Problem<T>,
    op: &FracGOperator<'_, T>,
    candidate: &ScalarField<T>,
) -> Result<(Vec<T>, T)> {
    let values = if candidate.as_grid().is_some() {
        eval_on_grid(op, candidate, &problem.mask)?.into_values()?
    } else {
        crate::operator::eval_at_points(op, candidate, &problem.mask_nodes()).into_values()?
    };
    let mut sup = T::zero();
    let r: Vec<T> = problem
        .mask
        .iter()
        .zip(values)
        .map(|(&i, lu)| {
            let x = problem.grid.node(i);
            let v = lu - problem.rhs.at(&x, candidate.sample(&x));
            sup = sup.max(v.abs());
            v
        })
        .collect();
    if !sup.is_finite() || r.iter().any(|v| !v.is_finite()) {
        sup = T::infinity();
    }
    Ok((r, sup))
}

/// How the pseudo-time iteration combines past steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    /// `u <- u - tau R(u)`.
    PseudoTime,
    /// Pseudo-time steps mixed over the last `depth` iterates.
    Anderson { depth: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig<T> {
    /// `None` uses `Problem::default_tol`.
    pub tol: Option<T>,
    /// Residual evaluations allowed, counting rejected steps.
    pub max_iter: usize,
    /// `None` uses `Problem::default_tau`.
    pub tau0: Option<T>,
    /// Multiplies every step.
    pub damping: T,
    /// Step growth after an accepted step.
    pub grow: T,
    pub method: Method,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            tol: None,
            max_iter: 5000,
            tau0: None,
            damping: T::one(),
            grow: T::lit(1.1),
            method: Method::PseudoTime,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidProblem(m.into()));
        if let Some(t) = self.tol {
            if !(t > T::zero()) {
                return bad("tol must be positive");
            }
        }
        if let Some(t) = self.tau0 {
            if !(t > T::zero() && t.is_finite()) {
                return bad("tau0 must be positive");
            }
        }
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return bad("damping must lie in (0,1]");
        }
        if !(self.grow >= T::one()) {
            return bad("grow must be at least 1");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive");
        }
        if let Method::Anderson { depth } = self.method {
            if depth == 0 {
                return bad("Anderson depth must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Solution<T: Real> {
    pub field: ScalarField<T>,
    /// Values on the problem mask.
    pub values: Vec<T>,
    /// Sup-residual after every accepted step, starting with the initial guess.
    pub residual_history: Vec<T>,
    /// Step size used for every accepted step (0 for the initial guess).
    pub tau_history: Vec<T>,
    /// Residual evaluations, rejected steps included.
    pub iterations: usize,
    pub rejected: usize,
    pub converged: bool,
    pub final_residual: T,
    pub tol: T,
}

impl<T: Real> Solution<T> {
    pub fn grid(&self) -> &GridField<T> {
        self.field.as_grid().expect("solutions are grid fields")
    }

    pub(crate) fn from_values(
        problem: &Problem<T>,
        values: Vec<T>,
        history: (Vec<T>, Vec<T>),
        counts: (usize, usize),
        tol: T,
    ) -> Result<Self> {
        let grid = problem.field_from_mask(&values)?;
        let final_residual = *history.0.last().expect("history starts with the initial guess");
        Ok(Self {
            field: ScalarField::Grid(Arc::new(grid)),
            values,
            residual_history: history.0,
            tau_history: history.1,
            iterations: counts.0,
            rejected: counts.1,
            converged: final_residual <= tol,
            final_residual,
            tol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(n: usize, rhs: &str) -> Problem<f64> {
        Problem::ball(
            YoungFunction::parse("power:3").unwrap(),
            OperatorParams::new(0.5),
            KernelModel::fractional(0.5),
            vec![0.0],
            1.0,
            n,
            Rhs::Nonlinear(Nonlinearity::parse(rhs).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn mask_is_the_open_ball() {
        let p = problem(40, "const:1");
        // nodes at -1.25 + k/16; |x| < 1 gives k in 5..=35
        assert_eq!(p.mask().len(), 31);
        let r = p.refined(2).unwrap();
        assert_eq!(r.mask().len(), 63);
        assert_eq!(r.grid.spacing, p.grid.spacing / 2.0);
    }

    #[test]
    fn residual_of_zero() {
        let p = problem(40, "const:1");
        let u = ScalarField::Grid(Arc::new(p.field_from_mask(&vec![0.0; p.mask().len()]).unwrap()));
        let (r, sup) = residual(&p, &u).unwrap();
        assert!(r.iter().all(|&v| v == -1.0));
        assert_eq!(sup, 1.0);
        let q = problem(40, "const:0");
        assert_eq!(residual(&q, &u).unwrap().1, 0.0);
    }

    #[test]
    fn residual_rejects_nonzero_exterior() {
        let p = problem(40, "const:1");
        let u = ScalarField::constant(1, 1.0);
        assert!(residual(&p, &u).is_err());
    }
}
