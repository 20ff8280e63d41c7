//! Numerical audits of maximum principles, Liouville-type rigidity and
//! symmetry on computed or analytic fields.

mod mp;
mod probes;
mod symmetry;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField};
use crate::operator::FracGOperator;
use crate::real::Real;
use crate::sampling::halton;
use crate::solver::Domain;

pub use mp::{check_antisymmetric_mp, check_max_principle, MPReport};
pub use probes::{
    boundary_estimate_probe, liouville_probe, BoundaryProbeReport, BoundaryVerdict, LiouvilleReport,
    LiouvilleRow, LiouvilleVerdict, ProbeStep,
};
pub use symmetry::{
    default_lambda_grid, detect_center, moving_planes_audit, snap_lambda,
    whole_space_symmetry_probe, RadialityReport, ShellRow, SymmetryReport,
};

/// Default probe count for analytic fields.
pub const DEFAULT_PROBES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfSpace {
    Below,
    Above,
}

/// The hyperplane `{x_axis = lambda}` and the open half-space on one side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionFrame<T> {
    pub axis: usize,
    pub lambda: T,
    pub half_space: HalfSpace,
}

impl<T: Real> ReflectionFrame<T> {
    pub fn new(axis: usize, lambda: T, half_space: HalfSpace, dim: usize) -> Result<Self> {
        if axis >= dim {
            return Err(Error::InvalidParams(format!("axis {axis} out of range for n = {dim}")));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParams("lambda must be finite".into()));
        }
        Ok(Self {
            axis,
            lambda,
            half_space,
        })
    }

    /// `x^lambda`.
    pub fn reflect(&self, x: &[T]) -> Vec<T> {
        let mut y = x.to_vec();
        y[self.axis] = T::lit(2.0) * self.lambda - x[self.axis];
        y
    }

    /// Membership in the open half-space `Sigma_lambda`.
    pub fn in_sigma(&self, x: &[T]) -> bool {
        match self.half_space {
            HalfSpace::Below => x[self.axis] < self.lambda,
            HalfSpace::Above => x[self.axis] > self.lambda,
        }
    }

    pub fn distance_to_plane(&self, x: &[T]) -> T {
        (x[self.axis] - self.lambda).abs()
    }
}

/// `w_lambda(x) = u(x^lambda) - u(x)`.
#[derive(Debug, Clone)]
pub struct AntisymmetricField<T: Real> {
    pub base: ScalarField<T>,
    pub frame: ReflectionFrame<T>,
    reflected: ScalarField<T>,
}

impl<T: Real> AntisymmetricField<T> {
    pub fn new(base: ScalarField<T>, frame: ReflectionFrame<T>) -> Result<Self> {
        let reflected = base.reflect(frame.lambda, frame.axis)?;
        Ok(Self {
            base,
            frame,
            reflected,
        })
    }

    /// `u o reflection`, as a field the operator can evaluate.
    pub fn reflected(&self) -> &ScalarField<T> {
        &self.reflected
    }

    pub fn value(&self, x: &[T]) -> T {
        self.pair(x).0
    }

    /// `(w(x), w(x^lambda))` from the same two samples, so the second is
    /// exactly the negative of the first.
    pub fn pair(&self, x: &[T]) -> (T, T) {
        let a = self.base.sample(x);
        let b = self.base.sample(&self.frame.reflect(x));
        (b - a, a - b)
    }

    /// `L(u o reflection)(x) - L(u)(x)`.
    pub fn operator_difference(&self, op: &FracGOperator<'_, T>, x: &[T]) -> Result<T> {
        Ok(op.eval(&self.reflected, x)?.value - op.eval(&self.base, x)?.value)
    }
}

/// Probe points split by membership in the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSet<T> {
    pub inside: Vec<Vec<T>>,
    pub outside: Vec<Vec<T>>,
}

impl<T: Real> ProbeSet<T> {
    /// Mask nodes inside, every other node outside.
    pub fn from_grid(spec: &GridSpec<T>, mask: &[usize]) -> Self {
        let mut inside = Vec::with_capacity(mask.len());
        let mut outside = Vec::new();
        let mut sorted = mask.to_vec();
        sorted.sort_unstable();
        for i in 0..spec.len() {
            if sorted.binary_search(&i).is_ok() {
                inside.push(spec.node(i));
            } else {
                outside.push(spec.node(i));
            }
        }
        Self { inside, outside }
    }

    /// Halton points in the box of half-width `1.5 r` around the domain.
    pub fn from_domain(domain: &Domain<T>, count: usize) -> Self {
        let (lo, hi): (Vec<T>, Vec<T>) = match domain {
            Domain::Ball { center, radius } => (
                center.iter().map(|&c| c - T::lit(1.5) * *radius).collect(),
                center.iter().map(|&c| c + T::lit(1.5) * *radius).collect(),
            ),
            Domain::Box { lo, hi } => {
                let pad: Vec<T> = lo.iter().zip(hi).map(|(&a, &b)| (b - a) / T::lit(4.0)).collect();
                (
                    lo.iter().zip(&pad).map(|(&a, &p)| a - p).collect(),
                    hi.iter().zip(&pad).map(|(&b, &p)| b + p).collect(),
                )
            }
        };
        let dim = lo.len();
        let mut inside = Vec::new();
        let mut outside = Vec::new();
        for i in 1..=count {
            let h = halton(i, dim);
            let x: Vec<T> = (0..dim).map(|k| lo[k] + (hi[k] - lo[k]) * T::lit(h[k])).collect();
            if domain.contains(&x) {
                inside.push(x);
            } else {
                outside.push(x);
            }
        }
        Self { inside, outside }
    }
}

pub(crate) fn to_f64<T: Real>(x: &[T]) -> Vec<f64> {
    x.iter().map(|v| v.to_f64_lossy()).collect()
}
