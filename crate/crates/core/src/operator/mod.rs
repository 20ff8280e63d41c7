//! Pointwise evaluation of the fractional g-Laplacian
//! `p.v. int g((u(x) - u(y)) / k(|x-y|)) dy / (k(|x-y|) |x-y|^n)`,
//! with `k(t) = t^s` by default.

mod eval;
mod perturb;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::real::{dist, Real};

pub use eval::{eval_at_points, eval_fracg, eval_on_grid, FracGOperator, GridEvaluation};
pub use perturb::{perturbation_gap, PerturbationGap};

/// What to do with the integral beyond `r_far`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// Bound it from the field's tail profile; unbounded tails are errors.
    AnalyticBound,
    /// Report the bound (possibly infinite) without failing.
    Ignore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams<T> {
    pub s: T,
    /// Radius of the paired near-field ball; `None` picks `min(1, box/4)` for
    /// grid fields and 1 otherwise.
    pub delta_near: Option<T>,
    /// Truncation radius; `None` grows it until the tail bound is below
    /// `tail_rel_tol` of the computed value.
    pub r_far: Option<T>,
    /// Gauss-Legendre points per radial panel inside the near ball.
    pub quad_near: usize,
    /// Gauss-Legendre points per radial panel outside it.
    pub quad_far: usize,
    /// Azimuthal directions on the full circle (dimensions 2 and 3).
    pub angular: usize,
    pub tail_mode: TailMode,
    pub tail_rel_tol: T,
}

impl<T: Real> OperatorParams<T> {
    pub fn new(s: T) -> Self {
        Self {
            s,
            delta_near: None,
            r_far: None,
            quad_near: 8,
            quad_far: 8,
            angular: 128,
            tail_mode: TailMode::AnalyticBound,
            tail_rel_tol: T::lit(1e-6),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > T::zero() && self.s < T::one()) {
            return Err(Error::InvalidParams("s must lie in (0,1)".into()));
        }
        if let Some(d) = self.delta_near {
            if !(d > T::zero() && d.is_finite()) {
                return Err(Error::InvalidParams("delta_near must be positive".into()));
            }
            if let Some(r) = self.r_far {
                if !(r > d) {
                    return Err(Error::InvalidParams("r_far must exceed delta_near".into()));
                }
            }
        }
        if let Some(r) = self.r_far {
            if !(r > T::zero() && r.is_finite()) {
                return Err(Error::InvalidParams("r_far must be positive and finite".into()));
            }
        }
        if self.quad_near < 8 || self.quad_far < 8 {
            return Err(Error::InvalidParams("quadrature counts must be at least 8".into()));
        }
        if self.angular < 8 {
            return Err(Error::InvalidParams("angular count must be at least 8".into()));
        }
        if !(self.tail_rel_tol > T::zero()) {
            return Err(Error::InvalidParams("tail tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// `k(t) = t^s * factor(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum KernelShape<T> {
    /// `factor = c`.
    Scaled { c: T },
    /// `factor = (lo + hi)/2 + (hi - lo)/2 * sin(ln t)`.
    LogOscillating { lo: T, hi: T },
}

/// Kernel `k` with declared bounds `c1 t^s <= k(t) <= c2 t^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelModel<T> {
    pub shape: KernelShape<T>,
    pub s: T,
    pub c1: T,
    pub c2: T,
}

impl<T: Real> KernelModel<T> {
    /// `k(t) = t^s`.
    pub fn fractional(s: T) -> Self {
        Self::scaled(s, T::one()).expect("unit kernel is valid")
    }

    pub fn scaled(s: T, c: T) -> Result<Self> {
        Self::new(KernelShape::Scaled { c }, s)
    }

    pub fn new(shape: KernelShape<T>, s: T) -> Result<Self> {
        let (c1, c2) = match shape {
            KernelShape::Scaled { c } => (c, c),
            KernelShape::LogOscillating { lo, hi } => (lo, hi),
        };
        if !(c1 > T::zero() && c2 >= c1 && c2.is_finite()) {
            return Err(Error::InvalidKernel(format!(
                "bounds must satisfy 0 < c1 <= c2, got ({c1}, {c2})"
            )));
        }
        if !(s > T::zero() && s < T::one()) {
            return Err(Error::InvalidKernel("s must lie in (0,1)".into()));
        }
        let k = Self { shape, s, c1, c2 };
        k.check_sandwich()?;
        Ok(k)
    }

    fn factor(&self, t: T) -> T {
        match self.shape {
            KernelShape::Scaled { c } => c,
            KernelShape::LogOscillating { lo, hi } => {
                let two = T::lit(2.0);
                (lo + hi) / two + (hi - lo) / two * t.ln().sin()
            }
        }
    }

    pub fn k(&self, t: T) -> T {
        t.powf(self.s) * self.factor(t)
    }

    /// Samples `k(t)/t^s` on a log grid over `[1e-8, 1e8]`.
    pub fn check_sandwich(&self) -> Result<()> {
        let n = 400;
        for i in 0..=n {
            let e = T::lit(-8.0) + T::lit(16.0) * T::from_usize_lossy(i) / T::from_usize_lossy(n);
            let t = T::lit(10.0).powf(e);
            let f = self.factor(t);
            let slack = T::lit(64.0) * T::epsilon() * self.c2;
            if !(f >= self.c1 - slack && f <= self.c2 + slack) {
                return Err(Error::InvalidKernel(format!(
                    "k(t)/t^s = {f} leaves [{}, {}] at t = {t}",
                    self.c1, self.c2
                )));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match self.shape {
            KernelShape::Scaled { c } if c == T::one() => format!("t^{}", self.s),
            KernelShape::Scaled { c } => format!("{c} t^{}", self.s),
            KernelShape::LogOscillating { lo, hi } => {
                format!("t^{} ({lo}+{hi})/2 + ({hi}-{lo})/2 sin(ln t)", self.s)
            }
        }
    }
}

/// Result of one pointwise evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorValue<T> {
    /// `near + far`; the tail is bounded, not added.
    pub value: T,
    /// Integral over `|y - x| < delta_used`.
    pub near: T,
    /// Integral over `delta_used <= |y - x| <= r_far_used`.
    pub far: T,
    /// Bound on the neglected integral beyond `r_far_used`.
    pub tail_bound: T,
    pub delta_used: T,
    pub r_far_used: T,
}

/// `(u(x) - u(y)) / |x - y|^s`.
pub fn holder_quotient<T: Real>(field: &ScalarField<T>, x: &[T], y: &[T], s: T) -> Result<T> {
    if x.len() != field.dim() || y.len() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: if x.len() != field.dim() { x.len() } else { y.len() },
        });
    }
    let d = dist(x, y);
    if d == T::zero() {
        return Err(Error::CoincidentPoints);
    }
    Ok((field.sample(x) - field.sample(y)) / d.powf(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{AnalyticField, TailProfile};

    #[test]
    fn holder_quotient_examples() {
        let c = ScalarField::<f64>::constant(2, 3.0);
        assert_eq!(holder_quotient(&c, &[0.0, 0.0], &[1.0, 2.0], 0.5).unwrap(), 0.0);
        let abs: ScalarField<f64> = AnalyticField::new(
            1,
            "|x|",
            |x: &[f64]| x[0].abs(),
            TailProfile {
                sup_bound: f64::INFINITY,
                zero_beyond: None,
                decay: None,
            },
        )
        .unwrap()
        .into();
        assert_eq!(holder_quotient(&abs, &[0.0], &[1.0], 0.5).unwrap(), -1.0);
        assert!(matches!(
            holder_quotient(&abs, &[0.5], &[0.5], 0.5),
            Err(Error::CoincidentPoints)
        ));
        let u = ScalarField::<f64>::gaussian(vec![0.2, 0.0], 1.0, 1.0);
        let (x, y) = ([0.1, 0.4], [-0.3, 0.9]);
        let a = holder_quotient(&u, &x, &y, 0.3).unwrap();
        let b = holder_quotient(&u, &y, &x, 0.3).unwrap();
        assert_eq!(a, -b);
    }

    #[test]
    fn kernel_bounds_are_checked() {
        let k = KernelModel::new(KernelShape::LogOscillating { lo: 0.5, hi: 2.0 }, 0.5).unwrap();
        assert_eq!((k.c1, k.c2), (0.5, 2.0));
        assert!(KernelModel::<f64>::new(KernelShape::Scaled { c: -1.0 }, 0.5).is_err());
        assert!(KernelModel::<f64>::new(KernelShape::Scaled { c: 1.0 }, 1.5).is_err());
        assert!((KernelModel::<f64>::fractional(0.5).k(4.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn params_validation() {
        let mut p = OperatorParams::<f64>::new(0.5);
        assert!(p.validate().is_ok());
        p.s = 1.5;
        assert!(p.validate().is_err());
        let mut p = OperatorParams::<f64>::new(0.5);
        p.quad_far = 4;
        assert!(p.validate().is_err());
        let mut p = OperatorParams::<f64>::new(0.5);
        p.delta_near = Some(2.0);
        p.r_far = Some(1.0);
        assert!(p.validate().is_err());
    }
}
