//! Sensitivity of the operator to a localized smooth perturbation.

use serde::{Deserialize, Serialize};

use super::FracGOperator;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::real::Real;

/// `gap(eps) = |L(u + eps psi)(x) - L(u)(x)|` with `psi` a unit bump at `x`,
/// and the affine bound `C_delta eps + omega` fitted from `eps/4` and `eps/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationGap<T> {
    pub eps: T,
    pub gap: T,
    pub c_delta: T,
    pub omega: T,
    /// `c_delta * eps + omega`.
    pub bound: T,
}

/// Evaluates at `bump_center`, with near radius `delta` and the truncation
/// radius of the unperturbed evaluation reused for the perturbed ones.
pub fn perturbation_gap<T: Real>(
    op: &FracGOperator<'_, T>,
    field: &ScalarField<T>,
    bump_center: &[T],
    eps: T,
    delta: T,
) -> Result<PerturbationGap<T>> {
    if !(eps >= T::zero() && eps.is_finite()) {
        return Err(Error::InvalidParams("eps must be finite and non-negative".into()));
    }
    if bump_center.len() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: bump_center.len(),
        });
    }
    let op = op.with_delta(delta)?;
    let base = op.eval(field, bump_center)?;
    let fixed = op.with_r_far(base.r_far_used.max(delta * T::lit(2.0)))?;
    let base_value = if fixed.params().r_far == Some(base.r_far_used) {
        base.value
    } else {
        fixed.eval(field, bump_center)?.value
    };
    let psi = ScalarField::bump(bump_center.to_vec(), T::one());
    let gap = |e: T| -> Result<T> {
        if e == T::zero() {
            return Ok(T::zero());
        }
        let v = fixed.eval(&field.plus_scaled(e, &psi)?, bump_center)?;
        Ok((v.value - base_value).abs())
    };
    let four = T::lit(4.0);
    let g_full = gap(eps)?;
    let g_half = gap(eps / T::lit(2.0))?;
    let g_quarter = gap(eps / four)?;
    let (c_delta, omega) = if eps == T::zero() {
        (T::zero(), T::zero())
    } else {
        let c = (g_half - g_quarter) / (eps / four);
        (c, (g_quarter - c * eps / four).max(T::zero()))
    };
    Ok(PerturbationGap {
        eps,
        gap: g_full,
        c_delta,
        omega,
        bound: c_delta * eps + omega,
    })
}
