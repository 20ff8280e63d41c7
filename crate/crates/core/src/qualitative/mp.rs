use serde::{Deserialize, Serialize};

use super::{to_f64, AntisymmetricField, ProbeSet, ReflectionFrame, Verdict};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::operator::{eval_at_points, FracGOperator};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MPReport<T> {
    pub verdict: Verdict,
    /// Probe where the audited quantity is smallest.
    pub worst_location: Vec<T>,
    pub worst_value: T,
    pub tolerance_used: T,
    /// Smallest operator value (or operator difference) over the mask.
    pub min_operator: T,
    pub probes_inside: usize,
    pub probes_outside: usize,
    /// Set when an interior zero exists but the field is not small everywhere.
    pub rigidity_warning: Option<String>,
    /// Hypotheses that a truncated computation cannot check.
    pub assumptions: Vec<String>,
}

fn argmin<T: Real>(points: &[Vec<T>], values: &[T]) -> Option<(usize, T)> {
    values
        .iter()
        .copied()
        .enumerate()
        .fold(None, |best, (i, v)| match best {
            Some((_, b)) if b <= v => best,
            _ => Some((i, v)),
        })
        .filter(|_| !points.is_empty())
}

fn operator_values<T: Real>(
    op: &FracGOperator<'_, T>,
    field: &ScalarField<T>,
    points: &[Vec<T>],
) -> Result<Vec<T>> {
    eval_at_points(op, field, points).into_values()
}

fn rigidity<T: Real>(inside: &[T], all: impl Iterator<Item = T>, tol: T) -> Option<String> {
    if inside.iter().any(|v| v.abs() <= tol) {
        let sup = all.fold(T::zero(), |m, v| m.max(v.abs()));
        if sup > tol {
            return Some(format!(
                "interior zero found but sup |u| = {sup} over the probes exceeds {tol}; \
                 global vanishing cannot be certified on a truncated domain"
            ));
        }
    }
    None
}

/// Checks `u >= 0` in the domain given `u >= 0` outside and `L u >= 0` inside.
/// `operator_values`, when given, must match `probes.inside`.
pub fn check_max_principle<T: Real>(
    op: &FracGOperator<'_, T>,
    field: &ScalarField<T>,
    probes: &ProbeSet<T>,
    tol: T,
    operator_values_in: Option<&[T]>,
) -> Result<MPReport<T>> {
    if probes.inside.is_empty() {
        return Err(Error::EmptyMask);
    }
    let outside: Vec<T> = probes.outside.iter().map(|x| field.sample(x)).collect();
    if let Some((i, v)) = argmin(&probes.outside, &outside) {
        if v < -tol {
            return Err(Error::HypothesisViolated {
                which: "exterior".into(),
                detail: format!("u = {v} < -tol at {:?}", to_f64(&probes.outside[i])),
            });
        }
    }
    let ops = match operator_values_in {
        Some(v) if v.len() == probes.inside.len() => v.to_vec(),
        Some(v) => {
            return Err(Error::DimensionMismatch {
                expected: probes.inside.len(),
                got: v.len(),
            })
        }
        None => operator_values(op, field, &probes.inside)?,
    };
    let (oi, min_op) = argmin(&probes.inside, &ops).expect("nonempty");
    if min_op < -tol {
        return Err(Error::HypothesisViolated {
            which: "operator".into(),
            detail: format!(
                "operator value {min_op} < -tol at {:?}",
                to_f64(&probes.inside[oi])
            ),
        });
    }
    let inside: Vec<T> = probes.inside.iter().map(|x| field.sample(x)).collect();
    let (wi, worst) = argmin(&probes.inside, &inside).expect("nonempty");
    Ok(MPReport {
        verdict: Verdict::from_bool(worst >= -tol),
        worst_location: probes.inside[wi].clone(),
        worst_value: worst,
        tolerance_used: tol,
        min_operator: min_op,
        probes_inside: probes.inside.len(),
        probes_outside: probes.outside.len(),
        rigidity_warning: rigidity(&inside, inside.iter().chain(&outside).copied(), tol),
        assumptions: Vec::new(),
    })
}

/// Checks `w_lambda >= 0` on `Sigma_lambda` given `w_lambda >= 0` on
/// `Sigma_lambda` outside the mask and a nonnegative operator difference inside.
pub fn check_antisymmetric_mp<T: Real>(
    op: &FracGOperator<'_, T>,
    field: &ScalarField<T>,
    frame: ReflectionFrame<T>,
    probes: &ProbeSet<T>,
    tol: T,
) -> Result<MPReport<T>> {
    let w = AntisymmetricField::new(field.clone(), frame)?;
    let inside: Vec<Vec<T>> = probes.inside.iter().filter(|x| frame.in_sigma(x)).cloned().collect();
    let outside: Vec<Vec<T>> = probes.outside.iter().filter(|x| frame.in_sigma(x)).cloned().collect();
    if inside.is_empty() && outside.is_empty() {
        return Err(Error::EmptyMask);
    }
    let w_out: Vec<T> = outside.iter().map(|x| w.value(x)).collect();
    if let Some((i, v)) = argmin(&outside, &w_out) {
        if v < -tol {
            return Err(Error::HypothesisViolated {
                which: "exterior".into(),
                detail: format!("w_lambda = {v} < -tol at {:?}", to_f64(&outside[i])),
            });
        }
    }
    let mut min_op = T::infinity();
    if !inside.is_empty() {
        let a = operator_values(op, w.reflected(), &inside)?;
        let b = operator_values(op, field, &inside)?;
        let diff: Vec<T> = a.iter().zip(&b).map(|(&p, &q)| p - q).collect();
        let (i, m) = argmin(&inside, &diff).expect("nonempty");
        min_op = m;
        if m < -tol {
            return Err(Error::HypothesisViolated {
                which: "operator".into(),
                detail: format!("operator difference {m} < -tol at {:?}", to_f64(&inside[i])),
            });
        }
    }
    let w_in: Vec<T> = inside.iter().map(|x| w.value(x)).collect();
    let all: Vec<Vec<T>> = inside.iter().chain(&outside).cloned().collect();
    let all_w: Vec<T> = w_in.iter().chain(&w_out).copied().collect();
    let (wi, worst) = argmin(&all, &all_w).expect("nonempty");
    Ok(MPReport {
        verdict: Verdict::from_bool(worst >= -tol),
        worst_location: all[wi].clone(),
        worst_value: worst,
        tolerance_used: tol,
        min_operator: min_op,
        probes_inside: inside.len(),
        probes_outside: outside.len(),
        rigidity_warning: rigidity(&w_in, all_w.iter().copied(), tol),
        assumptions: vec![
            "w_lambda is assumed bounded on the unbounded half-space; only probes are checked".into(),
        ],
    })
}
