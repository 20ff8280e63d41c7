use serde::{Deserialize, Serialize};

use super::symmetry::snap_lambda;
use super::{AntisymmetricField, HalfSpace, ReflectionFrame};
use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField};
use crate::operator::FracGOperator;
use crate::real::Real;
use crate::sampling::halton_ball;
use crate::solver::Domain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryVerdict {
    Consistent,
    Inconsistent,
    HypothesesNotMet,
}

/// One plane position of the boundary probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeStep<T> {
    pub j: usize,
    pub lambda: T,
    /// Argmin of `w_lambda` over the cap; empty when the cap has no nodes.
    pub x: Vec<T>,
    pub w_min: T,
    pub delta: T,
    /// `[L u(x^lambda) - L u(x)] / delta`.
    pub q: Option<T>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProbeReport<T> {
    pub verdict: BoundaryVerdict,
    pub lambda0: T,
    pub steps: Vec<ProbeStep<T>>,
    /// Largest `q_j` over the second half of the computed sequence.
    pub tail_max: Option<T>,
    /// `-tail_max` when positive.
    pub eps0: Option<T>,
    pub note: String,
}

/// Planes `lambda_j = lambda0 + 0.1 * 2^-j` (snapped to the grid) approaching
/// `lambda0` from above; the cap is `{x_axis < lambda_j}` inside the domain.
#[allow(clippy::too_many_arguments)]
pub fn boundary_estimate_probe<T: Real>(
    op: &FracGOperator<'_, T>,
    field: &ScalarField<T>,
    domain: &Domain<T>,
    grid: &GridSpec<T>,
    axis: usize,
    lambda0: T,
    j_max: usize,
) -> Result<BoundaryProbeReport<T>> {
    let n = grid.dim();
    let nodes: Vec<Vec<T>> = (0..grid.len())
        .map(|i| grid.node(i))
        .filter(|x| domain.contains(x))
        .collect();
    let mut steps: Vec<ProbeStep<T>> = Vec::new();
    let mut last_lambda: Option<T> = None;
    for j in 1..=j_max {
        let raw = lambda0 + T::lit(0.1) * T::lit(2.0).powi(-(j as i32));
        let lambda = snap_lambda(grid, axis, raw);
        if last_lambda == Some(lambda) {
            continue;
        }
        last_lambda = Some(lambda);
        let frame = ReflectionFrame::new(axis, lambda, HalfSpace::Below, n)?;
        let w = AntisymmetricField::new(field.clone(), frame)?;
        let best = nodes
            .iter()
            .filter(|x| frame.in_sigma(x))
            .map(|x| (w.value(x), x))
            .fold(None, |b: Option<(T, &Vec<T>)>, (v, x)| match b {
                Some((bv, _)) if bv <= v => b,
                _ => Some((v, x)),
            });
        let Some((w_min, x)) = best else {
            steps.push(ProbeStep {
                j,
                lambda,
                x: Vec::new(),
                w_min: T::infinity(),
                delta: T::zero(),
                q: None,
                skipped: Some("cap contains no grid nodes".into()),
            });
            continue;
        };
        let delta = frame.distance_to_plane(x);
        if delta == T::zero() {
            steps.push(ProbeStep {
                j,
                lambda,
                x: x.clone(),
                w_min,
                delta,
                q: None,
                skipped: Some("minimizer lies on the plane".into()),
            });
            continue;
        }
        let q = w.operator_difference(op, x)? / delta;
        steps.push(ProbeStep {
            j,
            lambda,
            x: x.clone(),
            w_min,
            delta,
            q: Some(q),
            skipped: None,
        });
    }
    if steps.iter().all(|s| s.x.is_empty()) {
        return Err(Error::EmptyMask);
    }
    let qs: Vec<T> = steps.iter().filter_map(|s| s.q).collect();
    let tail_max = if qs.is_empty() {
        None
    } else {
        Some(qs[qs.len() / 2..].iter().copied().fold(T::neg_infinity(), T::max))
    };
    let computed: Vec<&ProbeStep<T>> = steps.iter().filter(|s| s.q.is_some()).collect();
    let minima_nonpositive = !computed.is_empty() && computed.iter().all(|s| s.w_min <= T::zero());
    let approaches = computed
        .last()
        .is_some_and(|s| s.delta <= T::lit(4.0) * grid.spacing + (s.lambda - lambda0).abs());
    let (verdict, eps0) = if !(minima_nonpositive && approaches) {
        (BoundaryVerdict::HypothesesNotMet, None)
    } else {
        match tail_max {
            Some(t) if t < T::zero() => (BoundaryVerdict::Consistent, Some(-t)),
            _ => (BoundaryVerdict::Inconsistent, None),
        }
    };
    Ok(BoundaryProbeReport {
        verdict,
        lambda0,
        steps,
        tail_max,
        eps0,
        note: "grid argmin stands in for the continuum minimizer".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiouvilleVerdict {
    /// Operator below tolerance and the field is constant on the probes.
    Pass,
    /// Operator below tolerance but the field oscillates.
    Fail,
    /// The operator is visibly nonzero; no constancy claim is tested.
    NotHarmonic,
    /// Operator below tolerance but the exterior model is not constant.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleRow<T> {
    pub radius: T,
    pub sup_operator: T,
    pub worst_location: Vec<T>,
    pub oscillation: T,
    pub probes: usize,
    /// Probes where the operator could not be evaluated.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleReport<T> {
    pub verdict: LiouvilleVerdict,
    pub rows: Vec<LiouvilleRow<T>>,
    pub constant_compatible: bool,
    pub tolerance_used: T,
    pub note: String,
}

/// For each radius, `sup |L u|` and `osc u` over `count` Halton points in the ball
/// of that radius around the origin (plus the origin itself).
pub fn liouville_probe<T: Real>(
    op: &FracGOperator<'_, T>,
    field: &ScalarField<T>,
    box_radii: &[T],
    count: usize,
    tol: T,
) -> Result<LiouvilleReport<T>> {
    let sup = field
        .tail_profile()
        .sup_bound;
    let n = field.dim();
    let mut rows = Vec::new();
    for &r in box_radii {
        if !(r > T::zero()) {
            return Err(Error::InvalidParams("radii must be positive".into()));
        }
        let mut pts: Vec<Vec<T>> = vec![vec![T::zero(); n]];
        pts.extend(
            halton_ball(&vec![0.0; n], r.to_f64_lossy(), count)
                .into_iter()
                .map(|p| p.into_iter().map(T::lit).collect::<Vec<T>>()),
        );
        let vals: Vec<T> = pts.iter().map(|x| field.sample(x)).collect();
        if vals.iter().any(|v| !v.is_finite()) || !sup.is_finite() {
            return Err(Error::InvalidField("Liouville probe needs a bounded field".into()));
        }
        let results = op.eval_points(field, &pts);
        let mut worst = (T::zero(), pts[0].clone());
        let mut skipped = 0;
        for (x, res) in pts.iter().zip(results) {
            match res {
                Ok(v) => {
                    if v.value.abs() > worst.0 {
                        worst = (v.value.abs(), x.clone());
                    }
                }
                Err(_) => skipped += 1,
            }
        }
        let hi = vals.iter().copied().fold(T::neg_infinity(), T::max);
        let lo = vals.iter().copied().fold(T::infinity(), T::min);
        rows.push(LiouvilleRow {
            radius: r,
            sup_operator: worst.0,
            worst_location: worst.1,
            oscillation: hi - lo,
            probes: pts.len(),
            skipped,
        });
    }
    let profile = field.tail_profile();
    let constant_compatible = profile.zero_beyond.is_some()
        || profile.decay.is_some_and(|d| d.beta == T::zero());
    let harmonic = rows.iter().all(|r| r.sup_operator <= tol);
    let verdict = if !harmonic {
        LiouvilleVerdict::NotHarmonic
    } else if !constant_compatible {
        LiouvilleVerdict::Inconclusive
    } else if rows.iter().all(|r| r.oscillation <= tol) {
        LiouvilleVerdict::Pass
    } else {
        LiouvilleVerdict::Fail
    };
    let note = match verdict {
        LiouvilleVerdict::Inconclusive => "inconclusive (truncated domain)".into(),
        LiouvilleVerdict::NotHarmonic => "operator is nonzero; no constancy claim tested".into(),
        _ => "bounded field with vanishing operator on every probe".into(),
    };
    Ok(LiouvilleReport {
        verdict,
        rows,
        constant_compatible,
        tolerance_used: tol,
        note,
    })
}
