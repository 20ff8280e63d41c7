//! Membership of a field in the tail spaces `L_g` and `L_{g'}`.

use serde::{Deserialize, Serialize};

use super::ScalarField;
use crate::error::{Error, Result};
use crate::quadrature::{DirectionSet, GaussLegendre};
use crate::real::{unit_sphere_measure, Real};
use crate::young::YoungFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    /// `int_{|x|<=R} g(|u|/(1+|x|^s)) / (1+|x|^{n+s}) dx`.
    pub integral_estimate: f64,
    /// Same with `g'` in place of `g`.
    pub integral_estimate_gprime: f64,
    pub in_l_g: bool,
    pub in_l_gprime: bool,
    pub truncation_radius: f64,
    /// Bound for the integral over `|x| > truncation_radius`.
    pub truncation_bound: f64,
    pub truncation_bound_gprime: f64,
}

/// Integrates the tail-space weight over `|x| <= r_max` and bounds the rest
/// from the field's declared support or decay, using the index bounds of `y`.
pub fn check_tail_membership<T: Real>(
    field: &ScalarField<T>,
    y: &YoungFunction<T>,
    s: T,
    r_max: T,
    quad_pts: usize,
) -> Result<TailReport> {
    if !(s > T::zero() && s < T::one()) {
        return Err(Error::InvalidParams("s must lie in (0,1)".into()));
    }
    if !(r_max > T::zero() && r_max.is_finite()) || quad_pts < 2 {
        return Err(Error::InvalidParams(
            "tail check needs a positive radius and at least 2 points".into(),
        ));
    }
    let n = field.dim();
    let profile = field.tail_profile();
    let sphere = unit_sphere_measure::<T>(n);

    // analytic remainder beyond r_eff
    let (r_eff, bound_g, bound_gp) = match (profile.zero_beyond, profile.decay) {
        (Some(z), _) if z <= r_max => (r_max, T::zero(), T::zero()),
        (Some(z), _) => (z, T::zero(), T::zero()),
        (None, Some(d)) => {
            let r = r_max.max(d.r0).max(T::one());
            let gamma = d.beta + s;
            let (pg, pgp) = if gamma >= T::zero() {
                (y.p_minus - T::one(), y.p_minus - T::lit(2.0))
            } else {
                (y.p_plus - T::one(), y.p_plus - T::lit(2.0))
            };
            let rate = s + gamma * pg;
            if rate <= T::zero() {
                return Err(Error::UnboundedTail {
                    exponent: (-rate).to_f64_lossy(),
                });
            }
            let arg = d.c * r.powf(-gamma);
            let bg = sphere * y.g(arg) * r.powf(-s) / rate;
            let rate_p = s + gamma * pgp;
            let k = (y.p_plus - T::one()) / (y.p_minus - T::one());
            let bgp = if rate_p > T::zero() {
                k * sphere * y.gprime(arg) * r.powf(-s) / rate_p
            } else {
                T::infinity()
            };
            (r, bg, bgp)
        }
        (None, None) => (r_max, T::infinity(), T::infinity()),
    };

    // radial panels [0,1], [1,2], [2,4], ... up to r_eff
    let rule = GaussLegendre::<T>::new(quad_pts);
    let dirs = DirectionSet::<T>::new(n, 32);
    let mut edges = vec![T::zero()];
    let mut r = T::one().min(r_eff);
    edges.push(r);
    while r < r_eff {
        r = (r * T::lit(2.0)).min(r_eff);
        edges.push(r);
    }
    let mut int_g = T::zero();
    let mut int_gp = T::zero();
    let mut x = vec![T::zero(); n];
    for w in edges.windows(2) {
        for (rr, wr) in rule.mapped(w[0], w[1]) {
            let jac = wr * rr.powi(n as i32 - 1);
            let denom = T::one() + rr.powf(T::from_usize_lossy(n) + s);
            let scale = T::one() + rr.powf(s);
            for (e, we) in dirs.dirs.iter().zip(&dirs.weights) {
                for sign in [T::one(), -T::one()] {
                    for k in 0..n {
                        x[k] = sign * rr * e[k];
                    }
                    let a = field.sample(&x).abs() / scale;
                    int_g = int_g + jac * *we * y.g(a) / denom;
                    int_gp = int_gp + jac * *we * y.gprime(a) / denom;
                }
            }
        }
    }
    let in_g = bound_g.is_finite() && int_g.is_finite();
    let in_gp = bound_gp.is_finite() && int_gp.is_finite();
    Ok(TailReport {
        integral_estimate: int_g.to_f64_lossy(),
        integral_estimate_gprime: int_gp.to_f64_lossy(),
        in_l_g: in_g,
        in_l_gprime: in_gp,
        truncation_radius: r_eff.to_f64_lossy(),
        truncation_bound: bound_g.to_f64_lossy(),
        truncation_bound_gprime: bound_gp.to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ExteriorModel, GridField, GridSpec};

    fn power3() -> YoungFunction<f64> {
        YoungFunction::parse("power:3").unwrap()
    }

    #[test]
    fn compact_bump_is_in_tail_space() {
        let u = ScalarField::<f64>::bump(vec![0.0, 0.0], 1.0);
        let rep = check_tail_membership(&u, &power3(), 0.5, 4.0, 16).unwrap();
        assert!(rep.in_l_g && rep.in_l_gprime);
        assert_eq!(rep.truncation_bound, 0.0);
        assert!(rep.integral_estimate > 0.0);
    }

    #[test]
    fn bounded_power_decay_is_in_tail_space() {
        let spec = GridSpec::centered(&[0.0], 2.0, 8).unwrap();
        let n = spec.len();
        let g = GridField::new(
            spec,
            vec![1.0; n],
            ExteriorModel::PowerDecay { c: 1.0, beta: 0.0 },
            None,
        )
        .unwrap();
        let rep = check_tail_membership(&ScalarField::from(g), &power3(), 0.5, 50.0, 16).unwrap();
        assert!(rep.in_l_g && rep.in_l_gprime);
        assert!(rep.truncation_bound.is_finite() && rep.truncation_bound > 0.0);
    }

    #[test]
    fn fast_growth_is_unbounded() {
        let spec = GridSpec::centered(&[0.0], 2.0, 8).unwrap();
        let n = spec.len();
        let g = GridField::new(
            spec,
            vec![1.0; n],
            ExteriorModel::PowerDecay { c: 1.0, beta: -2.0 },
            None,
        )
        .unwrap();
        let err = check_tail_membership(&ScalarField::from(g), &power3(), 0.5, 50.0, 16);
        assert!(matches!(err, Err(Error::UnboundedTail { .. })));
    }
}
