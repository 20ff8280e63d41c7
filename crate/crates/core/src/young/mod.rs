//! Young functions `G` with `g = G'` extended oddly to the real line, their
//! ellipticity indices `(p-, p+)` and the explicit constants of the elementary
//! inequalities they satisfy.

mod certify;

pub use certify::{
    certify_all, certify_delta2, certify_desig, certify_lemita, certify_lemma22,
    certify_scaling, delta2_margin, desig_margin, lemita_margin, lemma22_margin, mean_value_point,
    scaling_margins, InequalityReport, LemmaId, MeanValuePoint,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Built-in families of Young functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family<T> {
    /// `G(t) = t^p`
    Power { p: T },
    /// `G(t) = t^p + t^q`
    DoublePhase { p: T, q: T },
    /// `G(t) = t^p log(1 + t)`
    PowerLog { p: T },
}

/// Selector used by [`make_builtin`] and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Power,
    DoublePhase,
    PowerLog,
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(Self::Power),
            "double_phase" => Ok(Self::DoublePhase),
            "power_log" => Ok(Self::PowerLog),
            other => Err(Error::InvalidExponents {
                family: other.to_string(),
                reason: "unknown family (expected power, double_phase or power_log)".into(),
            }),
        }
    }
}

impl<T: Real> Family<T> {
    /// `G(t)` for `t >= 0`.
    pub fn big_g(&self, t: T) -> T {
        let t = t.abs();
        match *self {
            Family::Power { p } => t.powf(p),
            Family::DoublePhase { p, q } => t.powf(p) + t.powf(q),
            Family::PowerLog { p } => t.powf(p) * t.ln_1p(),
        }
    }

    /// `g(t)` for `t >= 0`.
    fn g_pos(&self, t: T) -> T {
        match *self {
            Family::Power { p } => p * t.powf(p - T::one()),
            Family::DoublePhase { p, q } => p * t.powf(p - T::one()) + q * t.powf(q - T::one()),
            Family::PowerLog { p } => {
                p * t.powf(p - T::one()) * t.ln_1p() + t.powf(p) / (T::one() + t)
            }
        }
    }

    /// `g'(t)` for `t >= 0`.
    fn gprime_pos(&self, t: T) -> T {
        let one = T::one();
        let two = T::lit(2.0);
        match *self {
            Family::Power { p } => p * (p - one) * t.powf(p - two),
            Family::DoublePhase { p, q } => {
                p * (p - one) * t.powf(p - two) + q * (q - one) * t.powf(q - two)
            }
            Family::PowerLog { p } => {
                let s = one + t;
                p * (p - one) * t.powf(p - two) * t.ln_1p() + two * p * t.powf(p - one) / s
                    - t.powf(p) / (s * s)
            }
        }
    }

    /// Closed-form indices when available.
    fn analytic_indices(&self) -> Option<(T, T)> {
        match *self {
            Family::Power { p } => Some((p, p)),
            Family::DoublePhase { p, q } => Some((p, q)),
            Family::PowerLog { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Family::Power { p } => format!("power({})", p),
            Family::DoublePhase { p, q } => format!("double_phase({},{})", p, q),
            Family::PowerLog { p } => format!("power_log({})", p),
        }
    }

    /// `g` extended oddly.
    pub fn g(&self, t: T) -> T {
        if t < T::zero() {
            -self.g_pos(-t)
        } else if t > T::zero() {
            self.g_pos(t)
        } else {
            T::zero()
        }
    }

    /// `g'` (even, since `g` is odd).
    pub fn gprime(&self, t: T) -> T {
        let a = t.abs();
        if a == T::zero() {
            T::zero()
        } else {
            self.gprime_pos(a)
        }
    }
}

/// A Young function together with its ellipticity indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YoungFunction<T> {
    pub family: Family<T>,
    pub p_minus: T,
    pub p_plus: T,
    pub label: String,
}

/// Range used to estimate the indices of families without a closed form. It
/// covers every argument the certifiers produce from their default sampling.
pub const ESTIMATE_T_MIN: f64 = 1e-10;
pub const ESTIMATE_T_MAX: f64 = 1e10;
pub const ESTIMATE_POINTS: usize = 4000;

/// Constructs a built-in Young function.
pub fn make_builtin<T: Real>(kind: FamilyKind, exponents: &[T]) -> Result<YoungFunction<T>> {
    let two = T::lit(2.0);
    let bad = |reason: &str| Error::InvalidExponents {
        family: format!("{kind:?}"),
        reason: reason.to_string(),
    };
    if exponents.iter().any(|e| !e.is_finite()) {
        return Err(bad("exponents must be finite"));
    }
    let family = match kind {
        FamilyKind::Power => match exponents {
            [p] if *p > two => Family::Power { p: *p },
            [_] => return Err(bad("power needs p > 2")),
            _ => return Err(bad("power takes exactly one exponent")),
        },
        FamilyKind::DoublePhase => match exponents {
            [p, q] if *p > two && q > p => Family::DoublePhase { p: *p, q: *q },
            [_, _] => return Err(bad("double_phase needs 2 < p < q")),
            _ => return Err(bad("double_phase takes exactly two exponents")),
        },
        FamilyKind::PowerLog => match exponents {
            [p] if *p >= two => Family::PowerLog { p: *p },
            [_] => return Err(bad("power_log needs p >= 2")),
            _ => return Err(bad("power_log takes exactly one exponent")),
        },
    };
    let (p_minus, p_plus) = match family.analytic_indices() {
        Some(ix) => ix,
        None => estimate_indices(
            &family,
            T::lit(ESTIMATE_T_MIN),
            T::lit(ESTIMATE_T_MAX),
            ESTIMATE_POINTS,
        )?,
    };
    if p_minus <= two {
        return Err(Error::IndexOutOfRange {
            p_minus: p_minus.to_f64_lossy(),
        });
    }
    Ok(YoungFunction {
        label: family.label(),
        family,
        p_minus,
        p_plus,
    })
}

/// Estimates `(p-, p+)` as one plus the extreme values of `t g'(t) / g(t)` over a
/// log-uniform sample of `[t_min, t_max]`.
///
/// Each extreme is pushed outward by 1.01 times the largest change of the ratio
/// between the extremal sample and its neighbours, which bounds what the
/// sampling can miss between nodes. Constant ratios are returned exactly.
pub fn estimate_indices<T: Real>(
    family: &Family<T>,
    t_min: T,
    t_max: T,
    n_pts: usize,
) -> Result<(T, T)> {
    if !(t_min > T::zero() && t_max > t_min) {
        return Err(Error::InvalidRange(format!(
            "need 0 < t_min < t_max, got [{t_min}, {t_max}]"
        )));
    }
    if n_pts < 100 {
        return Err(Error::InvalidRange(format!("need at least 100 points, got {n_pts}")));
    }
    let (la, lb) = (t_min.ln(), t_max.ln());
    let step = (lb - la) / T::from_usize_lossy(n_pts - 1);
    let mut ratios = Vec::with_capacity(n_pts);
    for i in 0..n_pts {
        let t = (la + step * T::from_usize_lossy(i)).exp();
        let g = family.g(t);
        let r = t * family.gprime(t) / g;
        if !(g > T::zero()) || !r.is_finite() {
            return Err(Error::NonFiniteRatio { t: t.to_f64_lossy() });
        }
        ratios.push(r);
    }
    let neighbour_gap = |i: usize| {
        let mut gap = T::zero();
        if i > 0 {
            gap = gap.max((ratios[i] - ratios[i - 1]).abs());
        }
        if i + 1 < ratios.len() {
            gap = gap.max((ratios[i + 1] - ratios[i]).abs());
        }
        gap * T::lit(1.01)
    };
    let (mut imin, mut imax) = (0, 0);
    for (i, &r) in ratios.iter().enumerate() {
        if r < ratios[imin] {
            imin = i;
        }
        if r > ratios[imax] {
            imax = i;
        }
    }
    let p_minus = T::one() + ratios[imin] - neighbour_gap(imin);
    let p_plus = T::one() + ratios[imax] + neighbour_gap(imax);
    Ok((p_minus, p_plus))
}

impl<T: Real> YoungFunction<T> {
    /// Parses `power:3`, `double_phase:3,4` or `power_log:3`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let kind: FamilyKind = name.trim().parse()?;
        let exps = rest
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim().parse::<f64>().map(T::lit).map_err(|_| Error::InvalidExponents {
                    family: name.to_string(),
                    reason: format!("cannot parse exponent `{s}`"),
                })
            })
            .collect::<Result<Vec<T>>>()?;
        make_builtin(kind, &exps)
    }

    pub fn big_g(&self, t: T) -> T {
        self.family.big_g(t)
    }

    pub fn g(&self, t: T) -> T {
        self.family.g(t)
    }

    pub fn gprime(&self, t: T) -> T {
        self.family.gprime(t)
    }

    /// `C_1 = 2^{p+ - 1}` in `g(a + b) <= C_1 (g(a) + g(b))`.
    pub fn c1_delta2(&self) -> T {
        T::lit(2.0).powf(self.p_plus - T::one())
    }

    /// `C_2 = 2^{p+}` in `G(a + b) <= C_2 (G(a) + G(b))`.
    pub fn c2_delta2(&self) -> T {
        T::lit(2.0).powf(self.p_plus)
    }

    /// Constant in `g(b) - g(a) >= C g(b - a)` for `b >= a`: the minimum of the
    /// three case constants `2^{2-p+}(p- - 1)`, `1 - 2^{1-p+}` and `2^{1-p+}`.
    pub fn lemma22_constant(&self) -> T {
        let one = T::one();
        let two = T::lit(2.0);
        let c_close = two.powf(two - self.p_plus) * (self.p_minus - one);
        let c_far = one - two.powf(one - self.p_plus);
        let c_signs = two.powf(one - self.p_plus);
        c_close.min(c_far).min(c_signs)
    }

    /// Constant `C_0` in `|xi| >= C_0 max(|a|, |b|)` for the mean value point
    /// `g(b) - g(a) = g'(xi) (b - a)`.
    ///
    /// Both cases end with `g'(|xi|) >= kappa g'(|b|)`; the weakest is
    /// `kappa = (1 - 2^{1-p-}) / (2 (p+ - 1))`. Combining `t g' / g` bounds with
    /// the scaling of `g` gives `g'(c t) <= (p+ - 1)/(p- - 1) c^{p- - 2} g'(t)` for
    /// `c <= 1`, hence `|xi| >= (kappa (p- - 1)/(p+ - 1))^{1/(p- - 2)} |b|`. The
    /// value is capped at 1/2; `C_0 = 1` already fails for same-sign pairs.
    pub fn desig_constant(&self) -> T {
        let one = T::one();
        let two = T::lit(2.0);
        let kappa = (one - two.powf(one - self.p_minus)) / (two * (self.p_plus - one));
        let ratio = (self.p_minus - one) / (self.p_plus - one);
        let scaled = (kappa * ratio).powf(one / (self.p_minus - two));
        scaled.min(T::lit(0.5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power(p: f64) -> YoungFunction<f64> {
        make_builtin(FamilyKind::Power, &[p]).unwrap()
    }

    #[test]
    fn power_three_formulas() {
        let y = power(3.0);
        assert_eq!(y.g(2.0), 12.0);
        assert_eq!(y.gprime(2.0), 12.0);
        assert_eq!(y.big_g(2.0), 8.0);
        assert_eq!((y.p_minus, y.p_plus), (3.0, 3.0));
        assert_eq!(y.label, "power(3)");
    }

    #[test]
    fn invalid_exponents_rejected() {
        assert!(matches!(
            make_builtin::<f64>(FamilyKind::Power, &[2.0]),
            Err(Error::InvalidExponents { .. })
        ));
        assert!(make_builtin::<f64>(FamilyKind::DoublePhase, &[4.0, 3.0]).is_err());
        assert!(make_builtin::<f64>(FamilyKind::DoublePhase, &[2.0, 3.0]).is_err());
        assert!(make_builtin::<f64>(FamilyKind::PowerLog, &[1.5]).is_err());
        assert!(make_builtin::<f64>(FamilyKind::Power, &[3.0, 4.0]).is_err());
    }

    #[test]
    fn odd_extension_is_exact() {
        for spec in ["power:3", "double_phase:3,4", "power_log:3", "power:4.5"] {
            let y = YoungFunction::<f64>::parse(spec).unwrap();
            for &t in &[1e-7, 0.3, 1.0, 7.5, 1e5] {
                assert_eq!(y.g(-t) + y.g(t), 0.0);
                assert_eq!(y.gprime(-t), y.gprime(t));
            }
            assert_eq!(y.g(0.0), 0.0);
        }
    }

    #[test]
    fn double_phase_indices_are_analytic() {
        let y = YoungFunction::<f64>::parse("double_phase:3,4").unwrap();
        assert_eq!((y.p_minus, y.p_plus), (3.0, 4.0));
    }

    #[test]
    fn estimate_power_is_exact() {
        let (a, b) = estimate_indices(&Family::<f64>::Power { p: 3.0 }, 1e-6, 1e6, 1000).unwrap();
        assert!((a - 3.0).abs() < 1e-9 && (b - 3.0).abs() < 1e-9);
    }

    #[test]
    fn estimate_double_phase_matches_sampling_oracle() {
        // oracle: dense sampling of (6 + 12 t) / (3 + 4 t), monotone in t
        let oracle = |t: f64| (6.0 + 12.0 * t) / (3.0 + 4.0 * t);
        let (lo, hi) = (oracle(1e-6), oracle(1e6));
        let (a, b) = estimate_indices(&Family::<f64>::DoublePhase { p: 3.0, q: 4.0 }, 1e-6, 1e6, 2000)
            .unwrap();
        assert!((a - (1.0 + lo)).abs() < 1e-6);
        assert!((b - (1.0 + hi)).abs() < 1e-6);
        assert!((a - 3.0).abs() < 1e-4 && (b - 4.0).abs() < 1e-4);
    }

    #[test]
    fn power_log_indices_bracketed() {
        let y = YoungFunction::<f64>::parse("power_log:3").unwrap();
        assert!(3.0 <= y.p_minus && y.p_minus <= y.p_plus && y.p_plus <= 4.0);
        // t g'/g tends to p - 1 + p/(p ln t + 1) at the top of the estimation range
        let ln_t = ESTIMATE_T_MAX.ln();
        let top = 2.0 + 3.0 / (3.0 * ln_t + 1.0);
        assert!((y.p_minus - 1.0 - top).abs() < 1e-3, "p_minus = {}", y.p_minus);
    }

    #[test]
    fn estimate_rejects_bad_ranges() {
        let f = Family::Power { p: 3.0 };
        assert!(estimate_indices(&f, 0.0, 1.0, 200).is_err());
        assert!(estimate_indices(&f, 2.0, 1.0, 200).is_err());
        assert!(estimate_indices(&f, 1.0, 2.0, 10).is_err());
    }

    #[test]
    fn constants_match_hand_values() {
        let y = power(3.0);
        assert_eq!(y.lemma22_constant(), 0.25);
        assert_eq!(y.c1_delta2(), 4.0);
        // kappa = (1 - 1/4)/4, ratio 1, exponent 1 -> 0.1875
        assert!((y.desig_constant() - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn power_log_gprime_matches_finite_differences() {
        let f = Family::PowerLog { p: 3.0 };
        for &t in &[0.01f64, 0.5, 2.0, 40.0] {
            let h = 1e-5 * t;
            let fd = (f.g(t + h) - f.g(t - h)) / (2.0 * h);
            assert!((fd - f.gprime(t)).abs() < 1e-7 * f.gprime(t).abs());
            let fd_g = (f.big_g(t + h) - f.big_g(t - h)) / (2.0 * h);
            assert!((fd_g - f.g(t)).abs() < 1e-7 * f.g(t));
        }
    }

    #[test]
    fn parse_errors() {
        assert!(YoungFunction::<f64>::parse("cubic:3").is_err());
        assert!(YoungFunction::<f64>::parse("power:x").is_err());
    }
}
