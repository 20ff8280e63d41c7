//! Randomized certification of the elementary inequalities with explicit constants.

use serde::{Deserialize, Serialize};

use super::YoungFunction;
use crate::real::Real;
use crate::sampling::{log_uniform, rng_from_seed, SampleRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LemmaId {
    /// `g(b) - g(a) >= C g(b - a)` for `b >= a`.
    Lem22,
    /// `|g(a + b) - g(a)| <= |b| g'(|a| + |b|)`.
    Lemita,
    /// `|xi| >= C_0 max(|a|, |b|)` for the mean value point of `g`.
    Desig,
    /// Power bounds on `g(alpha t) / g(t)`.
    #[serde(rename = "MinMax_g")]
    MinMaxG,
    /// Power bounds on `G(alpha t) / G(t)`.
    #[serde(rename = "MinMax_G")]
    MinMaxBigG,
    /// `g(a + b) <= C_1 (g(a) + g(b))` and `G(a + b) <= C_2 (G(a) + G(b))`.
    Delta2Sum,
}

/// Outcome of one randomized scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lemma_id: LemmaId,
    pub young: String,
    pub seed: u64,
    pub n_samples: usize,
    pub n_violations: usize,
    /// Most negative slack observed. Slacks within floating point round-off of
    /// zero are recorded as zero.
    pub worst_margin: f64,
    /// Arguments at which `worst_margin` occurred.
    pub worst_sample: Vec<f64>,
    pub constant_used: f64,
    pub constant_derivation: String,
    pub sample_domain: String,
    /// Samples skipped because the mean value point could not be bracketed.
    pub n_bisection_failures: usize,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.n_violations == 0 && self.n_bisection_failures == 0
    }
}

/// Slack of `small <= big`, with round-off of size `scale` treated as equality.
fn slack<T: Real>(small: T, big: T, scale: T) -> T {
    let s = big - small;
    let allowance = T::lit(64.0) * T::epsilon() * (scale.abs() + small.abs() + big.abs());
    if s < -allowance {
        s
    } else {
        s.max(T::zero())
    }
}

struct Tally {
    n: usize,
    violations: usize,
    worst: f64,
    worst_sample: Vec<f64>,
    bisection_failures: usize,
}

impl Tally {
    fn new() -> Self {
        Self {
            n: 0,
            violations: 0,
            worst: f64::INFINITY,
            worst_sample: Vec::new(),
            bisection_failures: 0,
        }
    }

    fn record<T: Real>(&mut self, margin: T, sample: &[f64]) {
        self.n += 1;
        let m = margin.to_f64_lossy();
        if m < 0.0 || !m.is_finite() {
            self.violations += 1;
        }
        if m < self.worst || (m.is_nan() && !self.worst.is_nan()) {
            self.worst = m;
            self.worst_sample = sample.to_vec();
        }
    }

    fn finish(
        self,
        lemma_id: LemmaId,
        y_label: &str,
        seed: u64,
        constant: f64,
        derivation: &str,
        domain: String,
    ) -> InequalityReport {
        InequalityReport {
            lemma_id,
            young: y_label.to_string(),
            seed,
            n_samples: self.n,
            n_violations: self.violations,
            worst_margin: if self.n == 0 { 0.0 } else { self.worst },
            worst_sample: self.worst_sample,
            constant_used: constant,
            constant_derivation: derivation.to_string(),
            sample_domain: domain,
            n_bisection_failures: self.bisection_failures,
        }
    }
}

/// Checks `g(b) - g(a) >= C g(b - a)` on ordered pairs.
pub fn certify_lemma22<T: Real>(
    y: &YoungFunction<T>,
    n_samples: usize,
    seed: u64,
    range: SampleRange,
) -> InequalityReport {
    let c = y.lemma22_constant();
    let mut rng = rng_from_seed(seed);
    let mut tally = Tally::new();
    for _ in 0..n_samples {
        let (x1, x2) = (range.draw(&mut rng), range.draw(&mut rng));
        let (a, b) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        let margin = lemma22_margin(y, T::lit(a), T::lit(b), c);
        tally.record(margin, &[a, b]);
    }
    tally.finish(
        LemmaId::Lem22,
        &y.label,
        seed,
        c.to_f64_lossy(),
        "min{2^(2-p+)(p- - 1), 1 - 2^(1-p+), 2^(1-p+)}: close same-sign pairs, far same-sign pairs, opposite signs via C_1 = 2^(p+ - 1)",
        format!("b >= a, each {}", range.describe()),
    )
}

/// Slack `g(b) - g(a) - C g(b - a)` (round-off clamped).
pub fn lemma22_margin<T: Real>(y: &YoungFunction<T>, a: T, b: T, c: T) -> T {
    let (ga, gb) = (y.g(a), y.g(b));
    let rhs = c * y.g(b - a);
    slack(rhs, gb - ga, ga.abs() + gb.abs())
}

/// Checks `|g(a + b) - g(a)| <= |b| g'(|a| + |b|)`.
pub fn certify_lemita<T: Real>(
    y: &YoungFunction<T>,
    n_samples: usize,
    seed: u64,
    range: SampleRange,
) -> InequalityReport {
    let mut rng = rng_from_seed(seed);
    let mut tally = Tally::new();
    for _ in 0..n_samples {
        let (a, b) = (range.draw(&mut rng), range.draw(&mut rng));
        tally.record(lemita_margin(y, T::lit(a), T::lit(b)), &[a, b]);
    }
    tally.finish(
        LemmaId::Lemita,
        &y.label,
        seed,
        1.0,
        "no constant: integral form of the mean value theorem with g' nondecreasing",
        format!("a, b each {}", range.describe()),
    )
}

pub fn lemita_margin<T: Real>(y: &YoungFunction<T>, a: T, b: T) -> T {
    let (gab, ga) = (y.g(a + b), y.g(a));
    let lhs = (gab - ga).abs();
    let rhs = b.abs() * y.gprime(a.abs() + b.abs());
    slack(lhs, rhs, gab.abs() + ga.abs())
}

/// Result of recovering `|xi|` in `g(b) - g(a) = g'(xi)(b - a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanValuePoint<T> {
    Found(T),
    /// `g'` never reaches the required level on the search interval.
    BisectionFailure,
}

/// Recovers `|xi|` by bisection on the nondecreasing `g'` over
/// `[0, 10 max(|a|, |b|)]` with 80 halvings.
pub fn mean_value_point<T: Real>(y: &YoungFunction<T>, a: T, b: T) -> MeanValuePoint<T> {
    let level = (y.g(b) - y.g(a)) / (b - a);
    let mut lo = T::zero();
    let mut hi = T::lit(10.0) * a.abs().max(b.abs());
    if !level.is_finite() || y.gprime(hi) < level {
        return MeanValuePoint::BisectionFailure;
    }
    for _ in 0..80 {
        let mid = (lo + hi) / T::lit(2.0);
        if y.gprime(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    MeanValuePoint::Found((lo + hi) / T::lit(2.0))
}

/// Checks `|xi| >= C_0 max(|a|, |b|)`.
pub fn certify_desig<T: Real>(
    y: &YoungFunction<T>,
    n_samples: usize,
    seed: u64,
    range: SampleRange,
) -> InequalityReport {
    let c0 = y.desig_constant();
    let mut rng = rng_from_seed(seed);
    let mut tally = Tally::new();
    for _ in 0..n_samples {
        let (a, b) = loop {
            let (a, b) = (range.draw(&mut rng), range.draw(&mut rng));
            if a != b {
                break (a, b);
            }
        };
        match desig_margin(y, T::lit(a), T::lit(b), c0) {
            Some(m) => tally.record(m, &[a, b]),
            None => tally.bisection_failures += 1,
        }
    }
    tally.finish(
        LemmaId::Desig,
        &y.label,
        seed,
        c0.to_f64_lossy(),
        "min{1/2, (kappa (p- - 1)/(p+ - 1))^(1/(p- - 2))}, kappa = (1 - 2^(1-p-))/(2(p+ - 1)); 1/2 covers same-sign pairs",
        format!("a != b, each {}", range.describe()),
    )
}

pub fn desig_margin<T: Real>(y: &YoungFunction<T>, a: T, b: T, c0: T) -> Option<T> {
    match mean_value_point(y, a, b) {
        MeanValuePoint::Found(xi) => {
            let bound = c0 * a.abs().max(b.abs());
            // bisection resolves xi to ~2^-80 of the bracket, level to round-off
            let s = xi - bound;
            let allowance = T::lit(1e-9) * bound;
            Some(if s < -allowance { s } else { s.max(T::zero()) })
        }
        MeanValuePoint::BisectionFailure => None,
    }
}

/// Checks the power bounds on `g(alpha t)` and `G(alpha t)`; returns the
/// `MinMax_g` and `MinMax_G` reports.
pub fn certify_scaling<T: Real>(
    y: &YoungFunction<T>,
    n_samples: usize,
    seed: u64,
    range: SampleRange,
) -> (InequalityReport, InequalityReport) {
    let mut rng = rng_from_seed(seed);
    let mut small = Tally::new();
    let mut big = Tally::new();
    for _ in 0..n_samples {
        let t = log_uniform(&mut rng, range.log_min, range.log_max);
        let alpha = log_uniform(&mut rng, ALPHA_MIN, ALPHA_MAX);
        let (mg, mbig) = scaling_margins(y, T::lit(alpha), T::lit(t));
        small.record(mg, &[alpha, t]);
        big.record(mbig, &[alpha, t]);
    }
    let domain = format!(
        "t log-uniform in [{:e}, {:e}], alpha log-uniform in [{ALPHA_MIN:e}, {ALPHA_MAX:e}]",
        range.log_min, range.log_max
    );
    (
        small.finish(
            LemmaId::MinMaxG,
            &y.label,
            seed,
            1.0,
            "min/max{alpha^(p- - 1), alpha^(p+ - 1)}",
            domain.clone(),
        ),
        big.finish(
            LemmaId::MinMaxBigG,
            &y.label,
            seed,
            y.p_plus.to_f64_lossy(),
            "min{alpha^p-, alpha^p+}/p+ and p+ max{alpha^p-, alpha^p+}",
            domain,
        ),
    )
}

pub const ALPHA_MIN: f64 = 1e-3;
pub const ALPHA_MAX: f64 = 1e3;

/// Worst slacks of the two-sided `g` and `G` scaling bounds.
pub fn scaling_margins<T: Real>(y: &YoungFunction<T>, alpha: T, t: T) -> (T, T) {
    let one = T::one();
    let (pm, pp) = (y.p_minus, y.p_plus);
    let a_lo = alpha.powf(pm - one);
    let a_hi = alpha.powf(pp - one);
    let gt = y.g(t);
    let gat = y.g(alpha * t);
    let m_g = slack(a_lo.min(a_hi) * gt, gat, gat).min(slack(gat, a_lo.max(a_hi) * gt, gat));

    let b_lo = alpha.powf(pm);
    let b_hi = alpha.powf(pp);
    let big_t = y.big_g(t);
    let big_at = y.big_g(alpha * t);
    let m_big = slack(b_lo.min(b_hi) / pp * big_t, big_at, big_at)
        .min(slack(big_at, pp * b_lo.max(b_hi) * big_t, big_at));
    (m_g, m_big)
}

/// Checks the doubling consequences on nonnegative pairs.
pub fn certify_delta2<T: Real>(
    y: &YoungFunction<T>,
    n_samples: usize,
    seed: u64,
    range: SampleRange,
) -> InequalityReport {
    let mut rng = rng_from_seed(seed);
    let mut tally = Tally::new();
    for _ in 0..n_samples {
        let (a, b) = (range.draw_nonneg(&mut rng), range.draw_nonneg(&mut rng));
        tally.record(delta2_margin(y, T::lit(a), T::lit(b)), &[a, b]);
    }
    tally.finish(
        LemmaId::Delta2Sum,
        &y.label,
        seed,
        y.c1_delta2().to_f64_lossy(),
        "C_1 = 2^(p+ - 1) for g, C_2 = 2^p+ for G, from g(a + b) <= g(2 max(a, b))",
        format!("a, b >= 0, magnitudes of {}", range.describe()),
    )
}

pub fn delta2_margin<T: Real>(y: &YoungFunction<T>, a: T, b: T) -> T {
    let lhs_g = y.g(a + b);
    let rhs_g = y.c1_delta2() * (y.g(a) + y.g(b));
    let lhs_big = y.big_g(a + b);
    let rhs_big = y.c2_delta2() * (y.big_g(a) + y.big_g(b));
    slack(lhs_g, rhs_g, lhs_g).min(slack(lhs_big, rhs_big, lhs_big))
}

/// Runs every certifier with seeds derived from `seed`.
pub fn certify_all<T: Real>(
    y: &YoungFunction<T>,
    n_samples: usize,
    seed: u64,
    range: SampleRange,
) -> Vec<InequalityReport> {
    let (mg, mbig) = certify_scaling(y, n_samples, seed.wrapping_add(3), range);
    vec![
        certify_lemma22(y, n_samples, seed, range),
        certify_lemita(y, n_samples, seed.wrapping_add(1), range),
        certify_desig(y, n_samples, seed.wrapping_add(2), range),
        mg,
        mbig,
        certify_delta2(y, n_samples, seed.wrapping_add(4), range),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young::{make_builtin, FamilyKind};

    fn power3() -> YoungFunction<f64> {
        make_builtin(FamilyKind::Power, &[3.0]).unwrap()
    }

    #[test]
    fn lemma22_hand_example() {
        let y = power3();
        let c = y.lemma22_constant();
        assert_eq!(c, 0.25);
        assert_eq!(lemma22_margin(&y, 0.0, 1.0, c), 2.25);
        for t in [-3.0, 0.0, 0.7, 1e4] {
            assert_eq!(lemma22_margin(&y, t, t, c), 0.0);
        }
    }

    #[test]
    fn lemita_hand_example() {
        let y = power3();
        // |g(2) - g(1)| = 9 <= g'(2) = 12
        assert_eq!(lemita_margin(&y, 1.0, 1.0), 3.0);
        assert_eq!(lemita_margin(&y, 5.0, 0.0), 0.0);
    }

    #[test]
    fn desig_opposite_signs_closed_form() {
        let y = power3();
        match mean_value_point(&y, -1.0, 1.0) {
            // g'(xi) = 6 xi = (g(1) - g(-1))/2 = 3
            MeanValuePoint::Found(xi) => assert!((xi - 0.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let eps = 1e-3;
        match mean_value_point(&y, 1.0, 1.0 + eps) {
            MeanValuePoint::Found(xi) => assert!(xi > 1.0 && xi < 1.0 + eps),
            other => panic!("{other:?}"),
        }
        assert!(desig_margin(&y, -1.0, 1.0, y.desig_constant()).unwrap() > 0.0);
    }

    #[test]
    fn same_sign_mean_value_point_can_sit_below_the_larger_endpoint() {
        // xi = (a + b)/2 for g' linear: C_0 = 1 would fail, 1/2 does not
        let y = power3();
        match mean_value_point(&y, 1.0, 2.0) {
            MeanValuePoint::Found(xi) => assert!((xi - 1.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(desig_margin(&y, 1.0, 2.0, 1.0).unwrap() < 0.0);
        assert!(desig_margin(&y, 1.0, 2.0, y.desig_constant()).unwrap() > 0.0);
    }

    #[test]
    fn scaling_equalities() {
        let y = power3();
        let (mg, mbig) = scaling_margins(&y, 1.0, 3.7);
        assert_eq!(mg, 0.0);
        assert!(mbig >= 0.0);
        // g(2) = 12 = 4 * g(1) on both sides
        let (mg, _) = scaling_margins(&y, 2.0, 1.0);
        assert_eq!(mg, 0.0);
    }

    #[test]
    fn small_scans_pass() {
        let y = make_builtin(FamilyKind::DoublePhase, &[3.0, 4.0]).unwrap();
        for r in certify_all(&y, 2000, 11, SampleRange::default()) {
            assert!(r.passed(), "{r:?}");
            assert!(r.worst_margin >= 0.0);
        }
    }

    #[test]
    fn broken_constant_is_caught() {
        // pretend the ellipticity bound is 3.5 for a 3-power: the scaling scan must flag it
        let mut y = power3();
        y.p_minus = 3.5;
        y.p_plus = 3.5;
        let (mg, _) = certify_scaling(&y, 500, 1, SampleRange::default());
        assert!(mg.n_violations > 0);
        assert!(mg.worst_margin < 0.0);
    }
}
