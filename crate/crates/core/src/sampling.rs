//! Seeded sampling used by the inequality certifiers and the audit probe sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mixture used to draw signed scalars: half the draws are uniform on
/// `[-linear, linear]`, the other half have a log-uniform magnitude in
/// `[log_min, log_max]` with a random sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRange {
    pub linear: f64,
    pub log_min: f64,
    pub log_max: f64,
}

impl Default for SampleRange {
    fn default() -> Self {
        Self {
            linear: 1e3,
            log_min: 1e-6,
            log_max: 1e6,
        }
    }
}

impl SampleRange {
    pub fn symmetric(linear: f64) -> Self {
        Self {
            linear,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.linear > 0.0 && self.log_min > 0.0 && self.log_max > self.log_min) {
            return Err(Error::InvalidRange(format!("{self:?}")));
        }
        if !(self.linear.is_finite() && self.log_max.is_finite()) {
            return Err(Error::InvalidRange(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        format!(
            "uniform on [-{l:e}, {l:e}] mixed 1:1 with sign * log-uniform magnitude in [{a:e}, {b:e}]",
            l = self.linear,
            a = self.log_min,
            b = self.log_max
        )
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        if rng.gen_bool(0.5) {
            rng.gen_range(-self.linear..=self.linear)
        } else {
            let mag = log_uniform(rng, self.log_min, self.log_max);
            if rng.gen_bool(0.5) {
                mag
            } else {
                -mag
            }
        }
    }

    /// Nonnegative draw from the same mixture.
    pub fn draw_nonneg(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.draw(rng).abs()
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    rng.gen_range(a..=b).exp()
}

/// `i`-th point of the Halton sequence in `[0,1)^dim` (bases 2, 3, 5).
pub fn halton(i: usize, dim: usize) -> Vec<f64> {
    const BASES: [usize; 3] = [2, 3, 5];
    (0..dim).map(|d| radical_inverse(i + 1, BASES[d])).collect()
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while i > 0 {
        f /= b;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Quasi-random points filling the ball of radius `radius` around `center`.
pub fn halton_ball(center: &[f64], radius: f64, count: usize) -> Vec<Vec<f64>> {
    let dim = center.len();
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    while out.len() < count {
        let h = halton(i, dim);
        i += 1;
        let p: Vec<f64> = h.iter().map(|&a| 2.0 * a - 1.0).collect();
        if p.iter().map(|a| a * a).sum::<f64>() < 1.0 {
            out.push(p.iter().zip(center).map(|(a, c)| c + radius * a).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_reproducible() {
        let r = SampleRange::default();
        let mut a = rng_from_seed(7);
        let mut b = rng_from_seed(7);
        for _ in 0..100 {
            assert_eq!(r.draw(&mut a).to_bits(), r.draw(&mut b).to_bits());
        }
    }

    #[test]
    fn halton_points_stay_in_ball() {
        let pts = halton_ball(&[1.0, -1.0], 0.5, 200);
        assert_eq!(pts.len(), 200);
        for p in pts {
            let d = ((p[0] - 1.0).powi(2) + (p[1] + 1.0).powi(2)).sqrt();
            assert!(d < 0.5);
        }
        assert_eq!(halton(0, 2), vec![0.5, 1.0 / 3.0]);
    }

    #[test]
    fn invalid_range_rejected() {
        let r = SampleRange {
            linear: 1.0,
            log_min: 1.0,
            log_max: 0.5,
        };
        assert!(r.validate().is_err());
    }
}
