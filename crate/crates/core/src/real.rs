//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Surface measure of the unit sphere in `R^n` (2 for `n = 1`).
pub fn unit_sphere_measure<T: Real>(n: usize) -> T {
    match n {
        1 => T::lit(2.0),
        2 => T::lit(2.0) * T::PI(),
        3 => T::lit(4.0) * T::PI(),
        _ => {
            // 2 pi^{n/2} / Gamma(n/2), via the recursion |S^{n-1}| = 2 pi |S^{n-3}| / (n - 2)
            let mut m = if n.is_multiple_of(2) { T::lit(2.0) * T::PI() } else { T::lit(2.0) };
            let mut k = if n.is_multiple_of(2) { 2 } else { 1 };
            while k < n {
                m = m * T::lit(2.0) * T::PI() / T::from_usize_lossy(k);
                k += 2;
            }
            m
        }
    }
}

pub(crate) fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&a| a * a).sum::<T>().sqrt()
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_measures() {
        assert_eq!(unit_sphere_measure::<f64>(1), 2.0);
        assert!((unit_sphere_measure::<f64>(2) - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_sphere_measure::<f64>(3) - 4.0 * std::f64::consts::PI).abs() < 1e-14);
        // |S^3| = 2 pi^2
        let s3 = unit_sphere_measure::<f64>(4);
        assert!((s3 - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }
}
