//! Fields given by closed-form callbacks.

use std::fmt;
use std::sync::Arc;

use super::{sphere_crossings, Break, BreakKind, Decay, ScalarField, TailProfile};
use crate::error::{Error, Result};
use crate::real::{dist, norm, Real};

type ValueFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
type GradFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;

/// A callback `u(x)` with an optional gradient, plus what is known about its
/// size at infinity and the spheres where it is not smooth.
#[derive(Clone)]
pub struct AnalyticField<T> {
    dim: usize,
    label: String,
    value: ValueFn<T>,
    gradient: Option<GradFn<T>>,
    profile: TailProfile<T>,
    kinks: Vec<(Vec<T>, T)>,
}

impl<T: Real> fmt::Debug for AnalyticField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticField")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("profile", &self.profile)
            .finish()
    }
}

impl<T: Real> AnalyticField<T> {
    /// `profile` must be truthful: the operator's tail bound relies on it.
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        value: impl Fn(&[T]) -> T + Send + Sync + 'static,
        profile: TailProfile<T>,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidField(format!(
                "analytic fields live in dimension 1 to 3, got {dim}"
            )));
        }
        Ok(Self {
            dim,
            label: label.into(),
            value: Arc::new(value),
            gradient: None,
            profile,
            kinks: Vec::new(),
        })
    }

    pub fn with_gradient(mut self, grad: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(grad));
        self
    }

    /// Declares a sphere across which second derivatives jump.
    pub fn with_kink_sphere(mut self, center: Vec<T>, radius: T) -> Self {
        self.kinks.push((center, radius));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub(crate) fn profile(&self) -> TailProfile<T> {
        self.profile
    }

    pub fn value(&self, x: &[T]) -> T {
        (self.value)(x)
    }

    fn step(x: &[T]) -> T {
        T::lit(1e-3) * (T::one() + norm(x))
    }

    /// Analytic gradient when supplied, else fourth-order central differences.
    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        if let Some(g) = &self.gradient {
            return g(x);
        }
        let h = Self::step(x);
        let mut y = x.to_vec();
        (0..self.dim)
            .map(|k| {
                let mut at = |d: T| {
                    y[k] = x[k] + d;
                    let v = self.value(&y);
                    y[k] = x[k];
                    v
                };
                let two = T::lit(2.0);
                (at(-two * h) - T::lit(8.0) * at(-h) + T::lit(8.0) * at(h) - at(two * h))
                    / (T::lit(12.0) * h)
            })
            .collect()
    }

    /// Fourth-order central differences of the gradient, symmetrised.
    pub fn hessian(&self, x: &[T]) -> Vec<T> {
        let n = self.dim;
        let h = Self::step(x);
        let mut out = vec![T::zero(); n * n];
        let mut y = x.to_vec();
        for j in 0..n {
            let mut at = |d: T| {
                y[j] = x[j] + d;
                let g = self.gradient(&y);
                y[j] = x[j];
                g
            };
            let two = T::lit(2.0);
            let (gm2, gm1, gp1, gp2) = (at(-two * h), at(-h), at(h), at(two * h));
            for i in 0..n {
                out[i * n + j] = (gm2[i] - T::lit(8.0) * gm1[i] + T::lit(8.0) * gp1[i] - gp2[i])
                    / (T::lit(12.0) * h);
            }
        }
        for i in 0..n {
            for j in 0..i {
                let m = (out[i * n + j] + out[j * n + i]) / T::lit(2.0);
                out[i * n + j] = m;
                out[j * n + i] = m;
            }
        }
        out
    }

    pub(crate) fn c11_check(&self, x: &[T]) -> Result<()> {
        for (c, r) in &self.kinks {
            // the kink is only a jump in second derivatives; flag points on it
            if (dist(x, c) - *r).abs() <= T::lit(1e-12) * *r {
                return Err(Error::NotC11At {
                    x: x.iter().map(|v| v.to_f64_lossy()).collect(),
                    reason: "on a declared kink sphere".into(),
                });
            }
        }
        Ok(())
    }

    pub(crate) fn ray_breaks(&self, x: &[T], e: &[T]) -> Vec<Break<T>> {
        self.kinks
            .iter()
            .flat_map(|(c, r)| sphere_crossings(x, e, c, *r))
            .map(|r| Break {
                r,
                kind: BreakKind::Kink,
            })
            .collect()
    }
}

fn radial_offset<T: Real>(x: &[T], c: &[T]) -> (Vec<T>, T) {
    let d: Vec<T> = x.iter().zip(c).map(|(&a, &b)| a - b).collect();
    let r2 = d.iter().map(|&v| v * v).sum();
    (d, r2)
}

impl<T: Real> ScalarField<T> {
    pub fn constant(dim: usize, c: T) -> Self {
        AnalyticField::new(
            dim,
            format!("constant({c})"),
            move |_| c,
            TailProfile {
                sup_bound: c.abs(),
                zero_beyond: (c == T::zero()).then_some(T::zero()),
                decay: Some(Decay {
                    c: c.abs(),
                    beta: T::zero(),
                    r0: T::zero(),
                }),
            },
        )
        .expect("dimension checked by caller")
        .with_gradient(move |x| vec![T::zero(); x.len()])
        .into()
    }

    /// `u(x) = x_axis`.
    pub fn coordinate(dim: usize, axis: usize) -> Self {
        AnalyticField::new(
            dim,
            format!("x_{axis}"),
            move |x| x[axis],
            TailProfile {
                sup_bound: T::infinity(),
                zero_beyond: None,
                decay: Some(Decay {
                    c: T::one(),
                    beta: -T::one(),
                    r0: T::zero(),
                }),
            },
        )
        .expect("dimension 1 to 3")
        .with_gradient(move |x| {
            let mut g = vec![T::zero(); x.len()];
            g[axis] = T::one();
            g
        })
        .into()
    }

    /// `amplitude * exp(-|x - center|^2 / width^2)`.
    pub fn gaussian(center: Vec<T>, amplitude: T, width: T) -> Self {
        let dim = center.len();
        let w2 = width * width;
        // exp(-z) <= (2/e)^2 z^-2 and |x - c| >= |x|/2 once |x| >= 2|c|
        let k = T::lit(2.0) / T::E();
        let decay_c = amplitude.abs() * k * k * T::lit(16.0) * w2 * w2;
        let profile = TailProfile {
            sup_bound: amplitude.abs(),
            zero_beyond: None,
            decay: Some(Decay {
                c: decay_c,
                beta: T::lit(4.0),
                r0: T::lit(2.0) * norm(&center),
            }),
        };
        let c1 = center.clone();
        AnalyticField::new(
            dim,
            format!("gaussian(amplitude {amplitude}, width {width})"),
            move |x| {
                let (_, r2) = radial_offset(x, &c1);
                amplitude * (-r2 / w2).exp()
            },
            profile,
        )
        .expect("dimension 1 to 3")
        .with_gradient(move |x| {
            let (d, r2) = radial_offset(x, &center);
            let v = amplitude * (-r2 / w2).exp();
            d.into_iter().map(|z| T::lit(-2.0) * z / w2 * v).collect()
        })
        .into()
    }

    /// Smooth compactly supported bump `exp(1 - 1/(1 - t^2))`, `t = |x - c|/radius`,
    /// equal to 1 at the center and 0 for `t >= 1`.
    pub fn bump(center: Vec<T>, radius: T) -> Self {
        let dim = center.len();
        let profile = TailProfile {
            sup_bound: T::one(),
            zero_beyond: Some(norm(&center) + radius),
            decay: None,
        };
        let c1 = center.clone();
        let r2 = radius * radius;
        AnalyticField::new(
            dim,
            format!("bump(radius {radius})"),
            move |x| {
                let (_, d2) = radial_offset(x, &c1);
                let t2 = d2 / r2;
                if t2 >= T::one() {
                    T::zero()
                } else {
                    (T::one() - T::one() / (T::one() - t2)).exp()
                }
            },
            profile,
        )
        .expect("dimension 1 to 3")
        .with_gradient(move |x| {
            let (d, d2) = radial_offset(x, &center);
            let t2 = d2 / r2;
            if t2 >= T::one() {
                return vec![T::zero(); d.len()];
            }
            let m = T::one() - t2;
            let v = (T::one() - T::one() / m).exp();
            // d/dx_k: v * (-1/m^2) * 2 x_k / r^2
            d.into_iter()
                .map(|z| -v / (m * m) * T::lit(2.0) * z / r2)
                .collect()
        })
        .into()
    }

    /// `(1 - |x - c|^2 / radius^2)_+^2`.
    pub fn poly_bump(center: Vec<T>, radius: T) -> Self {
        let dim = center.len();
        let profile = TailProfile {
            sup_bound: T::one(),
            zero_beyond: Some(norm(&center) + radius),
            decay: None,
        };
        let c1 = center.clone();
        let r2 = radius * radius;
        AnalyticField::new(
            dim,
            format!("poly_bump(radius {radius})"),
            move |x| {
                let (_, d2) = radial_offset(x, &c1);
                let m = (T::one() - d2 / r2).max(T::zero());
                m * m
            },
            profile,
        )
        .expect("dimension 1 to 3")
        .with_gradient({
            let center = center.clone();
            move |x| {
                let (d, d2) = radial_offset(x, &center);
                let m = (T::one() - d2 / r2).max(T::zero());
                d.into_iter()
                    .map(|z| T::lit(-4.0) * m * z / r2)
                    .collect()
            }
        })
        .with_kink_sphere(center, radius)
        .into()
    }

    /// `(1 + |x - c|^2)^{-2}`.
    pub fn algebraic_decay(center: Vec<T>) -> Self {
        let dim = center.len();
        let profile = TailProfile {
            sup_bound: T::one(),
            zero_beyond: None,
            decay: Some(Decay {
                c: T::lit(16.0),
                beta: T::lit(4.0),
                r0: T::lit(2.0) * norm(&center),
            }),
        };
        let c1 = center.clone();
        AnalyticField::new(
            dim,
            "algebraic_decay(exponent 4)",
            move |x| {
                let (_, d2) = radial_offset(x, &c1);
                let q = T::one() + d2;
                T::one() / (q * q)
            },
            profile,
        )
        .expect("dimension 1 to 3")
        .with_gradient(move |x| {
            let (d, d2) = radial_offset(x, &center);
            let q = T::one() + d2;
            d.into_iter()
                .map(|z| T::lit(-4.0) * z / (q * q * q))
                .collect()
        })
        .into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_gradient(u: &ScalarField<f64>, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|k| {
                let mut p = x.to_vec();
                let mut m = x.to_vec();
                p[k] += h;
                m[k] -= h;
                (u.sample(&p) - u.sample(&m)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn builtin_values() {
        assert_eq!(ScalarField::<f64>::gaussian(vec![0.0, 0.0], 1.0, 1.0).sample(&[0.0, 0.0]), 1.0);
        assert_eq!(ScalarField::<f64>::bump(vec![0.0], 1.0).sample(&[0.0]), 1.0);
        assert_eq!(ScalarField::<f64>::bump(vec![0.0], 1.0).sample(&[1.0]), 0.0);
        assert_eq!(ScalarField::<f64>::poly_bump(vec![0.0], 1.0).sample(&[0.5]), 0.5625);
        assert_eq!(ScalarField::<f64>::constant(2, 5.0).sample(&[3.0, 1.0]), 5.0);
    }

    #[test]
    fn analytic_gradients_match_differences() {
        let x = [0.31, -0.22];
        for u in [
            ScalarField::<f64>::gaussian(vec![0.1, 0.2], 1.5, 0.8),
            ScalarField::bump(vec![0.0, 0.1], 1.0),
            ScalarField::poly_bump(vec![0.0, 0.0], 1.0),
            ScalarField::algebraic_decay(vec![0.2, 0.0]),
        ] {
            let g = u.gradient(&x);
            let fd = fd_gradient(&u, &x);
            for k in 0..2 {
                assert!((g[k] - fd[k]).abs() < 1e-7, "{u:?}");
            }
        }
    }

    #[test]
    fn hessian_of_gaussian() {
        let u = ScalarField::<f64>::gaussian(vec![0.0], 1.0, 1.0);
        let x = 0.4f64;
        let h = u.hessian(&[x]);
        let exact = (4.0 * x * x - 2.0) * (-x * x).exp();
        assert!((h[0] - exact).abs() < 1e-9);
    }

    #[test]
    fn finite_difference_gradient_without_callback() {
        let u: ScalarField<f64> = AnalyticField::new(
            2,
            "sin",
            |x: &[f64]| x[0].sin() * x[1].cos(),
            TailProfile {
                sup_bound: 1.0,
                zero_beyond: None,
                decay: None,
            },
        )
        .unwrap()
        .into();
        let g = u.gradient(&[0.3, 0.4]);
        assert!((g[0] - 0.3f64.cos() * 0.4f64.cos()).abs() < 1e-10);
        assert!((g[1] + 0.3f64.sin() * 0.4f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn gaussian_decay_declaration_holds() {
        let u = ScalarField::<f64>::gaussian(vec![0.5, 0.0], 2.0, 0.7);
        let d = u.tail_profile().decay.unwrap();
        for r in [1.0, 2.0, 5.0, 20.0] {
            for x in [[r, 0.0], [-r, 0.0], [0.0, r]] {
                if r >= d.r0 {
                    assert!(u.sample(&x).abs() <= d.c * r.powf(-d.beta));
                }
            }
        }
    }
}
