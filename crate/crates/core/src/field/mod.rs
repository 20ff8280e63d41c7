//! Functions `u: R^n -> R` evaluated by the operator: grid samples with spline
//! interpolation, analytic callbacks, isometric images and linear combinations.

mod analytic;
mod grid;
pub mod io;
mod tail;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{dist, norm, Real};

pub use analytic::AnalyticField;
pub use grid::{GridField, GridSpec};
pub use tail::{check_tail_membership, TailReport};

/// Continuation of a grid field outside its box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ExteriorModel<T> {
    Zero,
    /// `u(x) = c |x|^{-beta}`.
    PowerDecay { c: T, beta: T },
}

impl<T: Real> ExteriorModel<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ExteriorModel::Zero => Ok(()),
            ExteriorModel::PowerDecay { c, beta } => {
                if c.is_finite() && beta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidField("exterior decay parameters must be finite".into()))
                }
            }
        }
    }

    fn jet(&self, x: &[T], order: usize) -> (T, Vec<T>, Vec<T>) {
        let n = x.len();
        match *self {
            ExteriorModel::Zero => (T::zero(), vec![T::zero(); n], vec![T::zero(); n * n]),
            ExteriorModel::PowerDecay { c, beta } => {
                let r = norm(x).max(T::min_positive_value());
                let v = c * r.powf(-beta);
                let mut g = vec![T::zero(); n];
                let mut h = vec![T::zero(); n * n];
                if order >= 1 {
                    let a = -beta * v / (r * r);
                    for k in 0..n {
                        g[k] = a * x[k];
                    }
                    if order >= 2 {
                        let b = -beta * (-beta - T::lit(2.0)) * v / (r * r * r * r);
                        for i in 0..n {
                            for j in 0..n {
                                let d = if i == j { a } else { T::zero() };
                                h[i * n + j] = d + b * x[i] * x[j];
                            }
                        }
                    }
                }
                (v, g, h)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ExteriorModel::Zero => "zero".into(),
            ExteriorModel::PowerDecay { c, beta } => format!("power_decay({c},{beta})"),
        }
    }
}

/// Ball outside which a field vanishes. For one-dimensional grid fields a
/// positive `exponent` selects the boundary weight `((R^2-|x-c|^2)/R^2)^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportBall<T> {
    pub center: Vec<T>,
    pub radius: T,
    pub exponent: T,
}

impl<T: Real> SupportBall<T> {
    pub fn new(center: Vec<T>, radius: T, exponent: T) -> Result<Self> {
        let b = Self {
            center,
            radius,
            exponent,
        };
        b.validate(b.center.len())?;
        Ok(b)
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.center.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.center.len(),
            });
        }
        if !(self.radius > T::zero() && self.radius.is_finite()) {
            return Err(Error::InvalidField("support radius must be positive".into()));
        }
        if !(self.exponent >= T::zero() && self.exponent < T::one()) {
            return Err(Error::InvalidField("support exponent must lie in [0,1)".into()));
        }
        Ok(())
    }

    pub fn distance_to_center(&self, x: &[T]) -> T {
        dist(x, &self.center)
    }

    /// Open ball membership.
    pub fn contains(&self, x: &[T]) -> bool {
        self.distance_to_center(x) < self.radius
    }

    pub fn weight(&self, x: &[T]) -> T {
        let r2 = self.radius * self.radius;
        let d = self.distance_to_center(x);
        let q = (r2 - d * d) / r2;
        if q <= T::zero() {
            T::zero()
        } else {
            q.powf(self.exponent)
        }
    }

    /// Weight with its first two derivatives in one dimension.
    fn weight_jet_1d(&self, x: T) -> (T, T, T) {
        let r2 = self.radius * self.radius;
        let z = x - self.center[0];
        let q = (r2 - z * z) / r2;
        if q <= T::zero() {
            return (T::zero(), T::zero(), T::zero());
        }
        let a = self.exponent;
        let w = q.powf(a);
        let dq = T::lit(-2.0) * z / r2;
        let d2q = T::lit(-2.0) / r2;
        let dw = a * w / q * dq;
        let d2w = a * (a - T::one()) * w / (q * q) * dq * dq + a * w / q * d2q;
        (w, dw, d2w)
    }

    /// Positive parameters where the ray `x + r e` crosses the sphere.
    fn ray_crossings(&self, x: &[T], e: &[T]) -> Vec<T> {
        sphere_crossings(x, e, &self.center, self.radius)
    }
}

fn sphere_crossings<T: Real>(x: &[T], e: &[T], c: &[T], radius: T) -> Vec<T> {
    // |x - c + r e|^2 = R^2 with |e| = 1
    let d: Vec<T> = x.iter().zip(c).map(|(&a, &b)| a - b).collect();
    let b = d.iter().zip(e).map(|(&p, &q)| p * q).sum::<T>();
    let cc = d.iter().map(|&p| p * p).sum::<T>() - radius * radius;
    let disc = b * b - cc;
    if disc < T::zero() {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let mut out: Vec<T> = [-b - sq, -b + sq]
        .into_iter()
        .filter(|&r| r > T::zero())
        .collect();
    out.dedup();
    out
}

/// How a field fails to be smooth at a point of a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BreakKind<T> {
    /// Continuous with a jump in some derivative.
    Kink,
    /// Jump in the value.
    Jump,
    /// Behaves like `dist^a` on one side.
    Algebraic(T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Break<T> {
    pub r: T,
    pub kind: BreakKind<T>,
}

/// `|u(x)| <= c |x|^{-beta}` for `|x| >= r0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decay<T> {
    pub c: T,
    pub beta: T,
    pub r0: T,
}

/// Global information used to bound integrals at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailProfile<T> {
    /// Upper bound for `sup |u|` (may be infinite).
    pub sup_bound: T,
    /// `u` vanishes for `|x| >= zero_beyond`.
    pub zero_beyond: Option<T>,
    pub decay: Option<Decay<T>>,
}

/// Rigid motion `x -> q x + b`; `q` is orthogonal, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry<T> {
    pub q: Vec<T>,
    pub b: Vec<T>,
    reflection: Option<(usize, T)>,
}

impl<T: Real> Isometry<T> {
    pub fn new(q: Vec<T>, b: Vec<T>) -> Result<Self> {
        let n = b.len();
        if q.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: q.len(),
            });
        }
        // orthogonality to round-off
        for i in 0..n {
            for j in 0..n {
                let s: T = (0..n).map(|k| q[k * n + i] * q[k * n + j]).sum();
                let target = if i == j { T::one() } else { T::zero() };
                if (s - target).abs() > T::lit(1e-6).max(T::epsilon() * T::lit(64.0)) {
                    return Err(Error::InvalidField("matrix is not orthogonal".into()));
                }
            }
        }
        Ok(Self {
            q,
            b,
            reflection: None,
        })
    }

    /// Reflection across `{x_axis = lambda}`.
    pub fn reflection(dim: usize, axis: usize, lambda: T) -> Result<Self> {
        if axis >= dim {
            return Err(Error::InvalidField(format!(
                "axis {axis} out of range for dimension {dim}"
            )));
        }
        let mut q = vec![T::zero(); dim * dim];
        for i in 0..dim {
            q[i * dim + i] = if i == axis { -T::one() } else { T::one() };
        }
        let mut b = vec![T::zero(); dim];
        b[axis] = T::lit(2.0) * lambda;
        Ok(Self {
            q,
            b,
            reflection: Some((axis, lambda)),
        })
    }

    /// Rotation by `theta` in the plane.
    pub fn rotation_2d(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            q: vec![c, -s, s, c],
            b: vec![T::zero(); 2],
            reflection: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        if let Some((axis, lambda)) = self.reflection {
            let mut y = x.to_vec();
            y[axis] = T::lit(2.0) * lambda - x[axis];
            return y;
        }
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|k| self.q[i * n + k] * x[k]).sum::<T>() + self.b[i])
            .collect()
    }

    fn apply_linear(&self, v: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|k| self.q[i * n + k] * v[k]).sum())
            .collect()
    }

    pub fn transpose_apply(&self, v: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|k| self.q[k * n + i] * v[k]).sum())
            .collect()
    }

    /// `q^T h q` for a row-major symmetric matrix.
    fn conjugate(&self, h: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut out = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = T::zero();
                for a in 0..n {
                    for b in 0..n {
                        s = s + self.q[a * n + i] * h[a * n + b] * self.q[b * n + j];
                    }
                }
                out[i * n + j] = s;
            }
        }
        out
    }
}

/// A function on `R^n`, cheap to clone.
#[derive(Clone)]
pub enum ScalarField<T> {
    Grid(Arc<GridField<T>>),
    Analytic(Arc<AnalyticField<T>>),
    /// `x -> base(iso(x))`.
    Mapped {
        base: Box<ScalarField<T>>,
        iso: Arc<Isometry<T>>,
    },
    /// `x -> sum_k w_k u_k(x)`.
    Sum(Arc<Vec<(T, ScalarField<T>)>>),
}

impl<T: Real> fmt::Debug for ScalarField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl<T: Real> From<GridField<T>> for ScalarField<T> {
    fn from(g: GridField<T>) -> Self {
        ScalarField::Grid(Arc::new(g))
    }
}

impl<T: Real> From<AnalyticField<T>> for ScalarField<T> {
    fn from(a: AnalyticField<T>) -> Self {
        ScalarField::Analytic(Arc::new(a))
    }
}

impl<T: Real> ScalarField<T> {
    pub fn dim(&self) -> usize {
        match self {
            ScalarField::Grid(g) => g.dim(),
            ScalarField::Analytic(a) => a.dim(),
            ScalarField::Mapped { iso, .. } => iso.dim(),
            ScalarField::Sum(terms) => terms[0].1.dim(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ScalarField::Grid(g) => format!(
                "grid({}d, {} nodes, exterior {})",
                g.dim(),
                g.spec().len(),
                g.exterior().describe()
            ),
            ScalarField::Analytic(a) => a.label().to_string(),
            ScalarField::Mapped { base, iso } => match iso.reflection {
                Some((axis, lambda)) => format!("reflect({}, axis {axis}, lambda {lambda})", base.label()),
                None => format!("isometric image of {}", base.label()),
            },
            ScalarField::Sum(terms) => terms
                .iter()
                .map(|(w, u)| format!("{w}*{}", u.label()))
                .collect::<Vec<_>>()
                .join(" + "),
        }
    }

    pub fn as_grid(&self) -> Option<&GridField<T>> {
        match self {
            ScalarField::Grid(g) => Some(g),
            _ => None,
        }
    }

    /// Grid spacing of the finest grid the field is built from.
    pub fn resolution(&self) -> Option<T> {
        match self {
            ScalarField::Grid(g) => Some(g.spec().spacing),
            ScalarField::Analytic(_) => None,
            ScalarField::Mapped { base, .. } => base.resolution(),
            ScalarField::Sum(terms) => terms
                .iter()
                .filter_map(|(_, u)| u.resolution())
                .fold(None, |m: Option<T>, h| Some(m.map_or(h, |m| m.min(h)))),
        }
    }

    /// Value at `x`.
    pub fn sample(&self, x: &[T]) -> T {
        match self {
            ScalarField::Grid(g) => g.value(x),
            ScalarField::Analytic(a) => a.value(x),
            ScalarField::Mapped { base, iso } => base.sample(&iso.apply(x)),
            ScalarField::Sum(terms) => terms.iter().map(|(w, u)| *w * u.sample(x)).sum(),
        }
    }

    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        match self {
            ScalarField::Grid(g) => g.jet(x, 1).1,
            ScalarField::Analytic(a) => a.gradient(x),
            ScalarField::Mapped { base, iso } => iso.transpose_apply(&base.gradient(&iso.apply(x))),
            ScalarField::Sum(terms) => {
                let mut acc = vec![T::zero(); x.len()];
                for (w, u) in terms.iter() {
                    for (a, g) in acc.iter_mut().zip(u.gradient(x)) {
                        *a = *a + *w * g;
                    }
                }
                acc
            }
        }
    }

    /// Row-major Hessian.
    pub fn hessian(&self, x: &[T]) -> Vec<T> {
        match self {
            ScalarField::Grid(g) => g.jet(x, 2).2,
            ScalarField::Analytic(a) => a.hessian(x),
            ScalarField::Mapped { base, iso } => iso.conjugate(&base.hessian(&iso.apply(x))),
            ScalarField::Sum(terms) => {
                let n = x.len();
                let mut acc = vec![T::zero(); n * n];
                for (w, u) in terms.iter() {
                    for (a, h) in acc.iter_mut().zip(u.hessian(x)) {
                        *a = *a + *w * h;
                    }
                }
                acc
            }
        }
    }

    /// Errors when `x` is a point where the field cannot serve as a `C^{1,1}`
    /// function for the near-field expansion.
    pub fn c11_check(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotC11At {
                x: x.iter().map(|v| v.to_f64_lossy()).collect(),
                reason: "point is not finite".into(),
            });
        }
        match self {
            ScalarField::Grid(g) => g.c11_check(x),
            ScalarField::Analytic(a) => a.c11_check(x),
            ScalarField::Mapped { base, iso } => base.c11_check(&iso.apply(x)).map_err(|e| match e {
                Error::NotC11At { reason, .. } => Error::NotC11At {
                    x: x.iter().map(|v| v.to_f64_lossy()).collect(),
                    reason,
                },
                other => other,
            }),
            ScalarField::Sum(terms) => terms.iter().try_for_each(|(_, u)| u.c11_check(x)),
        }
    }

    /// Non-smooth points along the ray `x + r e`, `r > 0`, unsorted.
    pub fn ray_breaks(&self, x: &[T], e: &[T]) -> Vec<Break<T>> {
        match self {
            ScalarField::Grid(g) => g.ray_breaks(x, e),
            ScalarField::Analytic(a) => a.ray_breaks(x, e),
            ScalarField::Mapped { base, iso } => {
                base.ray_breaks(&iso.apply(x), &iso.apply_linear(e))
            }
            ScalarField::Sum(terms) => terms.iter().flat_map(|(_, u)| u.ray_breaks(x, e)).collect(),
        }
    }

    pub fn tail_profile(&self) -> TailProfile<T> {
        match self {
            ScalarField::Grid(g) => g.tail_profile(),
            ScalarField::Analytic(a) => a.profile(),
            ScalarField::Mapped { base, iso } => {
                let p = base.tail_profile();
                let shift = norm(&iso.b);
                TailProfile {
                    sup_bound: p.sup_bound,
                    zero_beyond: p.zero_beyond.map(|z| z + shift),
                    decay: p.decay.map(|d| Decay {
                        c: d.c * T::lit(2.0).powf(d.beta.abs()),
                        beta: d.beta,
                        r0: (d.r0 + shift).max(T::lit(2.0) * shift),
                    }),
                }
            }
            ScalarField::Sum(terms) => {
                let profiles: Vec<(T, TailProfile<T>)> =
                    terms.iter().map(|(w, u)| (w.abs(), u.tail_profile())).collect();
                let sup_bound = profiles.iter().map(|(w, p)| *w * p.sup_bound).sum();
                let zero_beyond = profiles
                    .iter()
                    .map(|(_, p)| p.zero_beyond)
                    .try_fold(T::zero(), |m, z| z.map(|z| m.max(z)));
                let decay = if zero_beyond.is_some() {
                    None
                } else {
                    let mut c = T::zero();
                    let mut beta = T::infinity();
                    let mut r0 = T::one();
                    let mut ok = true;
                    for (w, p) in &profiles {
                        match (p.zero_beyond, p.decay) {
                            (Some(z), _) => r0 = r0.max(z),
                            (None, Some(d)) => {
                                c = c + *w * d.c;
                                beta = beta.min(d.beta);
                                r0 = r0.max(d.r0);
                            }
                            (None, None) => ok = false,
                        }
                    }
                    ok.then_some(Decay { c, beta, r0 })
                };
                TailProfile {
                    sup_bound,
                    zero_beyond,
                    decay,
                }
            }
        }
    }

    /// `x -> u(iso(x))`. Composes with an existing isometry instead of nesting.
    pub fn compose(&self, iso: Isometry<T>) -> Result<Self> {
        if iso.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: iso.dim(),
            });
        }
        Ok(ScalarField::Mapped {
            base: Box::new(self.clone()),
            iso: Arc::new(iso),
        })
    }

    /// `x -> u(x^lambda)` where `x^lambda` flips coordinate `axis` across `lambda`.
    /// Reflecting a reflection across the same plane returns the original field.
    pub fn reflect(&self, lambda: T, axis: usize) -> Result<Self> {
        if let ScalarField::Mapped { base, iso } = self {
            if iso.reflection == Some((axis, lambda)) {
                return Ok((**base).clone());
            }
        }
        self.compose(Isometry::reflection(self.dim(), axis, lambda)?)
    }

    /// `sum_k w_k u_k`.
    pub fn combination(terms: Vec<(T, ScalarField<T>)>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidField("empty combination".into()));
        };
        let dim = first.1.dim();
        if let Some((_, u)) = terms.iter().find(|(_, u)| u.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: u.dim(),
            });
        }
        Ok(ScalarField::Sum(Arc::new(terms)))
    }

    /// `self + eps * other`.
    pub fn plus_scaled(&self, eps: T, other: &ScalarField<T>) -> Result<Self> {
        Self::combination(vec![(T::one(), self.clone()), (eps, other.clone())])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection_formula() {
        let u = ScalarField::<f64>::coordinate(3, 2);
        let r0 = u.reflect(0.0, 2).unwrap();
        assert_eq!(r0.sample(&[0.3, 0.1, 0.7]), -0.7);
        let r1 = u.reflect(1.0, 2).unwrap();
        assert_eq!(r1.sample(&[0.0, 0.0, 0.5]), 1.5);
        assert!(u.reflect(0.0, 3).is_err());
    }

    #[test]
    fn reflect_twice_is_identity() {
        let u = ScalarField::<f64>::gaussian(vec![0.3, -0.2], 1.0, 0.7);
        let back = u.reflect(0.25, 1).unwrap().reflect(0.25, 1).unwrap();
        for p in crate::sampling::halton_ball(&[0.0, 0.0], 3.0, 200) {
            assert_eq!(back.sample(&p), u.sample(&p));
        }
    }

    #[test]
    fn mapped_derivatives_follow_chain_rule() {
        let u = ScalarField::<f64>::gaussian(vec![0.5, 0.0], 2.0, 1.0);
        let iso = Isometry::rotation_2d(0.4);
        let v = u.compose(iso.clone()).unwrap();
        let x = [0.2, -0.3];
        let h = 1e-6;
        let g = v.gradient(&x);
        for k in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let fd = (v.sample(&xp) - v.sample(&xm)) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-8);
        }
        let hs = v.hessian(&x);
        assert!((hs[1] - hs[2]).abs() < 1e-8);
    }

    #[test]
    fn sphere_crossing_count() {
        let r = sphere_crossings(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 0.0], 1.0);
        assert_eq!(r, vec![1.0]);
        let r = sphere_crossings(&[-2.0, 0.0], &[1.0, 0.0], &[0.0, 0.0], 1.0);
        assert_eq!(r, vec![1.0, 3.0]);
    }

    #[test]
    fn exterior_power_decay_derivatives() {
        let m = ExteriorModel::PowerDecay { c: 2.0, beta: 1.5 };
        let x = [1.2, -0.7];
        let (v, g, h) = m.jet(&x, 2);
        let r: f64 = (1.2f64 * 1.2 + 0.49).sqrt();
        assert!((v - 2.0 * r.powf(-1.5)).abs() < 1e-14);
        let eps = 1e-6;
        let (vp, gp, _) = m.jet(&[1.2 + eps, -0.7], 1);
        let (vm, gm, _) = m.jet(&[1.2 - eps, -0.7], 1);
        assert!(((vp - vm) / (2.0 * eps) - g[0]).abs() < 1e-8);
        assert!(((gp[1] - gm[1]) / (2.0 * eps) - h[1]).abs() < 1e-7);
    }
}
