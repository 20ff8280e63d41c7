//! Uniform-grid fields with natural cubic B-spline interpolation.

use serde::{Deserialize, Serialize};

use super::{Break, BreakKind, ExteriorModel, SupportBall, TailProfile};
use crate::error::{Error, Result};
use crate::real::{norm, Real};

/// Uniform grid: `extents[k]` nodes along axis `k` starting at `origin[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub origin: Vec<T>,
    pub spacing: T,
    pub extents: Vec<usize>,
}

impl<T: Real> GridSpec<T> {
    pub fn new(origin: Vec<T>, spacing: T, extents: Vec<usize>) -> Result<Self> {
        let spec = Self {
            origin,
            spacing,
            extents,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Grid of `intervals + 1` nodes per axis on `[-half_width, half_width]^dim`
    /// shifted by `center`.
    pub fn centered(center: &[T], half_width: T, intervals: usize) -> Result<Self> {
        if intervals < 4 {
            return Err(Error::InvalidField("need at least 4 intervals per axis".into()));
        }
        let h = T::lit(2.0) * half_width / T::from_usize_lossy(intervals);
        Self::new(
            center.iter().map(|&c| c - half_width).collect(),
            h,
            vec![intervals + 1; center.len()],
        )
    }

    fn validate(&self) -> Result<()> {
        let dim = self.origin.len();
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidField(format!(
                "grid fields live in dimension 1 or 2, got {dim}"
            )));
        }
        if self.extents.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.extents.len(),
            });
        }
        if !(self.spacing > T::zero() && self.spacing.is_finite()) {
            return Err(Error::InvalidField("grid spacing must be positive".into()));
        }
        if self.extents.iter().any(|&e| e < 4) {
            return Err(Error::InvalidField("each axis needs at least 4 nodes".into()));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidField("grid origin must be finite".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of a flat (row-major) index.
    pub fn unflatten(&self, idx: usize) -> Vec<usize> {
        match self.dim() {
            1 => vec![idx],
            _ => vec![idx / self.extents[1], idx % self.extents[1]],
        }
    }

    pub fn flatten(&self, ix: &[usize]) -> usize {
        match self.dim() {
            1 => ix[0],
            _ => ix[0] * self.extents[1] + ix[1],
        }
    }

    pub fn node(&self, idx: usize) -> Vec<T> {
        self.unflatten(idx)
            .iter()
            .zip(&self.origin)
            .map(|(&i, &o)| o + self.spacing * T::from_usize_lossy(i))
            .collect()
    }

    pub fn upper(&self, axis: usize) -> T {
        self.origin[axis] + self.spacing * T::from_usize_lossy(self.extents[axis] - 1)
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.iter()
            .enumerate()
            .all(|(k, &v)| v >= self.origin[k] && v <= self.upper(k))
    }

    /// Distance from `x` to the box boundary, measured inside (negative outside).
    pub fn inner_margin(&self, x: &[T]) -> T {
        x.iter()
            .enumerate()
            .map(|(k, &v)| (v - self.origin[k]).min(self.upper(k) - v))
            .fold(T::infinity(), T::min)
    }

    /// Largest distance from the coordinate origin to a box corner.
    pub fn corner_radius(&self) -> T {
        let sq: T = (0..self.dim())
            .map(|k| {
                let a = self.origin[k].abs().max(self.upper(k).abs());
                a * a
            })
            .sum();
        sq.sqrt()
    }

    /// Half the shortest side of the box.
    pub fn box_radius(&self) -> T {
        (0..self.dim())
            .map(|k| (self.upper(k) - self.origin[k]) / T::lit(2.0))
            .fold(T::infinity(), T::min)
    }

    /// Index of the node at `x` when `x` sits on the grid to round-off.
    pub fn node_index(&self, x: &[T]) -> Option<usize> {
        let mut ix = Vec::with_capacity(self.dim());
        for (k, &v) in x.iter().enumerate() {
            let t = (v - self.origin[k]) / self.spacing;
            let r = t.round();
            if (t - r).abs() > T::lit(1e-9) || r < T::zero() {
                return None;
            }
            let i = r.to_usize()?;
            if i >= self.extents[k] {
                return None;
            }
            ix.push(i);
        }
        Some(self.flatten(&ix))
    }

    /// Parameters `r` where the ray `x + r e` crosses the box boundary.
    fn ray_box_crossings(&self, x: &[T], e: &[T]) -> Vec<T> {
        let mut t_in = T::neg_infinity();
        let mut t_out = T::infinity();
        for k in 0..self.dim() {
            let (lo, hi) = (self.origin[k], self.upper(k));
            if e[k].abs() <= T::epsilon() {
                if x[k] < lo || x[k] > hi {
                    return Vec::new();
                }
                continue;
            }
            let (a, b) = ((lo - x[k]) / e[k], (hi - x[k]) / e[k]);
            t_in = t_in.max(a.min(b));
            t_out = t_out.min(a.max(b));
        }
        if t_in > t_out {
            return Vec::new();
        }
        [t_in, t_out].into_iter().filter(|&t| t > T::zero()).collect()
    }
}

/// Cubic B-spline coefficients with natural end conditions; the returned
/// vector has one ghost coefficient at each end.
fn natural_coefficients<T: Real>(f: &[T]) -> Vec<T> {
    let n = f.len();
    match n {
        0 => return Vec::new(),
        1 => return vec![f[0]; 3],
        _ => {}
    }
    let mut c = vec![T::zero(); n + 2];
    c[1] = f[0];
    c[n] = f[n - 1];
    if n > 2 {
        // c[i-1] + 4 c[i] + c[i+1] = 6 f[i] for the interior, Thomas algorithm
        let m = n - 2;
        let six = T::lit(6.0);
        let four = T::lit(4.0);
        let mut cp = vec![T::zero(); m];
        let mut dp = vec![T::zero(); m];
        for j in 0..m {
            let mut d = six * f[j + 1];
            if j == 0 {
                d = d - f[0];
            }
            if j == m - 1 {
                d = d - f[n - 1];
            }
            let denom = if j == 0 { four } else { four - cp[j - 1] };
            cp[j] = T::one() / denom;
            dp[j] = if j == 0 { d / denom } else { (d - dp[j - 1]) / denom };
        }
        let mut x = vec![T::zero(); m];
        x[m - 1] = dp[m - 1];
        for j in (0..m - 1).rev() {
            x[j] = dp[j] - cp[j] * x[j + 1];
        }
        c[2..(m + 2)].copy_from_slice(&x);
    }
    let two = T::lit(2.0);
    c[0] = two * c[1] - c[2];
    c[n + 1] = two * c[n] - c[n - 1];
    c
}

/// Values of the four cubic B-spline pieces on a cell and their first two derivatives.
fn basis<T: Real>(u: T) -> [[T; 4]; 3] {
    let one = T::one();
    let six = T::lit(6.0);
    let w = one - u;
    let u2 = u * u;
    let u3 = u2 * u;
    let v = [
        w * w * w / six,
        (T::lit(4.0) - six * u2 + T::lit(3.0) * u3) / six,
        (one + T::lit(3.0) * (u + u2 - u3)) / six,
        u3 / six,
    ];
    let half = T::lit(0.5);
    let d1 = [
        -half * w * w,
        -T::lit(2.0) * u + T::lit(1.5) * u2,
        half + u - T::lit(1.5) * u2,
        half * u2,
    ];
    let d2 = [w, T::lit(-2.0) + T::lit(3.0) * u, one - T::lit(3.0) * u, u];
    [v, d1, d2]
}

fn basis_value<T: Real>(u: T) -> [T; 4] {
    let six = T::lit(6.0);
    let w = T::one() - u;
    let u2 = u * u;
    let u3 = u2 * u;
    [
        w * w * w / six,
        (T::lit(4.0) - six * u2 + T::lit(3.0) * u3) / six,
        (T::one() + T::lit(3.0) * (u + u2 - u3)) / six,
        u3 / six,
    ]
}

/// Cell index and local coordinate of `t` (in node units) for a spline over
/// nodes `lo..=hi`; points outside extrapolate the end pieces.
fn locate<T: Real>(t: T, lo: usize, hi: usize) -> (usize, T) {
    let last_cell = if hi > lo { hi - 1 } else { lo };
    let fl = t.floor();
    let i = if fl < T::from_usize_lossy(lo) {
        lo
    } else {
        fl.to_usize().unwrap_or(lo).clamp(lo, last_cell)
    };
    (i, t - T::from_usize_lossy(i))
}

#[derive(Debug, Clone)]
enum Interp<T> {
    /// Tensor spline over the whole grid; coefficients include ghosts.
    Full { coeffs: Vec<T> },
    /// 1-D spline of `u / w` over the nodes strictly inside the support ball.
    Weighted { lo: usize, hi: usize, coeffs: Vec<T> },
    /// No node lies inside the support ball.
    Empty,
}

/// Field sampled on a uniform grid, interpolated by natural cubic B-splines,
/// and continued outside the box by an exterior model.
#[derive(Debug, Clone)]
pub struct GridField<T> {
    spec: GridSpec<T>,
    samples: Vec<T>,
    exterior: ExteriorModel<T>,
    support: Option<SupportBall<T>>,
    interp: Interp<T>,
    sup_bound: T,
}

impl<T: Real> GridField<T> {
    /// Builds a grid field. With a support ball the field vanishes outside the
    /// ball and samples there must be zero; in one dimension with a positive
    /// exponent the interpolant is `w * spline(u / w)` with
    /// `w = ((R^2 - |x - c|^2)/R^2)^exponent`, which carries the boundary
    /// behaviour of Dirichlet solutions exactly.
    pub fn new(
        spec: GridSpec<T>,
        samples: Vec<T>,
        exterior: ExteriorModel<T>,
        support: Option<SupportBall<T>>,
    ) -> Result<Self> {
        spec.validate()?;
        if samples.len() != spec.len() {
            return Err(Error::InvalidField(format!(
                "expected {} samples, got {}",
                spec.len(),
                samples.len()
            )));
        }
        if let Some((i, _)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidField(format!("sample {i} is not finite")));
        }
        exterior.validate()?;
        let mut field = Self {
            spec,
            samples,
            exterior,
            support,
            interp: Interp::Empty,
            sup_bound: T::zero(),
        };
        if let Some(ball) = &field.support {
            ball.validate(field.spec.dim())?;
            for idx in 0..field.samples.len() {
                let x = field.spec.node(idx);
                if !ball.contains(&x) && field.samples[idx] != T::zero() {
                    return Err(Error::InvalidField(format!(
                        "sample at {:?} lies outside the support ball but is nonzero",
                        x.iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>()
                    )));
                }
            }
        }
        field.interp = field.build_interp();
        field.sup_bound = field.compute_sup_bound();
        Ok(field)
    }

    fn weighted(&self) -> bool {
        self.spec.dim() == 1
            && self
                .support
                .as_ref()
                .map(|b| b.exponent > T::zero())
                .unwrap_or(false)
    }

    fn build_interp(&self) -> Interp<T> {
        if self.weighted() {
            let ball = self.support.as_ref().unwrap();
            let inside: Vec<usize> = (0..self.samples.len())
                .filter(|&i| ball.weight(&self.spec.node(i)) > T::zero())
                .collect();
            if inside.is_empty() {
                return Interp::Empty;
            }
            let (lo, hi) = (inside[0], *inside.last().unwrap());
            let v: Vec<T> = (lo..=hi)
                .map(|i| self.samples[i] / ball.weight(&self.spec.node(i)))
                .collect();
            return Interp::Weighted {
                lo,
                hi,
                coeffs: natural_coefficients(&v),
            };
        }
        match self.spec.dim() {
            1 => Interp::Full {
                coeffs: natural_coefficients(&self.samples),
            },
            _ => {
                let (n0, n1) = (self.spec.extents[0], self.spec.extents[1]);
                // along axis 0 for each column, then axis 1 for each padded row
                let mut tmp = vec![T::zero(); (n0 + 2) * n1];
                for j in 0..n1 {
                    let col: Vec<T> = (0..n0).map(|i| self.samples[i * n1 + j]).collect();
                    for (i, c) in natural_coefficients(&col).into_iter().enumerate() {
                        tmp[i * n1 + j] = c;
                    }
                }
                let mut coeffs = vec![T::zero(); (n0 + 2) * (n1 + 2)];
                for i in 0..(n0 + 2) {
                    let row = &tmp[i * n1..(i + 1) * n1];
                    let c = natural_coefficients(row);
                    coeffs[i * (n1 + 2)..(i + 1) * (n1 + 2)].copy_from_slice(&c);
                }
                Interp::Full { coeffs }
            }
        }
    }

    fn compute_sup_bound(&self) -> T {
        // B-spline values are convex combinations of coefficients
        let inner = match &self.interp {
            Interp::Full { coeffs } | Interp::Weighted { coeffs, .. } => {
                coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
            }
            Interp::Empty => T::zero(),
        };
        let outer = match self.exterior {
            ExteriorModel::Zero => T::zero(),
            ExteriorModel::PowerDecay { c, beta } => {
                let r = self.distance_origin_to_box_exterior();
                if beta == T::zero() {
                    c.abs()
                } else if beta > T::zero() {
                    c.abs() * r.powf(-beta)
                } else {
                    T::infinity()
                }
            }
        };
        inner.max(outer)
    }

    fn distance_origin_to_box_exterior(&self) -> T {
        let z = vec![T::zero(); self.spec.dim()];
        self.spec.inner_margin(&z).max(T::zero())
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn exterior(&self) -> &ExteriorModel<T> {
        &self.exterior
    }

    pub fn support(&self) -> Option<&SupportBall<T>> {
        self.support.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Same grid, exterior and support with new samples.
    pub fn with_samples(&self, samples: Vec<T>) -> Result<Self> {
        Self::new(
            self.spec.clone(),
            samples,
            self.exterior,
            self.support.clone(),
        )
    }

    /// Value, gradient and Hessian (row-major) of the interpolant at `x`.
    /// `order` selects how many of them are computed (0, 1 or 2).
    pub fn jet(&self, x: &[T], order: usize) -> (T, Vec<T>, Vec<T>) {
        let n = self.dim();
        let zero_jet = || (T::zero(), vec![T::zero(); n], vec![T::zero(); n * n]);
        if let Some(ball) = &self.support {
            if !ball.contains(x) {
                return zero_jet();
            }
        }
        if !self.spec.contains(x) {
            return self.exterior.jet(x, order);
        }
        let h = self.spec.spacing;
        match &self.interp {
            Interp::Empty => zero_jet(),
            Interp::Weighted { lo, hi, coeffs } => {
                let t = (x[0] - self.spec.origin[0]) / h;
                let (i, u) = locate(t, *lo, *hi);
                let b = basis(u);
                // coeffs[k] belongs to node lo + k - 1
                let base = i - lo;
                let mut s = [T::zero(); 3];
                for (d, sd) in s.iter_mut().enumerate().take(order + 1) {
                    *sd = (0..4).map(|k| coeffs[base + k] * b[d][k]).sum();
                }
                let ball = self.support.as_ref().unwrap();
                let (w, dw, d2w) = ball.weight_jet_1d(x[0]);
                let v = s[0];
                let dv = s[1] / h;
                let d2v = s[2] / (h * h);
                (
                    w * v,
                    vec![dw * v + w * dv],
                    vec![d2w * v + T::lit(2.0) * dw * dv + w * d2v],
                )
            }
            Interp::Full { coeffs } => match n {
                1 => {
                    let t = (x[0] - self.spec.origin[0]) / h;
                    let (i, u) = locate(t, 0, self.spec.extents[0] - 1);
                    let b = basis(u);
                    let mut s = [T::zero(); 3];
                    for (d, sd) in s.iter_mut().enumerate().take(order + 1) {
                        *sd = (0..4).map(|k| coeffs[i + k] * b[d][k]).sum();
                    }
                    (s[0], vec![s[1] / h], vec![s[2] / (h * h)])
                }
                _ => {
                    let n1p = self.spec.extents[1] + 2;
                    let t0 = (x[0] - self.spec.origin[0]) / h;
                    let t1 = (x[1] - self.spec.origin[1]) / h;
                    let (i0, u0) = locate(t0, 0, self.spec.extents[0] - 1);
                    let (i1, u1) = locate(t1, 0, self.spec.extents[1] - 1);
                    let b0 = basis(u0);
                    let b1 = basis(u1);
                    let sum = |d0: usize, d1: usize| -> T {
                        let mut acc = T::zero();
                        for a in 0..4 {
                            let row = (i0 + a) * n1p + i1;
                            let mut r = T::zero();
                            for b in 0..4 {
                                r = r + coeffs[row + b] * b1[d1][b];
                            }
                            acc = acc + b0[d0][a] * r;
                        }
                        acc
                    };
                    let v = sum(0, 0);
                    if order == 0 {
                        return (v, vec![T::zero(); 2], vec![T::zero(); 4]);
                    }
                    let g = vec![sum(1, 0) / h, sum(0, 1) / h];
                    if order == 1 {
                        return (v, g, vec![T::zero(); 4]);
                    }
                    let h2 = h * h;
                    let hxy = sum(1, 1) / h2;
                    (v, g, vec![sum(2, 0) / h2, hxy, hxy, sum(0, 2) / h2])
                }
            },
        }
    }

    /// Interpolated value; same as `jet(x, 0).0` without allocating.
    pub fn value(&self, x: &[T]) -> T {
        if let Some(ball) = &self.support {
            if !ball.contains(x) {
                return T::zero();
            }
        }
        if !self.spec.contains(x) {
            return self.exterior.jet(x, 0).0;
        }
        let h = self.spec.spacing;
        match &self.interp {
            Interp::Empty => T::zero(),
            Interp::Weighted { lo, hi, coeffs } => {
                let t = (x[0] - self.spec.origin[0]) / h;
                let (i, u) = locate(t, *lo, *hi);
                let b = basis_value(u);
                let c = &coeffs[i - lo..i - lo + 4];
                let v = c[0] * b[0] + c[1] * b[1] + c[2] * b[2] + c[3] * b[3];
                self.support.as_ref().unwrap().weight(x) * v
            }
            Interp::Full { coeffs } => {
                if self.spec.dim() == 1 {
                    let t = (x[0] - self.spec.origin[0]) / h;
                    let (i, u) = locate(t, 0, self.spec.extents[0] - 1);
                    let b = basis_value(u);
                    let c = &coeffs[i..i + 4];
                    return c[0] * b[0] + c[1] * b[1] + c[2] * b[2] + c[3] * b[3];
                }
                let n1p = self.spec.extents[1] + 2;
                let t0 = (x[0] - self.spec.origin[0]) / h;
                let t1 = (x[1] - self.spec.origin[1]) / h;
                let (i0, u0) = locate(t0, 0, self.spec.extents[0] - 1);
                let (i1, u1) = locate(t1, 0, self.spec.extents[1] - 1);
                let b0 = basis_value(u0);
                let b1 = basis_value(u1);
                let mut acc = T::zero();
                for (a, &wa) in b0.iter().enumerate() {
                    let c = &coeffs[(i0 + a) * n1p + i1..(i0 + a) * n1p + i1 + 4];
                    acc = acc + wa * (c[0] * b1[0] + c[1] * b1[1] + c[2] * b1[2] + c[3] * b1[3]);
                }
                acc
            }
        }
    }

    /// Fails where the interpolant cannot stand in for a `C^{1,1}` function:
    /// within two spacings of the box boundary, or on the support sphere.
    pub fn c11_check(&self, x: &[T]) -> Result<()> {
        let margin = self.spec.inner_margin(x);
        let two_h = T::lit(2.0) * self.spec.spacing;
        let inside_box = margin >= two_h - T::lit(1e-9) * self.spec.spacing;
        let far_outside = margin < -two_h;
        let off = || x.iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>();
        if !(inside_box || far_outside) {
            return Err(Error::NotC11At {
                x: off(),
                reason: "within two grid spacings of the grid box boundary".into(),
            });
        }
        if let Some(ball) = &self.support {
            let gap = (ball.distance_to_center(x) - ball.radius).abs();
            if gap <= T::lit(1e-12) * ball.radius {
                return Err(Error::NotC11At {
                    x: off(),
                    reason: "on the boundary of the support ball".into(),
                });
            }
        }
        Ok(())
    }

    pub(crate) fn ray_breaks(&self, x: &[T], e: &[T]) -> Vec<Break<T>> {
        let mut out: Vec<Break<T>> = self
            .spec
            .ray_box_crossings(x, e)
            .into_iter()
            .map(|r| Break {
                r,
                kind: BreakKind::Kink,
            })
            .collect();
        if let Some(ball) = &self.support {
            let kind = if self.weighted() {
                BreakKind::Algebraic(ball.exponent)
            } else {
                BreakKind::Jump
            };
            out.extend(ball.ray_crossings(x, e).into_iter().map(|r| Break { r, kind }));
        }
        out
    }

    pub(crate) fn tail_profile(&self) -> TailProfile<T> {
        let box_r = self.spec.corner_radius();
        let mut zero_beyond = match self.exterior {
            ExteriorModel::Zero => Some(box_r),
            ExteriorModel::PowerDecay { c, .. } if c == T::zero() => Some(box_r),
            _ => None,
        };
        if let Some(ball) = &self.support {
            let r = norm(&ball.center) + ball.radius;
            zero_beyond = Some(zero_beyond.map(|z| z.min(r)).unwrap_or(r));
        }
        let decay = match self.exterior {
            ExteriorModel::PowerDecay { c, beta } if zero_beyond.is_none() => {
                Some(super::Decay {
                    c: c.abs(),
                    beta,
                    r0: box_r,
                })
            }
            _ => None,
        };
        TailProfile {
            sup_bound: self.sup_bound,
            zero_beyond,
            decay,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_grid(h: f64) -> GridField<f64> {
        let n = (12.0 / h).round() as usize;
        let spec = GridSpec::<f64>::centered(&[0.0], 6.0, n).unwrap();
        let samples = (0..spec.len())
            .map(|i| (-spec.node(i)[0].powi(2)).exp())
            .collect();
        GridField::new(spec, samples, ExteriorModel::Zero, None).unwrap()
    }

    #[test]
    fn natural_spline_reproduces_nodes_and_is_natural() {
        let f: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).sin()).collect();
        let c = natural_coefficients(&f);
        for i in 0..9 {
            let v = (c[i] + 4.0 * c[i + 1] + c[i + 2]) / 6.0;
            assert!((v - f[i]).abs() < 1e-14);
        }
        assert!((c[0] - 2.0 * c[1] + c[2]).abs() < 1e-14);
        assert!((c[8] - 2.0 * c[9] + c[10]).abs() < 1e-14);
    }

    #[test]
    fn grid_values_exact_at_nodes() {
        let g = gaussian_grid(0.1);
        for i in (0..g.samples().len()).step_by(7) {
            let x = g.spec().node(i);
            assert!((g.value(&x) - g.samples()[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_grid_is_constant_inside_box() {
        let spec = GridSpec::<f64>::centered(&[0.0, 0.0], 1.0, 10).unwrap();
        let n = spec.len();
        let g = GridField::new(spec, vec![1.0; n], ExteriorModel::Zero, None).unwrap();
        for x in [[0.13, -0.4], [0.99, 0.99], [-0.5, 0.77]] {
            assert!((g.value(&x) - 1.0).abs() < 1e-14);
            let (_, grad, hess) = g.jet(&x, 2);
            assert!(grad.iter().chain(&hess).all(|v| v.abs() < 1e-12));
        }
        assert_eq!(g.value(&[1.5, 0.0]), 0.0);
    }

    #[test]
    fn derivatives_match_analytic_on_cubic_free_interior() {
        // quadratics are reproduced away from the natural ends
        let spec = GridSpec::<f64>::centered(&[0.0], 4.0, 80).unwrap();
        let f = |x: f64| (-x * x).exp();
        let samples = (0..spec.len()).map(|i| f(spec.node(i)[0])).collect();
        let g = GridField::new(spec, samples, ExteriorModel::Zero, None).unwrap();
        let x = 0.37;
        let (v, d, dd) = g.jet(&[x], 2);
        assert!((v - f(x)).abs() < 1e-5);
        assert!((d[0] + 2.0 * x * f(x)).abs() < 1e-4);
        assert!((dd[0] - (4.0 * x * x - 2.0) * f(x)).abs() < 2e-3);
    }

    #[test]
    fn midpoint_interpolation_is_fourth_order() {
        let errs: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| {
                let g = gaussian_grid(h);
                let spec = g.spec().clone();
                (0..spec.len() - 1)
                    .map(|i| {
                        let x = spec.node(i)[0] + h / 2.0;
                        if x.abs() > 3.0 {
                            return 0.0;
                        }
                        (g.value(&[x]) - (-x * x).exp()).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 3.5, "order {order}, errors {errs:?}");
        }
    }

    #[test]
    fn weighted_support_vanishes_outside_and_keeps_nodes() {
        let spec = GridSpec::<f64>::centered(&[0.0], 1.25, 40).unwrap();
        let ball = SupportBall::new(vec![0.0], 1.0, 0.5).unwrap();
        let samples: Vec<f64> = (0..spec.len())
            .map(|i| ball.weight(&spec.node(i)) * (1.0 + spec.node(i)[0] * 0.3))
            .collect();
        let g = GridField::new(spec.clone(), samples.clone(), ExteriorModel::Zero, Some(ball))
            .unwrap();
        for i in 0..spec.len() {
            assert!((g.value(&spec.node(i)) - samples[i]).abs() < 1e-14);
        }
        assert_eq!(g.value(&[1.01]), 0.0);
        // w * (1 + 0.3x) is reproduced exactly between nodes: v is linear
        let x: f64 = 0.987;
        let exact = (1.0 - x * x).sqrt() * (1.0 + 0.3 * x);
        assert!((g.value(&[x]) - exact).abs() < 1e-13);
    }

    #[test]
    fn support_rejects_nonzero_exterior_samples() {
        let spec = GridSpec::<f64>::centered(&[0.0], 1.25, 20).unwrap();
        let n = spec.len();
        let ball = SupportBall::new(vec![0.0], 1.0, 0.5).unwrap();
        assert!(GridField::new(spec, vec![1.0; n], ExteriorModel::Zero, Some(ball)).is_err());
    }

    #[test]
    fn c11_check_flags_box_edges() {
        let g = gaussian_grid(0.1);
        assert!(g.c11_check(&[0.0]).is_ok());
        assert!(matches!(g.c11_check(&[5.95]), Err(Error::NotC11At { .. })));
        assert!(g.c11_check(&[9.0]).is_ok());
    }

    #[test]
    fn value_matches_jet() {
        let spec = GridSpec::<f64>::centered(&[0.1, -0.2], 1.0, 12).unwrap();
        let samples = (0..spec.len()).map(|i| (i as f64 * 0.31).cos()).collect();
        let g = GridField::new(spec, samples, ExteriorModel::Zero, None).unwrap();
        for x in [[0.13, -0.4], [0.95, 0.7], [-0.5, -1.1]] {
            assert_eq!(g.value(&x), g.jet(&x, 0).0);
        }
    }

    #[test]
    fn ray_crossings_of_box() {
        let spec = GridSpec::<f64>::centered(&[0.0, 0.0], 1.0, 10).unwrap();
        let r = spec.ray_box_crossings(&[0.0, 0.0], &[1.0, 0.0]);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.0).abs() < 1e-15);
        let r = spec.ray_box_crossings(&[-3.0, 0.0], &[1.0, 0.0]);
        assert_eq!(r.len(), 2);
    }
}
