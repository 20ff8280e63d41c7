//! Quadrature for the principal value integral.
//!
//! In polar coordinates around `x` the operator is
//! `sum over directions e of int_0^inf g(D(r,e)/k(r)) / (k(r) r) dr`
//! with `D(r,e) = u(x) - u(x + r e)`. Directions come in antipodal pairs; for
//! `r < delta` both members of a pair are integrated on the same radial nodes,
//! so the odd first-order part of `D` cancels exactly rather than through a
//! principal value limit. Very close to `x` (below `r_t`) the field is
//! replaced by its second-order Taylor model and the paired integrand is
//! evaluated in a cancellation-free form.

use rayon::prelude::*;

use super::{KernelModel, OperatorParams, OperatorValue, TailMode};
use crate::error::{Error, Result};
use crate::field::{BreakKind, GridSpec, ScalarField};
use crate::quadrature::{DirectionSet, GaussLegendre};
use crate::real::{dot, norm, unit_sphere_measure, Real};
use crate::young::YoungFunction;

/// Dyadic shells between the first regular panel and the Taylor region.
const SAMPLED_SHELLS: i32 = 12;
/// Dyadic shells inside the Taylor region before extrapolating the rest.
const TAYLOR_SHELLS: i32 = 60;
/// Far panels grow by at most this fraction of their inner radius.
const GROWTH: f64 = 0.5;
/// Inside a grid box, far panels span at most this many cells.
const CELLS_PER_PANEL: f64 = 8.0;
/// Largest truncation radius tried when growing `r_far`, relative to `1 + |x|`.
const R_FAR_CAP: f64 = 1e12;

/// Evaluation plan: parameters, kernel and cached quadrature rules.
#[derive(Debug, Clone)]
pub struct FracGOperator<'a, T> {
    young: &'a YoungFunction<T>,
    params: OperatorParams<T>,
    kernel: KernelModel<T>,
    near_rule: GaussLegendre<T>,
    far_rule: GaussLegendre<T>,
    taylor_rule: GaussLegendre<T>,
    pair_rule: GaussLegendre<T>,
    dirs: Vec<DirectionSet<T>>,
}

struct Ray<T> {
    e: Vec<T>,
    weight: T,
    breaks: Vec<(T, BreakKind<T>)>,
}

impl<'a, T: Real> FracGOperator<'a, T> {
    pub fn new(
        young: &'a YoungFunction<T>,
        params: OperatorParams<T>,
        kernel: KernelModel<T>,
    ) -> Result<Self> {
        params.validate()?;
        if (kernel.s - params.s).abs() > T::epsilon() * T::lit(8.0) {
            return Err(Error::InvalidKernel(format!(
                "kernel order {} differs from s = {}",
                kernel.s, params.s
            )));
        }
        let dirs = (1..=3)
            .map(|n| DirectionSet::new(n, params.angular))
            .collect();
        Ok(Self {
            young,
            near_rule: GaussLegendre::new(params.quad_near),
            far_rule: GaussLegendre::new(params.quad_far),
            taylor_rule: GaussLegendre::new(params.quad_near),
            pair_rule: GaussLegendre::new(3),
            params,
            kernel,
            dirs,
        })
    }

    /// `k(t) = t^s` with the given parameters.
    pub fn fractional(young: &'a YoungFunction<T>, params: OperatorParams<T>) -> Result<Self> {
        let kernel = KernelModel::fractional(params.s);
        Self::new(young, params, kernel)
    }

    pub fn params(&self) -> &OperatorParams<T> {
        &self.params
    }

    pub fn kernel(&self) -> &KernelModel<T> {
        &self.kernel
    }

    pub fn young(&self) -> &YoungFunction<T> {
        self.young
    }

    /// Same plan with a fixed truncation radius.
    pub fn with_r_far(&self, r_far: T) -> Result<Self> {
        let mut params = self.params.clone();
        params.r_far = Some(r_far);
        Self::new(self.young, params, self.kernel)
    }

    /// Same plan with another near radius.
    pub fn with_delta(&self, delta: T) -> Result<Self> {
        let mut params = self.params.clone();
        params.delta_near = Some(delta);
        Self::new(self.young, params, self.kernel)
    }

    /// `g(a - b) - g(a + b)` without cancellation when `|b| << |a|`.
    fn pair_difference(&self, a: T, b: T) -> T {
        if b.abs() <= T::lit(1e-2) * a.abs() {
            let s: T = self
                .pair_rule
                .mapped(-T::one(), T::one())
                .map(|(t, w)| w * self.young.gprime((a + b * t).abs()))
                .sum();
            -b * s
        } else {
            self.young.g(a - b) - self.young.g(a + b)
        }
    }

    /// `g(dp) + g(dm)` written as a pair difference around the mean.
    fn paired(&self, dp: T, dm: T) -> T {
        // dp = -a - b, dm = a - b
        let two = T::lit(2.0);
        let a = (dm - dp) / two;
        let b = -(dp + dm) / two;
        self.pair_difference(a, b)
    }

    fn default_delta(&self, field: &ScalarField<T>) -> T {
        if let Some(d) = self.params.delta_near {
            return d;
        }
        match grid_spec(field) {
            Some(spec) => T::one().min(spec.box_radius() / T::lit(4.0)),
            None => T::one(),
        }
    }

    /// Evaluates the operator at `x`.
    pub fn eval(&self, field: &ScalarField<T>, x: &[T]) -> Result<OperatorValue<T>> {
        let n = field.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        if n > 3 {
            return Err(Error::InvalidField("dimension above 3".into()));
        }
        field.c11_check(x)?;
        let ux = field.sample(x);
        if !ux.is_finite() {
            return Err(Error::InvalidField("field value is not finite".into()));
        }

        let dirs = &self.dirs[n - 1];
        let mut rays: Vec<Ray<T>> = Vec::with_capacity(2 * dirs.dirs.len());
        for (e, &w) in dirs.dirs.iter().zip(&dirs.weights) {
            for sign in [T::one(), -T::one()] {
                let e: Vec<T> = e.iter().map(|&c| sign * c).collect();
                let mut breaks: Vec<(T, BreakKind<T>)> = field
                    .ray_breaks(x, &e)
                    .into_iter()
                    .filter(|b| b.r > T::zero() && b.r.is_finite())
                    .map(|b| (b.r, b.kind))
                    .collect();
                breaks.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite break radii"));
                rays.push(Ray {
                    e,
                    weight: w,
                    breaks,
                });
            }
        }
        let first_break = rays
            .iter()
            .filter_map(|r| r.breaks.first().map(|b| b.0))
            .fold(T::infinity(), T::min);
        let delta = self
            .default_delta(field)
            .min(first_break / T::lit(2.0));

        let near = self.near_field(field, x, ux, &rays, delta);
        let last_break = rays
            .iter()
            .filter_map(|r| r.breaks.last().map(|b| b.0))
            .fold(T::zero(), T::max);
        let two = T::lit(2.0);
        let (r_start, explicit) = match self.params.r_far {
            Some(r) => (r.max(delta), true),
            None => (T::one().max(two * last_break).max(two * delta), false),
        };
        let h = field.resolution();
        let spec = grid_spec(field);
        let mut far = T::zero();
        for ray in &rays {
            far = far + ray.weight * self.ray_integral(field, x, ux, ray, delta, r_start, h, spec);
        }

        let mut r = r_start;
        let cap = T::lit(R_FAR_CAP) * (T::one() + norm(x));
        let mut bound = self.tail_bound(field, x, ux, r);
        loop {
            if !bound.is_finite() {
                if self.params.tail_mode == TailMode::AnalyticBound {
                    return Err(Error::UnboundedTail {
                        exponent: f64::INFINITY,
                    });
                }
                break;
            }
            if explicit || r >= cap || bound <= self.params.tail_rel_tol * (near + far).abs() {
                break;
            }
            let next = r * two;
            for ray in &rays {
                let mut acc = T::zero();
                for (t, w) in self.far_rule.mapped(r, next) {
                    acc = acc + w * self.radial_integrand(field, x, ux, &ray.e, t);
                }
                far = far + ray.weight * acc;
            }
            r = next;
            bound = self.tail_bound(field, x, ux, r);
        }
        Ok(OperatorValue {
            value: near + far,
            near,
            far,
            tail_bound: bound,
            delta_used: delta,
            r_far_used: r,
        })
    }

    /// `g((u(x) - u(x + r e)) / k(r)) / (k(r) r)`.
    fn radial_integrand(&self, field: &ScalarField<T>, x: &[T], ux: T, e: &[T], r: T) -> T {
        let mut y = [T::zero(); 3];
        for k in 0..x.len() {
            y[k] = x[k] + r * e[k];
        }
        let kr = self.kernel.k(r);
        self.young.g((ux - field.sample(&y[..x.len()])) / kr) / (kr * r)
    }

    fn near_field(
        &self,
        field: &ScalarField<T>,
        x: &[T],
        ux: T,
        rays: &[Ray<T>],
        delta: T,
    ) -> T {
        let n = x.len();
        let two = T::lit(2.0);
        let top = match field.resolution() {
            Some(h) => h.min(delta),
            None => delta,
        };
        // regular panels on [top, delta], aligned to the grid when there is one
        let mut edges = vec![top];
        if let Some(h) = field.resolution() {
            let mut r = top;
            while r < delta {
                let cells = (T::lit(GROWTH) * r / h).floor().max(T::one());
                r = (r + cells * h).min(delta);
                if delta - r < T::lit(1e-9) * delta {
                    r = delta;
                }
                edges.push(r);
            }
        }
        // dyadic shells down to r_t
        let mut lower = Vec::new();
        let mut r = top;
        for _ in 0..SAMPLED_SHELLS {
            let a = r / two;
            lower.push((a, r));
            r = a;
        }
        let r_t = r;
        let panels = lower
            .into_iter()
            .rev()
            .chain(edges.windows(2).map(|w| (w[0], w[1])));

        // only the "+e" member of each antipodal pair is walked
        let mut acc = T::zero();
        let mut yp = [T::zero(); 3];
        let mut ym = [T::zero(); 3];
        for (a, b) in panels {
            if b <= a {
                continue;
            }
            for (t, w) in self.near_rule.mapped(a, b) {
                let kr = self.kernel.k(t);
                let c = w / (kr * t);
                let mut s = T::zero();
                for ray in rays.iter().step_by(2) {
                    for k in 0..n {
                        yp[k] = x[k] + t * ray.e[k];
                        ym[k] = x[k] - t * ray.e[k];
                    }
                    let dp = (ux - field.sample(&yp[..n])) / kr;
                    let dm = (ux - field.sample(&ym[..n])) / kr;
                    s = s + ray.weight * self.paired(dp, dm);
                }
                acc = acc + c * s;
            }
        }
        acc + self.taylor_core(field, x, rays, r_t)
    }

    /// Integral over `r < r_t` with `u` replaced by its second-order Taylor model.
    fn taylor_core(&self, field: &ScalarField<T>, x: &[T], rays: &[Ray<T>], r_t: T) -> T {
        let n = x.len();
        let grad = field.gradient(x);
        let hess = field.hessian(x);
        let half = T::lit(0.5);
        let coeffs: Vec<(T, T, T)> = rays
            .iter()
            .step_by(2)
            .map(|ray| {
                let a = dot(&grad, &ray.e);
                let mut b = T::zero();
                for i in 0..n {
                    for j in 0..n {
                        b = b + ray.e[i] * hess[i * n + j] * ray.e[j];
                    }
                }
                (ray.weight, a, half * b)
            })
            .collect();
        let two = T::lit(2.0);
        let mut total = T::zero();
        let mut prev = T::zero();
        let mut last = T::zero();
        let mut hi = r_t;
        for _ in 0..TAYLOR_SHELLS {
            let lo = hi / two;
            let mut shell = T::zero();
            for (t, w) in self.taylor_rule.mapped(lo, hi) {
                let kr = self.kernel.k(t);
                let mut s = T::zero();
                for &(we, a, b) in &coeffs {
                    // u(x) - u(x +- t e) = -+ t a - t^2 b
                    s = s + we * self.pair_difference(t * a / kr, t * t * b / kr);
                }
                shell = shell + w * s / (kr * t);
            }
            total = total + shell;
            prev = last;
            last = shell;
            hi = lo;
        }
        // geometric remainder from the last two shells
        if prev != T::zero() && last != T::zero() {
            let rho = last / prev;
            if rho > T::zero() && rho < T::one() {
                total = total + last * rho / (T::one() - rho);
            }
        }
        total
    }

    /// Far-field integral along one ray from `delta` to `r_end`.
    #[allow(clippy::too_many_arguments)]
    fn ray_integral(
        &self,
        field: &ScalarField<T>,
        x: &[T],
        ux: T,
        ray: &Ray<T>,
        delta: T,
        r_end: T,
        h: Option<T>,
        spec: Option<&GridSpec<T>>,
    ) -> T {
        let mut acc = T::zero();
        for (a, b, grade) in far_panels(ray, delta, r_end, h, spec, x) {
            let nodes: Vec<(T, T)> = match grade {
                Grade::None => self.far_rule.mapped(a, b).collect(),
                Grade::TowardA(q) => self.far_rule.graded(a, b, q, true),
                Grade::TowardB(q) => self.far_rule.graded(a, b, q, false),
            };
            for (t, w) in nodes {
                acc = acc + w * self.radial_integrand(field, x, ux, &ray.e, t);
            }
        }
        acc
    }

    /// Bound on the integral over `|y - x| > r`.
    fn tail_bound(&self, field: &ScalarField<T>, x: &[T], ux: T, r: T) -> T {
        let p = field.tail_profile();
        let xn = norm(x);
        let reach = r - xn;
        let mut m = p.sup_bound;
        if let Some(z) = p.zero_beyond {
            if reach >= z {
                m = T::zero();
            }
        }
        if m > T::zero() {
            if let Some(d) = p.decay {
                if d.beta >= T::zero() && reach > T::zero() && reach >= d.r0 {
                    m = m.min(d.c * reach.powf(-d.beta));
                }
            }
        }
        let dmax = ux.abs() + m;
        if !dmax.is_finite() {
            return T::infinity();
        }
        let s = self.params.s;
        let c1 = self.kernel.c1;
        let sphere = unit_sphere_measure::<T>(x.len());
        let lead = sphere * self.young.g(dmax / c1) / c1;
        let pm = s * self.young.p_minus;
        if r >= T::one() {
            lead * r.powf(-pm) / pm
        } else {
            let pp = s * self.young.p_plus;
            lead * ((r.powf(-pp) - T::one()) / pp + T::one() / pm)
        }
    }

    /// Evaluates at every point, in parallel; entry order follows `points`.
    pub fn eval_points(&self, field: &ScalarField<T>, points: &[Vec<T>]) -> Vec<Result<OperatorValue<T>>> {
        points.par_iter().map(|x| self.eval(field, x)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Grade {
    None,
    TowardA(u32),
    TowardB(u32),
}

/// Exponent of the graded substitution that makes `dist^a` smooth.
fn grading_power<T: Real>(a: T) -> u32 {
    let a = a.to_f64_lossy();
    if a >= 1.0 || a <= 0.0 {
        return 1;
    }
    (1..=8)
        .map(|q| (q, ((q as f64) * a - ((q as f64) * a).round()).abs()))
        .fold((4, f64::INFINITY), |best, (q, d)| if d < best.1 - 1e-12 { (q, d) } else { best })
        .0
}

fn far_panels<T: Real>(
    ray: &Ray<T>,
    start: T,
    end: T,
    h: Option<T>,
    spec: Option<&GridSpec<T>>,
    x: &[T],
) -> Vec<(T, T, Grade)> {
    let tiny = T::lit(1e-12) * (T::one() + end);
    let mut stops: Vec<(T, Option<BreakKind<T>>)> = ray
        .breaks
        .iter()
        .filter(|b| b.0 > start + tiny && b.0 < end - tiny)
        .map(|&(r, k)| (r, Some(k)))
        .collect();
    stops.push((end, None));
    let mut panels = Vec::new();
    let mut a = start;
    let mut a_kind: Option<BreakKind<T>> = None;
    let growth = T::lit(GROWTH);
    for (stop, kind) in stops {
        if stop <= a + tiny {
            a_kind = kind.or(a_kind);
            continue;
        }
        while a < stop {
            let mut width = growth * a;
            if let (Some(h), Some(spec)) = (h, spec) {
                let mut y = [T::zero(); 3];
                for k in 0..x.len() {
                    y[k] = x[k] + a * ray.e[k];
                }
                if spec.contains(&y[..x.len()]) {
                    width = width.min(T::lit(CELLS_PER_PANEL) * h);
                }
            }
            let mut b = a + width;
            if b > stop - T::lit(0.25) * width {
                b = stop;
            }
            let b_kind = if b == stop { kind } else { None };
            let ga = match a_kind {
                Some(BreakKind::Algebraic(p)) => Some(grading_power(p)),
                _ => None,
            };
            let gb = match b_kind {
                Some(BreakKind::Algebraic(p)) => Some(grading_power(p)),
                _ => None,
            };
            match (ga, gb) {
                (Some(qa), Some(qb)) => {
                    let mid = (a + b) / T::lit(2.0);
                    panels.push((a, mid, Grade::TowardA(qa)));
                    panels.push((mid, b, Grade::TowardB(qb)));
                }
                (Some(q), None) => panels.push((a, b, Grade::TowardA(q))),
                (None, Some(q)) => panels.push((a, b, Grade::TowardB(q))),
                (None, None) => panels.push((a, b, Grade::None)),
            }
            a = b;
            a_kind = b_kind;
        }
    }
    panels
}

pub(crate) fn grid_spec<T: Real>(field: &ScalarField<T>) -> Option<&GridSpec<T>> {
    match field {
        ScalarField::Grid(g) => Some(g.spec()),
        ScalarField::Analytic(_) => None,
        ScalarField::Mapped { base, .. } => grid_spec(base),
        ScalarField::Sum(terms) => terms.iter().find_map(|(_, u)| grid_spec(u)),
    }
}

/// Evaluates `(-Delta_g)^s u(x)` for the kernel `kernel`.
pub fn eval_fracg<T: Real>(
    young: &YoungFunction<T>,
    field: &ScalarField<T>,
    x: &[T],
    params: &OperatorParams<T>,
    kernel: &KernelModel<T>,
) -> Result<OperatorValue<T>> {
    FracGOperator::new(young, params.clone(), *kernel)?.eval(field, x)
}

/// Operator values at grid nodes; failures are kept per node.
#[derive(Debug, Clone)]
pub struct GridEvaluation<T> {
    pub nodes: Vec<usize>,
    pub values: Vec<T>,
    pub details: Vec<Option<OperatorValue<T>>>,
    pub failures: Vec<(usize, Error)>,
}

impl<T: Real> GridEvaluation<T> {
    /// All values, or the first failure.
    pub fn into_values(self) -> Result<Vec<T>> {
        match self.failures.into_iter().next() {
            Some((_, e)) => Err(e),
            None => Ok(self.values),
        }
    }

    pub fn max_tail_bound(&self) -> T {
        self.details
            .iter()
            .flatten()
            .map(|d| d.tail_bound)
            .fold(T::zero(), T::max)
    }
}

/// Evaluates at the listed nodes of the field's grid. Failed nodes hold NaN.
pub fn eval_on_grid<T: Real>(
    op: &FracGOperator<'_, T>,
    field: &ScalarField<T>,
    mask: &[usize],
) -> Result<GridEvaluation<T>> {
    let spec = grid_spec(field)
        .ok_or_else(|| Error::InvalidField("eval_on_grid needs a grid field".into()))?;
    if let Some(&bad) = mask.iter().find(|&&i| i >= spec.len()) {
        return Err(Error::InvalidField(format!("mask index {bad} outside the grid")));
    }
    let points: Vec<Vec<T>> = mask.iter().map(|&i| spec.node(i)).collect();
    Ok(collect(mask.to_vec(), op.eval_points(field, &points)))
}

/// Evaluates at arbitrary points; `nodes` in the result are the point indices.
pub fn eval_at_points<T: Real>(
    op: &FracGOperator<'_, T>,
    field: &ScalarField<T>,
    points: &[Vec<T>],
) -> GridEvaluation<T> {
    collect((0..points.len()).collect(), op.eval_points(field, points))
}

fn collect<T: Real>(nodes: Vec<usize>, results: Vec<Result<OperatorValue<T>>>) -> GridEvaluation<T> {
    let mut values = Vec::with_capacity(results.len());
    let mut details = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (node, r) in nodes.iter().zip(results) {
        match r {
            Ok(v) => {
                values.push(v.value);
                details.push(Some(v));
            }
            Err(e) => {
                values.push(T::nan());
                details.push(None);
                failures.push((*node, e));
            }
        }
    }
    GridEvaluation {
        nodes,
        values,
        details,
        failures,
    }
}
