use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{to_f64, Verdict};
use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField};
use crate::real::{dist, Real};
use crate::solver::Domain;

/// Nearest multiple of `h/2` (measured from the grid origin), so that
/// reflecting a node across `x_axis = lambda` lands on a node.
pub fn snap_lambda<T: Real>(grid: &GridSpec<T>, axis: usize, lambda: T) -> T {
    let half = grid.spacing / T::lit(2.0);
    let o = grid.origin[axis];
    o + ((lambda - o) / half).round() * half
}

/// 40 values from `c - 0.95 r` to `c` along `axis`, snapped to the grid.
pub fn default_lambda_grid<T: Real>(grid: &GridSpec<T>, domain: &Domain<T>, axis: usize) -> Vec<T> {
    let (c, r) = domain_center_radius(domain, axis);
    let count = 40;
    let mut out: Vec<T> = (0..count)
        .map(|k| {
            let t = T::from_usize_lossy(k) / T::from_usize_lossy(count - 1);
            snap_lambda(grid, axis, c - T::lit(0.95) * r * (T::one() - t))
        })
        .collect();
    out.dedup();
    out
}

fn domain_center_radius<T: Real>(domain: &Domain<T>, axis: usize) -> (T, T) {
    match domain {
        Domain::Ball { center, radius } => (center[axis], *radius),
        Domain::Box { lo, hi } => (
            (lo[axis] + hi[axis]) / T::lit(2.0),
            (hi[axis] - lo[axis]) / T::lit(2.0),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport<T> {
    pub verdict: Verdict,
    /// Largest `lambda` such that `w_mu >= -tol` on `Sigma_mu` for every grid `mu <= lambda`.
    pub lambda0_est: Option<T>,
    /// The same sweep from above: smallest passing `lambda`.
    pub lambda0_est_above: Option<T>,
    pub lambda_grid: Vec<T>,
    pub w_minima: Vec<T>,
    pub lambda_grid_above: Vec<T>,
    pub w_minima_above: Vec<T>,
    pub mirrored_pair_deviation: T,
    pub monotone_violation: T,
    pub worst_location: Vec<T>,
    pub worst_value: T,
    pub tolerance_used: T,
    pub center: T,
}

/// `u` at `x` via the node value when `x` is a node.
fn at<T: Real>(field: &ScalarField<T>, grid: &GridSpec<T>, x: &[T]) -> T {
    match (field.as_grid(), grid.node_index(x)) {
        (Some(g), Some(i)) if g.spec() == grid => g.samples()[i],
        _ => field.sample(x),
    }
}

/// Moving-plane sweep along `axis` for a field positive in `domain`.
/// `tol` is relative to `max u`.
pub fn moving_planes_audit<T: Real>(
    field: &ScalarField<T>,
    domain: &Domain<T>,
    grid: &GridSpec<T>,
    axis: usize,
    lambda_grid: Option<&[T]>,
    tol: T,
) -> Result<SymmetryReport<T>> {
    if axis >= grid.dim() || domain.dim() != grid.dim() {
        return Err(Error::InvalidParams("axis or domain does not match the grid".into()));
    }
    let nodes: Vec<Vec<T>> = (0..grid.len())
        .map(|i| grid.node(i))
        .filter(|x| domain.contains(x))
        .collect();
    if nodes.is_empty() {
        return Err(Error::EmptyMask);
    }
    let values: Vec<T> = nodes.iter().map(|x| at(field, grid, x)).collect();
    for (x, &v) in nodes.iter().zip(&values) {
        if !(v > T::zero()) {
            return Err(Error::NotPositive {
                x: to_f64(x),
                value: v.to_f64_lossy(),
            });
        }
    }
    let scale = values.iter().copied().fold(T::zero(), T::max);
    let tol_abs = tol * scale;
    let (c, _) = domain_center_radius(domain, axis);

    let below: Vec<T> = match lambda_grid {
        Some(l) => l.iter().map(|&v| snap_lambda(grid, axis, v)).collect(),
        None => default_lambda_grid(grid, domain, axis),
    };
    let above: Vec<T> = below
        .iter()
        .map(|&l| snap_lambda(grid, axis, T::lit(2.0) * c - l))
        .collect();

    let mut worst = (T::infinity(), nodes[0].clone());
    let mut sweep = |lams: &[T], below_side: bool| -> Vec<T> {
        lams.iter()
            .map(|&lam| {
                let mut m = T::infinity();
                for x in &nodes {
                    let inside = if below_side { x[axis] < lam } else { x[axis] > lam };
                    if !inside {
                        continue;
                    }
                    let mut y = x.clone();
                    y[axis] = T::lit(2.0) * lam - x[axis];
                    let w = at(field, grid, &y) - at(field, grid, x);
                    if w < m {
                        m = w;
                    }
                    if w < worst.0 {
                        worst = (w, x.clone());
                    }
                }
                m
            })
            .collect()
    };
    let w_below = sweep(&below, true);
    let w_above = sweep(&above, false);
    let passes = |m: &T| *m >= -tol_abs;
    // minima are +inf for empty caps, which count as passing
    let lambda0_est = below
        .iter()
        .zip(&w_below)
        .take_while(|(_, m)| passes(m))
        .last()
        .map(|(&l, _)| l);
    let lambda0_est_above = above
        .iter()
        .zip(&w_above)
        .take_while(|(_, m)| passes(m))
        .last()
        .map(|(&l, _)| l);

    let mut mirror = T::zero();
    for (x, &v) in nodes.iter().zip(&values) {
        let mut y = x.clone();
        y[axis] = T::lit(2.0) * c - x[axis];
        if domain.contains(&y) {
            mirror = mirror.max((v - at(field, grid, &y)).abs());
        }
    }

    // along the axis line through the node closest to the center
    let anchor = nodes
        .iter()
        .min_by(|a, b| {
            let da = centre_offset(a, domain);
            let db = centre_offset(b, domain);
            da.partial_cmp(&db).expect("finite")
        })
        .expect("nonempty")
        .clone();
    let mut line: Vec<(T, T)> = nodes
        .iter()
        .zip(&values)
        .filter(|(x, _)| (0..x.len()).all(|k| k == axis || x[k] == anchor[k]))
        .map(|(x, &v)| (x[axis], v))
        .collect();
    line.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    let mut monotone_violation = T::zero();
    for w in line.windows(2) {
        let ((x0, u0), (x1, u1)) = (w[0], w[1]);
        let drop = if x1 <= c {
            u0 - u1
        } else if x0 >= c {
            u1 - u0
        } else {
            T::zero()
        };
        monotone_violation = monotone_violation.max(drop);
    }

    let step = below
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(T::zero(), T::max)
        .max(grid.spacing / T::lit(2.0));
    let symmetric_below = lambda0_est.is_some_and(|l| l >= c - step - tol_abs);
    let symmetric_above = lambda0_est_above.is_some_and(|l| l <= c + step + tol_abs);
    let verdict = Verdict::from_bool(
        symmetric_below && symmetric_above && mirror <= tol_abs && monotone_violation <= tol_abs,
    );
    let (worst_value, worst_location) = if worst.0.is_finite() {
        worst
    } else {
        (T::zero(), nodes[0].clone())
    };
    Ok(SymmetryReport {
        verdict,
        lambda0_est,
        lambda0_est_above,
        lambda_grid: below,
        w_minima: w_below,
        lambda_grid_above: above,
        w_minima_above: w_above,
        mirrored_pair_deviation: mirror,
        monotone_violation,
        worst_location,
        worst_value,
        tolerance_used: tol_abs,
        center: c,
    })
}

fn centre_offset<T: Real>(x: &[T], domain: &Domain<T>) -> T {
    match domain {
        Domain::Ball { center, .. } => dist(x, center),
        Domain::Box { lo, hi } => {
            let c: Vec<T> = lo.iter().zip(hi).map(|(&a, &b)| (a + b) / T::lit(2.0)).collect();
            dist(x, &c)
        }
    }
}

/// Argmax of `u`: a lattice (or node) search refined by Newton steps on the gradient.
pub fn detect_center<T: Real>(field: &ScalarField<T>) -> Vec<T> {
    let n = field.dim();
    let mut best: (T, Vec<T>) = (T::neg_infinity(), vec![T::zero(); n]);
    let h;
    if let Some(g) = field.as_grid() {
        let spec = g.spec();
        h = spec.spacing;
        for (i, &v) in g.samples().iter().enumerate() {
            if v > best.0 {
                best = (v, spec.node(i));
            }
        }
    } else {
        let (half, step) = match n {
            1 => (8.0, 0.01),
            2 => (4.0, 0.05),
            _ => (4.0, 0.25),
        };
        h = T::lit(step);
        let per = (2.0 * half / step) as usize + 1;
        let total = per.pow(n as u32);
        for idx in 0..total {
            let mut rem = idx;
            let x: Vec<T> = (0..n)
                .map(|_| {
                    let k = rem % per;
                    rem /= per;
                    T::lit(-half + step * k as f64)
                })
                .collect();
            let v = field.sample(&x);
            if v > best.0 {
                best = (v, x);
            }
        }
    }
    let mut x = best.1;
    for _ in 0..30 {
        let g = field.gradient(&x);
        let hm = field.hessian(&x);
        let a = DMatrix::from_fn(n, n, |i, j| hm[i * n + j].to_f64_lossy());
        let b = DVector::from_fn(n, |i, _| g[i].to_f64_lossy());
        let Some(d) = a.lu().solve(&b) else { break };
        let dn = d.norm();
        if !dn.is_finite() || dn > 2.0 * h.to_f64_lossy() {
            break;
        }
        let cand: Vec<T> = x.iter().zip(d.iter()).map(|(&xi, &di)| xi - T::lit(di)).collect();
        if field.sample(&cand) < field.sample(&x) {
            break;
        }
        x = cand;
        if dn < 1e-13 {
            break;
        }
    }
    x
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellRow<T> {
    pub radius: T,
    pub mean: T,
    /// `max - min` over the probes on the shell.
    pub spread: T,
}

/// Radiality about a center, on a truncated set of shells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialityReport<T> {
    pub verdict: Verdict,
    pub center: Vec<T>,
    pub shells: Vec<ShellRow<T>>,
    pub worst_shell: usize,
    pub worst_location: Vec<T>,
    pub worst_value: T,
    /// Largest increase of the shell mean with the radius.
    pub monotone_violation: T,
    pub tolerance_used: T,
    pub note: String,
}

fn shell_points<T: Real>(n: usize, c: &[T], r: T) -> Vec<Vec<T>> {
    match n {
        1 => vec![vec![c[0] - r], vec![c[0] + r]],
        2 => (0..16)
            .map(|k| {
                let t = T::lit(2.0 * std::f64::consts::PI * k as f64 / 16.0);
                vec![c[0] + r * t.cos(), c[1] + r * t.sin()]
            })
            .collect(),
        _ => {
            // Fibonacci sphere
            let m = 32;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let phi = golden * k as f64;
                    let d = [rho * phi.cos(), rho * phi.sin(), z];
                    (0..3).map(|i| c[i] + r * T::lit(d[i])).collect()
                })
                .collect()
        }
    }
}

/// Radial symmetry and monotone decay about `center` (default: the detected
/// maximum) on `shells` radii spaced by `step`. `tol` is relative to `|u(center)|`.
pub fn whole_space_symmetry_probe<T: Real>(
    field: &ScalarField<T>,
    center: Option<&[T]>,
    tol: T,
    shells: usize,
    step: T,
) -> Result<RadialityReport<T>> {
    let profile = field.tail_profile();
    let decays = profile.zero_beyond.is_some() || profile.decay.is_some_and(|d| d.beta > T::zero());
    if !decays {
        return Err(Error::InvalidField(
            "whole-space probe needs a field that decays at infinity".into(),
        ));
    }
    if shells == 0 || !(step > T::zero()) {
        return Err(Error::InvalidParams("need at least one shell and a positive step".into()));
    }
    let n = field.dim();
    let c = match center {
        Some(c) if c.len() == n => c.to_vec(),
        Some(c) => {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.len(),
            })
        }
        None => detect_center(field),
    };
    let tol_abs = tol * field.sample(&c).abs().max(T::min_positive_value());
    let mut rows = Vec::with_capacity(shells);
    let mut worst = (0, T::zero(), c.clone());
    for k in 1..=shells {
        let r = step * T::from_usize_lossy(k);
        let pts = shell_points(n, &c, r);
        let vals: Vec<T> = pts.iter().map(|x| field.sample(x)).collect();
        let lo = vals.iter().copied().fold(T::infinity(), T::min);
        let hi = vals.iter().copied().fold(T::neg_infinity(), T::max);
        let mean = vals.iter().copied().sum::<T>() / T::from_usize_lossy(vals.len());
        let spread = hi - lo;
        if spread > worst.1 {
            let far = (0..vals.len())
                .max_by(|&a, &b| {
                    let da = (vals[a] - mean).abs();
                    let db = (vals[b] - mean).abs();
                    da.partial_cmp(&db).expect("finite")
                })
                .expect("nonempty shell");
            worst = (rows.len(), spread, pts[far].clone());
        }
        rows.push(ShellRow {
            radius: r,
            mean,
            spread,
        });
    }
    let centre_value = field.sample(&c);
    let mut monotone_violation = T::zero();
    let mut prev = centre_value;
    for row in &rows {
        monotone_violation = monotone_violation.max(row.mean - prev);
        prev = row.mean;
    }
    let verdict = Verdict::from_bool(worst.1 <= tol_abs && monotone_violation <= tol_abs);
    Ok(RadialityReport {
        verdict,
        center: c,
        shells: rows,
        worst_shell: worst.0,
        worst_location: worst.2,
        worst_value: worst.1,
        monotone_violation,
        tolerance_used: tol_abs,
        note: "truncated-domain approximation: only the listed shells are probed".into(),
    })
}
