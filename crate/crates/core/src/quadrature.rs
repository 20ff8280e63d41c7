//! Quadrature building blocks: Gauss-Legendre rules, graded segments for
//! endpoint singularities and antipodal direction sets on the unit sphere.

use crate::real::Real;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Builds an `n`-point rule. Nodes are found by Newton iteration on the
    /// Legendre recurrence in `f64` and then cast.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Nodes and weights of `int_a^b` after the substitution `y = b - (b - a) tau^q`
    /// (or `y = a + (b - a) tau^q` when `toward_a`), which removes algebraic endpoint
    /// singularities of order `1/q` multiples.
    pub fn graded(&self, a: T, b: T, q: u32, toward_a: bool) -> Vec<(T, T)> {
        let len = b - a;
        let qf = T::from_u32(q).unwrap();
        self.mapped(T::zero(), T::one())
            .map(|(tau, w)| {
                let tq = tau.powi(q as i32);
                let jac = len * qf * tau.powi(q as i32 - 1);
                let y = if toward_a { a + len * tq } else { b - len * tq };
                (y, w * jac)
            })
            .collect()
    }
}

/// Value and derivative of `P_n(x)`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Half of a symmetric direction set on `S^{n-1}`: every stored direction `e`
/// stands for the pair `{e, -e}`, each carrying `weight`. The weights of the
/// full set sum to the surface measure of the sphere.
#[derive(Debug, Clone)]
pub struct DirectionSet<T> {
    pub dim: usize,
    pub dirs: Vec<Vec<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> DirectionSet<T> {
    /// `angular` is the number of azimuthal directions (even, covering the full
    /// circle) for `n >= 2`; for `n = 3` the polar angle uses a Gauss-Legendre
    /// rule in `cos(theta)` with `angular / 2` nodes (rounded up to even).
    pub fn new(dim: usize, angular: usize) -> Self {
        match dim {
            1 => Self {
                dim,
                dirs: vec![vec![T::one()]],
                weights: vec![T::one()],
            },
            2 => {
                let m = angular.max(2) & !1;
                let h = T::lit(2.0) * T::PI() / T::from_usize_lossy(m);
                let mut dirs = Vec::with_capacity(m / 2);
                let mut weights = Vec::with_capacity(m / 2);
                for j in 0..m / 2 {
                    let th = h * (T::from_usize_lossy(j) + T::lit(0.5));
                    dirs.push(vec![th.cos(), th.sin()]);
                    weights.push(h);
                }
                Self { dim, dirs, weights }
            }
            3 => {
                let m = angular.max(2) & !1;
                let mut mp = (m / 2).max(2);
                mp += mp % 2;
                let polar = GaussLegendre::<T>::new(mp);
                let h = T::lit(2.0) * T::PI() / T::from_usize_lossy(m);
                let mut dirs = Vec::new();
                let mut weights = Vec::new();
                for (c, w) in polar.mapped(-T::one(), T::one()) {
                    if c <= T::zero() {
                        continue;
                    }
                    let sn = (T::one() - c * c).max(T::zero()).sqrt();
                    for j in 0..m {
                        let ph = h * (T::from_usize_lossy(j) + T::lit(0.5));
                        dirs.push(vec![sn * ph.cos(), sn * ph.sin(), c]);
                        weights.push(w * h);
                    }
                }
                Self { dim, dirs, weights }
            }
            _ => panic!("direction sets are provided for n <= 3"),
        }
    }

    /// Total measure represented (both members of each pair).
    pub fn measure(&self) -> T {
        self.weights.iter().copied().sum::<T>() * T::lit(2.0)
    }
}
