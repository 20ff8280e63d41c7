//! Right-hand sides `f(u)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::young::YoungFunction;

/// Half-width of the interval on which the sampled flags are computed.
pub const FLAG_RANGE: f64 = 10.0;
const FLAG_SAMPLES: usize = 2001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearityKind<T> {
    /// `f(u) = c`.
    Constant { c: T },
    /// `f(u) = a + b u`.
    Affine { a: T, b: T },
    /// `f(u) = sum c_k u^k`.
    Polynomial { coeffs: Vec<T> },
    /// `f(u) = c |u|^{q-1} u`, `q >= 1`.
    Power { c: T, q: T },
}

/// A Lipschitz nonlinearity with sampled structural flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity<T> {
    pub kind: NonlinearityKind<T>,
    /// Largest difference quotient seen on `[-FLAG_RANGE, FLAG_RANGE]`.
    pub lipschitz_const: T,
    pub fprime_nondecreasing: bool,
    pub fprime_nonpos_below_1: bool,
}

impl<T: Real> NonlinearityKind<T> {
    fn f(&self, u: T) -> T {
        match self {
            Self::Constant { c } => *c,
            Self::Affine { a, b } => *a + *b * u,
            Self::Polynomial { coeffs } => coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * u + c),
            Self::Power { c, q } => *c * u.abs().powf(*q - T::one()) * u,
        }
    }

    fn fprime(&self, u: T) -> T {
        match self {
            Self::Constant { .. } => T::zero(),
            Self::Affine { b, .. } => *b,
            Self::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(T::zero(), |acc, (k, &c)| acc * u + c * T::from_usize_lossy(k)),
            Self::Power { c, q } => {
                if *q == T::one() {
                    *c
                } else {
                    *c * *q * u.abs().powf(*q - T::one())
                }
            }
        }
    }
}

impl<T: Real> Nonlinearity<T> {
    pub fn new(kind: NonlinearityKind<T>) -> Result<Self> {
        let finite = |v: &[T]| v.iter().all(|x| x.is_finite());
        match &kind {
            NonlinearityKind::Constant { c } if !c.is_finite() => {
                return Err(Error::InvalidNonlinearity("constant must be finite".into()))
            }
            NonlinearityKind::Affine { a, b } if !finite(&[*a, *b]) => {
                return Err(Error::InvalidNonlinearity("coefficients must be finite".into()))
            }
            NonlinearityKind::Polynomial { coeffs } if coeffs.is_empty() || !finite(coeffs) => {
                return Err(Error::InvalidNonlinearity(
                    "polynomial needs finite coefficients".into(),
                ))
            }
            NonlinearityKind::Power { c, q } => {
                if !finite(&[*c, *q]) {
                    return Err(Error::InvalidNonlinearity("coefficients must be finite".into()));
                }
                if *q < T::one() {
                    return Err(Error::InvalidNonlinearity(format!(
                        "|u|^{{q-1}} u with q = {q} < 1 is not Lipschitz at 0"
                    )));
                }
            }
            _ => {}
        }

        let m = T::lit(FLAG_RANGE);
        let step = T::lit(2.0) * m / T::from_usize_lossy(FLAG_SAMPLES - 1);
        let ts: Vec<T> = (0..FLAG_SAMPLES)
            .map(|i| -m + step * T::from_usize_lossy(i))
            .collect();
        let mut lip = T::zero();
        for w in ts.windows(2) {
            let q = (kind.f(w[1]) - kind.f(w[0])).abs() / (w[1] - w[0]);
            lip = lip.max(q);
        }
        if !lip.is_finite() {
            return Err(Error::InvalidNonlinearity("f is not Lipschitz on the sampled range".into()));
        }
        let slack = T::lit(1e-12) * (T::one() + lip);
        let fp: Vec<T> = ts.iter().map(|&t| kind.fprime(t)).collect();
        let nondecreasing = fp.windows(2).all(|w| w[1] >= w[0] - slack);
        let nonpos_below_1 = ts
            .iter()
            .zip(&fp)
            .filter(|(t, _)| **t <= T::one())
            .all(|(_, d)| *d <= slack);
        Ok(Self {
            kind,
            lipschitz_const: lip,
            fprime_nondecreasing: nondecreasing,
            fprime_nonpos_below_1: nonpos_below_1,
        })
    }

    pub fn constant(c: T) -> Self {
        Self::new(NonlinearityKind::Constant { c }).expect("finite constant")
    }

    /// `const:c`, `affine:a,b`, `poly:c0,c1,...` or `power:c,q`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let nums: Vec<T> = args
            .split(',')
            .filter(|a| !a.trim().is_empty())
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| Error::InvalidNonlinearity(format!("bad number `{a}` in `{spec}`")))
            })
            .collect::<Result<_>>()?;
        let arity = |k: usize| -> Result<()> {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidNonlinearity(format!(
                    "`{name}` takes {k} argument(s), got {}",
                    nums.len()
                )))
            }
        };
        let kind = match name.trim() {
            "const" => {
                arity(1)?;
                NonlinearityKind::Constant { c: nums[0] }
            }
            "affine" => {
                arity(2)?;
                NonlinearityKind::Affine { a: nums[0], b: nums[1] }
            }
            "poly" => NonlinearityKind::Polynomial { coeffs: nums },
            "power" => {
                arity(2)?;
                NonlinearityKind::Power { c: nums[0], q: nums[1] }
            }
            other => {
                return Err(Error::InvalidNonlinearity(format!("unknown nonlinearity `{other}`")))
            }
        };
        Self::new(kind)
    }

    pub fn f(&self, u: T) -> T {
        self.kind.f(u)
    }

    pub fn fprime(&self, u: T) -> T {
        self.kind.fprime(u)
    }

    /// `sup g'(t)/f'(t)` over `t` in `(0,1)`; `None` when `f' <= 0` somewhere there.
    pub fn growth_constant(&self, young: &YoungFunction<T>) -> Option<T> {
        let n = 200;
        let mut c = T::zero();
        for i in 1..n {
            let t = T::from_usize_lossy(i) / T::from_usize_lossy(n);
            let d = self.fprime(t);
            if d <= T::zero() {
                return None;
            }
            c = c.max(young.gprime(t) / d);
        }
        Some(c)
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            NonlinearityKind::Constant { c } => format!("const:{c}"),
            NonlinearityKind::Affine { a, b } => format!("affine:{a},{b}"),
            NonlinearityKind::Polynomial { coeffs } => format!(
                "poly:{}",
                coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
            ),
            NonlinearityKind::Power { c, q } => format!("power:{c},{q}"),
        }
    }
}
