//! Short string forms used on the command line and in config files.

use fracg::{KernelModel, KernelShape, ScalarField64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Comma-separated floats.
pub fn parse_list(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("`{t}` is not a number")))
        })
        .collect()
}

/// `1d:256` or `2d:64`: dimension and intervals per axis.
pub fn parse_grid(text: &str) -> CliResult<(usize, usize)> {
    let bad = || usage(format!("grid `{text}` must look like 1d:256 or 2d:64"));
    let (d, n) = text.split_once(':').ok_or_else(bad)?;
    let dim = match d.trim() {
        "1d" => 1,
        "2d" => 2,
        _ => return Err(bad()),
    };
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n < 16 {
        return Err(usage("grid needs at least 16 intervals per axis"));
    }
    Ok((dim, n))
}

/// `ball:R` (centered at the origin) or `ball:R@c1,c2`.
pub fn parse_ball(text: &str, dim: usize) -> CliResult<(Vec<f64>, f64)> {
    let bad = || usage(format!("domain `{text}` must look like ball:1 or ball:1@0.5"));
    let rest = text.trim().strip_prefix("ball:").ok_or_else(bad)?;
    let (r, c) = match rest.split_once('@') {
        Some((r, c)) => (r, Some(c)),
        None => (rest, None),
    };
    let radius: f64 = r.trim().parse().map_err(|_| bad())?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(usage("domain radius must be positive"));
    }
    let center = match c {
        Some(c) => parse_list(c)?,
        None => vec![0.0; dim],
    };
    if center.len() != dim {
        return Err(usage(format!(
            "domain center has {} coordinates, grid has dimension {dim}",
            center.len()
        )));
    }
    Ok((center, radius))
}

/// `fractional`, `scaled:c` or `log_oscillating:lo,hi`.
pub fn parse_kernel(text: &str, s: f64) -> CliResult<KernelModel<f64>> {
    let (name, args) = text.split_once(':').unwrap_or((text, ""));
    let nums = parse_list(args)?;
    let shape = match (name.trim(), nums.as_slice()) {
        ("fractional", []) => KernelShape::Scaled { c: 1.0 },
        ("scaled", [c]) => KernelShape::Scaled { c: *c },
        ("log_oscillating", [lo, hi]) => KernelShape::LogOscillating { lo: *lo, hi: *hi },
        _ => {
            return Err(usage(format!(
                "kernel `{text}` must be fractional, scaled:c or log_oscillating:lo,hi"
            )))
        }
    };
    Ok(KernelModel::new(shape, s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticKind {
    Constant,
    Gaussian,
    Bump,
    PolyBump,
    AlgebraicDecay,
}

/// Parameters of a built-in analytic field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSpec {
    pub kind: AnalyticKind,
    pub center: Vec<f64>,
    pub amplitude: f64,
    pub width: f64,
    pub radius: f64,
}

impl AnalyticSpec {
    pub fn build(&self) -> CliResult<ScalarField64> {
        let c = self.center.clone();
        if c.is_empty() {
            return Err(usage("analytic field needs a center"));
        }
        let base = match self.kind {
            AnalyticKind::Constant => return Ok(ScalarField64::constant(c.len(), self.amplitude)),
            AnalyticKind::Gaussian => ScalarField64::gaussian(c, self.amplitude, self.width),
            AnalyticKind::Bump => ScalarField64::bump(c, self.radius),
            AnalyticKind::PolyBump => ScalarField64::poly_bump(c, self.radius),
            AnalyticKind::AlgebraicDecay => ScalarField64::algebraic_decay(c),
        };
        if self.kind == AnalyticKind::Gaussian || self.amplitude == 1.0 {
            Ok(base)
        } else {
            Ok(ScalarField64::combination(vec![(self.amplitude, base)])?)
        }
    }
}

/// `zero` or `decay:c,beta`.
pub fn parse_exterior(text: &str) -> CliResult<fracg::ExteriorModel<f64>> {
    match text.split_once(':') {
        None if text.trim() == "zero" => Ok(fracg::ExteriorModel::Zero),
        Some(("decay", args)) => match parse_list(args)?.as_slice() {
            [c, beta] => Ok(fracg::ExteriorModel::PowerDecay { c: *c, beta: *beta }),
            _ => Err(usage("decay takes two numbers: decay:c,beta")),
        },
        _ => Err(usage(format!("exterior `{text}` must be zero or decay:c,beta"))),
    }
}
