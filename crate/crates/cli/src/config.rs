//! Scenario configuration files (TOML, flat sections).

use std::path::PathBuf;

use fracg::{
    Method, Nonlinearity, OperatorParams, SampleRange, SolverConfig, TailMode, YoungFunction64,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::specs::{parse_ball, parse_grid, parse_kernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AuditKind {
    Mp,
    Amp,
    Symmetry,
    Liouville,
    Boundary,
}

impl AuditKind {
    pub fn name(self) -> &'static str {
        match self {
            AuditKind::Mp => "mp",
            AuditKind::Amp => "amp",
            AuditKind::Symmetry => "symmetry",
            AuditKind::Liouville => "liouville",
            AuditKind::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    PseudoTime,
    Anderson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OperatorSection {
    pub quad_near: usize,
    pub quad_far: usize,
    pub angular: usize,
    /// `None` selects the radius automatically.
    pub delta_near: Option<f64>,
    /// `None` grows the truncation radius until the tail bound is small.
    pub r_far: Option<f64>,
    pub tail_rel_tol: f64,
}

impl Default for OperatorSection {
    fn default() -> Self {
        let p = OperatorParams::<f64>::new(0.5);
        Self {
            quad_near: p.quad_near,
            quad_far: p.quad_far,
            angular: p.angular,
            delta_near: p.delta_near,
            r_far: p.r_far,
            tail_rel_tol: p.tail_rel_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub method: MethodChoice,
    pub anderson_depth: usize,
    /// `None` uses `1e-6 (1 + max |f|)`.
    pub tol: Option<f64>,
    pub max_iter: usize,
    /// `None` uses `0.1 / g'(1 + max |f|)`.
    pub tau0: Option<f64>,
    pub damping: f64,
    pub grow: f64,
    /// Grid field used as the initial guess instead of zero.
    pub init: Option<PathBuf>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let c = SolverConfig::<f64>::default();
        Self {
            method: MethodChoice::PseudoTime,
            anderson_depth: 8,
            tol: c.tol,
            max_iter: c.max_iter,
            tau0: c.tau0,
            damping: c.damping,
            grow: c.grow,
            init: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditSection {
    pub run: Vec<AuditKind>,
    /// Relative to `max |u|` on the domain.
    pub tol: f64,
    /// Relative tolerance for the operator difference in the antisymmetric audit,
    /// measured against `max |L u|`.
    pub amp_tol: f64,
    /// Planes below the center used by the antisymmetric audit.
    pub lambda_count: usize,
    pub boundary_j_max: usize,
    /// Probe radii as multiples of the domain radius.
    pub liouville_radii: Vec<f64>,
    pub liouville_probes: usize,
}

impl Default for AuditSection {
    fn default() -> Self {
        Self {
            run: vec![AuditKind::Mp, AuditKind::Amp, AuditKind::Symmetry],
            tol: 1e-5,
            amp_tol: 1e-4,
            lambda_count: 20,
            boundary_j_max: 6,
            liouville_radii: vec![0.5, 1.0],
            liouville_probes: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct YoungReportSection {
    pub samples: usize,
    pub linear: f64,
    pub log_min: f64,
    pub log_max: f64,
}

impl Default for YoungReportSection {
    fn default() -> Self {
        let r = SampleRange::default();
        Self {
            samples: 10_000,
            linear: r.linear,
            log_min: r.log_min,
            log_max: r.log_max,
        }
    }
}

impl YoungReportSection {
    pub fn range(&self) -> SampleRange {
        SampleRange {
            linear: self.linear,
            log_min: self.log_min,
            log_max: self.log_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

fn default_kernel() -> String {
    "fractional".into()
}

/// A validated scenario. Serializing it echoes every default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub young: String,
    pub s: f64,
    pub grid: String,
    pub domain: String,
    /// Nonlinearity `f(u)`; required unless `field` is given.
    #[serde(default)]
    pub rhs: Option<String>,
    #[serde(default = "default_kernel")]
    pub kernel: String,
    /// Audit this grid field instead of solving.
    #[serde(default)]
    pub field: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub operator: OperatorSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub audits: AuditSection,
    #[serde(default)]
    pub young_report: YoungReportSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]` (`None` for the top level); 1 when absent.
fn key_line(text: &str, section: Option<&str>, key: &str) -> usize {
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(h) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = Some(h.trim().to_string());
            continue;
        }
        if current.as_deref() == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return i + 1;
                }
            }
        }
    }
    section
        .and_then(|s| {
            text.lines()
                .position(|l| l.trim() == format!("[{s}]"))
                .map(|i| i + 1)
        })
        .unwrap_or(1)
}

/// Parses and validates a scenario file; the first problem is reported with its line.
pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_at(text, s.start)).unwrap_or(1);
        let message = e.message().trim().to_string();
        if message.starts_with("unknown field") {
            CliError::Validation { line, message }
        } else {
            CliError::Parse { line, message }
        }
    })?;
    cfg.validate(text)?;
    Ok(cfg)
}

impl RunConfig {
    /// Minimal scenario; every other field at its default.
    pub fn minimal(young: &str, s: f64, grid: &str, domain: &str, rhs: &str) -> Self {
        Self {
            young: young.into(),
            s,
            grid: grid.into(),
            domain: domain.into(),
            rhs: Some(rhs.into()),
            kernel: default_kernel(),
            field: None,
            seed: 0,
            operator: OperatorSection::default(),
            solver: SolverSection::default(),
            audits: AuditSection::default(),
            young_report: YoungReportSection::default(),
            output: OutputSection::default(),
        }
    }

    /// Validation with line numbers taken from `text` (empty text gives line 1).
    pub fn validate(&self, text: &str) -> CliResult<()> {
        let fail = |section: Option<&str>, key: &str, message: String| CliError::Validation {
            line: key_line(text, section, key),
            message,
        };
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(fail(None, "s", "s must lie in (0,1)".into()));
        }
        YoungFunction64::parse(&self.young).map_err(|e| fail(None, "young", e.to_string()))?;
        let (dim, _) = parse_grid(&self.grid).map_err(|e| fail(None, "grid", e.to_string()))?;
        parse_ball(&self.domain, dim).map_err(|e| fail(None, "domain", e.to_string()))?;
        parse_kernel(&self.kernel, self.s).map_err(|e| fail(None, "kernel", e.to_string()))?;
        match (&self.rhs, &self.field) {
            (Some(r), _) => {
                Nonlinearity::<f64>::parse(r).map_err(|e| fail(None, "rhs", e.to_string()))?;
            }
            (None, None) => {
                return Err(fail(None, "rhs", "rhs is required unless `field` is given".into()))
            }
            (None, Some(_)) => {}
        }
        self.operator_params()
            .validate()
            .map_err(|e| fail(Some("operator"), first_operator_key(&e), e.to_string()))?;
        self.solver_config()
            .validate()
            .map_err(|e| fail(Some("solver"), "tol", e.to_string()))?;
        if self.solver.method == MethodChoice::Anderson && self.solver.anderson_depth == 0 {
            return Err(fail(
                Some("solver"),
                "anderson_depth",
                "anderson_depth must be at least 1".into(),
            ));
        }
        let a = &self.audits;
        if !(a.tol > 0.0) {
            return Err(fail(Some("audits"), "tol", "audit tol must be positive".into()));
        }
        if !(a.amp_tol > 0.0) {
            return Err(fail(Some("audits"), "amp_tol", "amp_tol must be positive".into()));
        }
        if a.lambda_count == 0 {
            return Err(fail(Some("audits"), "lambda_count", "lambda_count must be positive".into()));
        }
        if a.liouville_radii.is_empty() || a.liouville_radii.iter().any(|r| !(*r > 0.0)) {
            return Err(fail(
                Some("audits"),
                "liouville_radii",
                "liouville_radii must be positive".into(),
            ));
        }
        if self.young_report.samples == 0 {
            return Err(fail(Some("young_report"), "samples", "samples must be positive".into()));
        }
        self.young_report
            .range()
            .validate()
            .map_err(|e| fail(Some("young_report"), "linear", e.to_string()))?;
        Ok(())
    }

    pub fn dim_intervals(&self) -> CliResult<(usize, usize)> {
        parse_grid(&self.grid)
    }

    pub fn ball(&self) -> CliResult<(Vec<f64>, f64)> {
        parse_ball(&self.domain, self.dim_intervals()?.0)
    }

    pub fn operator_params(&self) -> OperatorParams<f64> {
        let o = &self.operator;
        OperatorParams {
            s: self.s,
            delta_near: o.delta_near,
            r_far: o.r_far,
            quad_near: o.quad_near,
            quad_far: o.quad_far,
            angular: o.angular,
            tail_mode: TailMode::AnalyticBound,
            tail_rel_tol: o.tail_rel_tol,
        }
    }

    pub fn solver_config(&self) -> SolverConfig<f64> {
        let s = &self.solver;
        SolverConfig {
            tol: s.tol,
            max_iter: s.max_iter,
            tau0: s.tau0,
            damping: s.damping,
            grow: s.grow,
            method: match s.method {
                MethodChoice::PseudoTime => Method::PseudoTime,
                MethodChoice::Anderson => Method::Anderson {
                    depth: s.anderson_depth,
                },
            },
        }
    }
}

fn first_operator_key(e: &fracg::Error) -> &'static str {
    let m = e.to_string();
    ["delta_near", "r_far", "quad", "angular", "tail"]
        .into_iter()
        .find(|k| m.contains(k))
        .map(|k| match k {
            "quad" => "quad_near",
            "tail" => "tail_rel_tol",
            k => k,
        })
        .unwrap_or("quad_near")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "young = \"power:3\"\ns = 0.5\ngrid = \"1d:256\"\ndomain = \"ball:1\"\nrhs = \"const:1\"\n";

    #[test]
    fn minimal_config() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c, RunConfig::minimal("power:3", 0.5, "1d:256", "ball:1", "const:1"));
    }

    #[test]
    fn bad_s_reports_line() {
        let text = MINIMAL.replace("s = 0.5", "s = 1.5");
        match parse_config(&text) {
            Err(CliError::Validation { line, message }) => {
                assert_eq!(line, 2);
                assert_eq!(message, "s must lie in (0,1)");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let text = format!("{MINIMAL}foo = 3\n");
        match parse_config(&text) {
            Err(CliError::Validation { line, message }) => {
                assert!(message.contains("foo"), "{message}");
                assert_eq!(line, 6);
            }
            other => panic!("{other:?}"),
        }
        let text = format!("{MINIMAL}[solver]\nmethod = \"anderson\"\nspeed = 2\n");
        match parse_config(&text) {
            Err(CliError::Validation { line, message }) => {
                assert!(message.contains("speed"));
                assert_eq!(line, 8);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn section_errors_point_at_keys() {
        let text = format!("{MINIMAL}\n[audits]\ntol = -1\n");
        match parse_config(&text) {
            Err(CliError::Validation { line, .. }) => assert_eq!(line, 8),
            other => panic!("{other:?}"),
        }
        let text = "young = \"power:2\"\ns = 0.5\ngrid = \"1d:256\"\ndomain = \"ball:1\"\nrhs = \"const:1\"\n";
        match parse_config(text) {
            Err(CliError::Validation { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config("young = "), Err(CliError::Parse { .. })));
    }
}
