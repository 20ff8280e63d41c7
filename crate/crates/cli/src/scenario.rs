//! Young report, solve and audits, with their artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fracg::field::io;
use fracg::qualitative::{default_lambda_grid, BoundaryVerdict, LiouvilleVerdict};
use fracg::{
    boundary_estimate_probe, certify_all, check_antisymmetric_mp, check_max_principle,
    liouville_probe, moving_planes_audit, solve_dirichlet_from, Domain, FracGOperator, GridField64,
    GridSpec, HalfSpace, InequalityReport, KernelModel, Nonlinearity, OperatorParams, ProbeSet,
    Problem64, ReflectionFrame, Rhs, SampleRange, ScalarField64, YoungFunction64,
};
use serde::Serialize;
use serde_json::Value;

use crate::config::{AuditKind, AuditSection, RunConfig};
use crate::error::{CliError, CliResult};
use crate::specs::parse_kernel;

pub const REPORT_VERSION: &str = "fracg-report 1";

#[derive(Debug, Clone, Serialize)]
pub struct YoungSummary {
    pub label: String,
    pub p_minus: f64,
    pub p_plus: f64,
    pub lemma22_constant: f64,
    pub desig_constant: f64,
    pub c1_delta2: f64,
    pub c2_delta2: f64,
    pub seed: u64,
    pub certification: Vec<InequalityReport>,
    pub passed: bool,
}

pub fn young_summary(y: &YoungFunction64, samples: usize, seed: u64, range: SampleRange) -> YoungSummary {
    let certification = certify_all(y, samples, seed, range);
    YoungSummary {
        label: y.label.clone(),
        p_minus: y.p_minus,
        p_plus: y.p_plus,
        lemma22_constant: y.lemma22_constant(),
        desig_constant: y.desig_constant(),
        c1_delta2: y.c1_delta2(),
        c2_delta2: y.c2_delta2(),
        seed,
        passed: certification.iter().all(|r| r.passed()),
        certification,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub iterations: usize,
    pub rejected: usize,
    pub accepted: usize,
    pub final_residual: f64,
    pub tol_used: f64,
    pub tau0_used: f64,
    pub mask_nodes: usize,
    pub max_value: f64,
    pub min_value: f64,
    pub center_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditRecord {
    pub name: String,
    pub passed: bool,
    /// `pass`, `fail`, `hypothesis_violated` or `error`.
    pub status: String,
    pub message: String,
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub dim: usize,
    pub intervals: usize,
    pub grid_origin: Vec<f64>,
    pub grid_spacing: f64,
    pub domain_center: Vec<f64>,
    pub domain_radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub version: &'static str,
    pub config: RunConfig,
    pub resolved: Resolved,
    pub young: YoungSummary,
    pub solve: Option<SolveSummary>,
    pub audits: Vec<AuditRecord>,
    pub failed: Vec<String>,
    pub passed: bool,
}

/// Everything an audit needs about the field under test.
pub struct AuditInput<'a> {
    pub op: FracGOperator<'a, f64>,
    pub field: ScalarField64,
    pub grid: GridSpec<f64>,
    pub domain: Domain<f64>,
    /// Grid nodes inside the domain.
    pub mask: Vec<usize>,
    /// Solver tolerance and whether `f(u) >= 0` on the mask, for solved fields.
    pub solved: Option<(f64, bool)>,
}

impl AuditInput<'_> {
    fn max_abs(&self) -> f64 {
        let g = self.field.as_grid();
        self.mask
            .iter()
            .map(|&i| match g {
                Some(g) => g.samples()[i].abs(),
                None => self.field.sample(&self.grid.node(i)).abs(),
            })
            .fold(0.0, f64::max)
    }
}

pub fn mask_of(grid: &GridSpec<f64>, domain: &Domain<f64>) -> Vec<usize> {
    (0..grid.len()).filter(|&i| domain.contains(&grid.node(i))).collect()
}

fn record(kind: AuditKind, passed: bool, status: &str, message: String, detail: Value) -> AuditRecord {
    AuditRecord {
        name: kind.name().into(),
        passed,
        status: status.into(),
        message,
        detail,
    }
}

fn error_record(kind: AuditKind, e: fracg::Error) -> AuditRecord {
    let status = if matches!(e, fracg::Error::HypothesisViolated { .. }) {
        "hypothesis_violated"
    } else {
        "error"
    };
    record(kind, false, status, e.to_string(), Value::Null)
}

fn status(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "fail"
    }
}

/// Planes strictly below the center on `axis`, thinned to `count`.
fn amp_lambdas(input: &AuditInput<'_>, axis: usize, count: usize) -> Vec<f64> {
    let c = match &input.domain {
        Domain::Ball { center, .. } => center[axis],
        Domain::Box { lo, hi } => 0.5 * (lo[axis] + hi[axis]),
    };
    let all: Vec<f64> = default_lambda_grid(&input.grid, &input.domain, axis)
        .into_iter()
        .filter(|&l| l < c - 0.25 * input.grid.spacing)
        .collect();
    if all.len() <= count {
        return all;
    }
    (0..count)
        .map(|k| all[(k * (all.len() - 1) + (count - 1) / 2) / (count - 1).max(1)])
        .collect()
}

/// Runs one audit; side files (CSV) are returned as `(name, contents)`.
pub fn run_audit(
    kind: AuditKind,
    input: &AuditInput<'_>,
    settings: &AuditSection,
) -> (AuditRecord, Vec<(String, String)>) {
    let scale = input.max_abs();
    let tol = settings.tol * if scale > 0.0 { scale } else { 1.0 };
    let mut side = Vec::new();
    let rec = match kind {
        AuditKind::Mp => {
            let probes = ProbeSet::from_grid(&input.grid, &input.mask);
            match check_max_principle(&input.op, &input.field, &probes, tol, None) {
                Err(e) => error_record(kind, e),
                Ok(r) => {
                    let mut passed = r.verdict.passed();
                    let mut message = format!("min u = {:e} at {:?}", r.worst_value, r.worst_location);
                    if let Some((stol, f_nonneg)) = input.solved {
                        if f_nonneg {
                            let ok = r.worst_value >= -10.0 * stol;
                            passed &= ok;
                            let _ = write!(message, "; sign check min u >= -10 tol: {ok}");
                        }
                    }
                    record(kind, passed, status(passed), message, serde_json::to_value(&r).unwrap_or_default())
                }
            }
        }
        AuditKind::Amp => {
            let probes = ProbeSet::from_grid(&input.grid, &input.mask);
            let lambdas = amp_lambdas(input, 0, settings.lambda_count);
            let op_scale = ProbeSet::from_grid(&input.grid, &input.mask)
                .inside
                .iter()
                .step_by((input.mask.len() / 16).max(1))
                .filter_map(|x| input.op.eval(&input.field, x).ok())
                .map(|v| v.value.abs())
                .fold(0.0, f64::max);
            let amp_tol = settings.amp_tol * if op_scale > 0.0 { op_scale } else { 1.0 };
            let mut rows = Vec::new();
            let mut csv = String::from("lambda,worst_w,min_operator_difference,passed\n");
            let mut failure = None;
            for &lam in &lambdas {
                let frame = match ReflectionFrame::new(0, lam, HalfSpace::Below, input.grid.dim()) {
                    Ok(f) => f,
                    Err(e) => {
                        failure = Some(error_record(kind, e));
                        break;
                    }
                };
                match check_antisymmetric_mp(&input.op, &input.field, frame, &probes, amp_tol) {
                    Ok(r) => {
                        let _ = writeln!(csv, "{lam:e},{:e},{:e},{}", r.worst_value, r.min_operator, r.verdict.passed());
                        rows.push(r);
                    }
                    Err(e) => {
                        let _ = writeln!(csv, "{lam:e},,,false");
                        failure = Some(error_record(kind, e));
                        break;
                    }
                }
            }
            side.push(("amp_lambda.csv".to_string(), csv));
            match failure {
                Some(mut f) => {
                    f.detail = serde_json::json!({ "lambdas": lambdas, "tolerance_used": amp_tol });
                    f
                }
                None => {
                    let passed = rows.iter().all(|r| r.verdict.passed()) && !rows.is_empty();
                    let worst = rows.iter().map(|r| r.worst_value).fold(f64::INFINITY, f64::min);
                    record(
                        kind,
                        passed,
                        status(passed),
                        format!("{} planes, smallest w = {worst:e}", rows.len()),
                        serde_json::json!({ "lambdas": lambdas, "tolerance_used": amp_tol, "reports": rows }),
                    )
                }
            }
        }
        AuditKind::Symmetry => {
            let mut reports = Vec::new();
            let mut err = None;
            for axis in 0..input.grid.dim() {
                match moving_planes_audit(&input.field, &input.domain, &input.grid, axis, None, settings.tol) {
                    Ok(r) => {
                        let mut csv = String::from("side,lambda,w_min\n");
                        for (l, w) in r.lambda_grid.iter().zip(&r.w_minima) {
                            let _ = writeln!(csv, "below,{l:e},{w:e}");
                        }
                        for (l, w) in r.lambda_grid_above.iter().zip(&r.w_minima_above) {
                            let _ = writeln!(csv, "above,{l:e},{w:e}");
                        }
                        side.push((format!("symmetry_axis{axis}.csv"), csv));
                        reports.push(r);
                    }
                    Err(e) => {
                        err = Some(e);
                        break;
                    }
                }
            }
            match err {
                Some(e) => error_record(kind, e),
                None => {
                    let passed = reports.iter().all(|r| r.verdict.passed());
                    let msg = reports
                        .iter()
                        .enumerate()
                        .map(|(k, r)| {
                            format!(
                                "axis {k}: lambda0 below {:?}, above {:?}, mirror deviation {:e}",
                                r.lambda0_est, r.lambda0_est_above, r.mirrored_pair_deviation
                            )
                        })
                        .collect::<Vec<_>>()
                        .join("; ");
                    record(kind, passed, status(passed), msg, serde_json::to_value(&reports).unwrap_or_default())
                }
            }
        }
        AuditKind::Liouville => {
            let r0 = match &input.domain {
                Domain::Ball { radius, .. } => *radius,
                Domain::Box { lo, hi } => 0.5 * (hi[0] - lo[0]),
            };
            let radii: Vec<f64> = settings.liouville_radii.iter().map(|f| f * r0).collect();
            match liouville_probe(&input.op, &input.field, &radii, settings.liouville_probes, tol) {
                Err(e) => error_record(kind, e),
                Ok(r) => {
                    let passed = r.verdict != LiouvilleVerdict::Fail;
                    let st = serde_json::to_value(r.verdict).ok().and_then(|v| v.as_str().map(String::from));
                    record(kind, passed, &st.unwrap_or_default(), r.note.clone(), serde_json::to_value(&r).unwrap_or_default())
                }
            }
        }
        AuditKind::Boundary => {
            let lambda0 = match &input.domain {
                Domain::Ball { center, .. } => center[0],
                Domain::Box { lo, hi } => 0.5 * (lo[0] + hi[0]),
            };
            match boundary_estimate_probe(
                &input.op,
                &input.field,
                &input.domain,
                &input.grid,
                0,
                lambda0,
                settings.boundary_j_max,
            ) {
                Err(e) => error_record(kind, e),
                Ok(r) => {
                    let passed = r.verdict != BoundaryVerdict::Inconsistent;
                    let st = serde_json::to_value(r.verdict).ok().and_then(|v| v.as_str().map(String::from));
                    record(kind, passed, &st.unwrap_or_default(), r.note.clone(), serde_json::to_value(&r).unwrap_or_default())
                }
            }
        }
    };
    (rec, side)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn load_grid(path: &Path) -> CliResult<GridField64> {
    io::load(path).map_err(|e| CliError::stage("load", format!("{}: {e}", path.display())))
}

/// Outcome of a scenario: the report and the directory holding the artifacts.
pub struct ScenarioOutcome {
    pub report: ScenarioReport,
    pub dir: PathBuf,
}

impl ScenarioOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            0
        } else {
            1
        }
    }
}

/// Young report, then solve (or import), then audits. Writes `sol.field`,
/// `history.csv`, `report.json` and audit side files into the output directory.
/// Stage failures that prevent a report are returned as errors.
pub fn run_scenario(cfg: &RunConfig, out_dir: Option<&Path>) -> CliResult<ScenarioOutcome> {
    cfg.validate("")?;
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.dir.clone());
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    let young = YoungFunction64::parse(&cfg.young).map_err(|e| CliError::stage("young", e))?;
    let ysum = young_summary(&young, cfg.young_report.samples, cfg.seed, cfg.young_report.range());
    let mut failed = Vec::new();
    if !ysum.passed {
        failed.push("young".to_string());
    }

    let (dim, intervals) = cfg.dim_intervals()?;
    let (center, radius) = cfg.ball()?;
    let params: OperatorParams<f64> = cfg.operator_params();
    let kernel: KernelModel<f64> = parse_kernel(&cfg.kernel, cfg.s)?;
    let domain = Domain::Ball {
        center: center.clone(),
        radius,
    };

    let mut history = String::from("iter,tau,sup_residual\n");
    let (field, grid, solved, solve_summary) = match &cfg.field {
        Some(path) => {
            let g = load_grid(path)?;
            if g.dim() != dim {
                return Err(CliError::stage(
                    "load",
                    format!("field has dimension {}, config grid has {dim}", g.dim()),
                ));
            }
            io::save(&g, &dir.join("sol.field")).map_err(|e| CliError::stage("write", e))?;
            let spec = g.spec().clone();
            (ScalarField64::from(g), spec, None, None)
        }
        None => {
            let rhs = Nonlinearity::parse(cfg.rhs.as_deref().unwrap_or_default())
                .map_err(|e| CliError::stage("solve", e))?;
            let problem = Problem64::ball(
                young.clone(),
                params.clone(),
                kernel,
                center.clone(),
                radius,
                intervals,
                Rhs::Nonlinear(rhs.clone()),
            )
            .map_err(|e| CliError::stage("solve", e))?;
            let init = match &cfg.solver.init {
                Some(p) => Some(ScalarField64::from(load_grid(p)?)),
                None => None,
            };
            let config = cfg.solver_config();
            let sol = solve_dirichlet_from(&problem, &config, init.as_ref())
                .map_err(|e| CliError::stage("solve", e))?;
            for (k, (r, t)) in sol.residual_history.iter().zip(&sol.tau_history).enumerate() {
                let _ = writeln!(history, "{k},{t:e},{r:e}");
            }
            io::save(sol.grid(), &dir.join("sol.field")).map_err(|e| CliError::stage("write", e))?;
            let f_nonneg = sol.values.iter().all(|&u| rhs.f(u) >= 0.0);
            let center_value = sol.field.sample(&center);
            let summary = SolveSummary {
                converged: sol.converged,
                iterations: sol.iterations,
                rejected: sol.rejected,
                accepted: sol.residual_history.len().saturating_sub(1),
                final_residual: sol.final_residual,
                tol_used: sol.tol,
                tau0_used: config.tau0.unwrap_or_else(|| problem.default_tau()),
                mask_nodes: problem.mask().len(),
                max_value: sol.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                min_value: sol.values.iter().copied().fold(f64::INFINITY, f64::min),
                center_value,
            };
            if !sol.converged {
                failed.push("solve".to_string());
            }
            let solved = Some((sol.tol, f_nonneg));
            (sol.field.clone(), problem.grid.clone(), solved, Some(summary))
        }
    };
    write(&dir.join("history.csv"), &history)?;

    let op = FracGOperator::new(&young, params, kernel).map_err(|e| CliError::stage("audit", e))?;
    let input = AuditInput {
        op,
        mask: mask_of(&grid, &domain),
        field,
        grid: grid.clone(),
        domain,
        solved,
    };
    let mut audits = Vec::new();
    for &kind in &cfg.audits.run {
        let (rec, side) = run_audit(kind, &input, &cfg.audits);
        for (name, contents) in side {
            write(&dir.join(name), contents)?;
        }
        if !rec.passed {
            failed.push(format!("audit:{}", rec.name));
        }
        audits.push(rec);
    }

    let report = ScenarioReport {
        version: REPORT_VERSION,
        config: cfg.clone(),
        resolved: Resolved {
            dim,
            intervals,
            grid_origin: grid.origin.clone(),
            grid_spacing: grid.spacing,
            domain_center: center,
            domain_radius: radius,
        },
        young: ysum,
        solve: solve_summary,
        audits,
        passed: failed.is_empty(),
        failed,
    };
    let json = serde_json::to_string_pretty(&report)?;
    write(&dir.join("report.json"), json + "\n")?;
    Ok(ScenarioOutcome { report, dir })
}
