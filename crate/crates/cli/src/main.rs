use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracg::field::io;
use fracg::{
    check_tail_membership, Domain, FracGOperator, GridField64, GridSpec, OperatorParams,
    SampleRange, ScalarField64, YoungFunction64,
};
use fracg_cli::config::{AuditSection, MethodChoice};
use fracg_cli::scenario::{load_grid, mask_of, AuditInput};
use fracg_cli::specs::{parse_ball, parse_exterior, parse_grid, parse_kernel, parse_list, AnalyticKind, AnalyticSpec};
use fracg_cli::{parse_config, run_audit, run_scenario, young_summary, AuditKind, CliError, CliResult, RunConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fracg", version, about = "Fractional g-Laplacian laboratory")]
struct Cli {
    /// Seed for randomized stages (overrides the config seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write the command's JSON report to this path.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Young function utilities.
    Young {
        #[command(subcommand)]
        command: YoungCommand,
    },
    /// Create, convert and inspect grid fields.
    Field {
        #[command(subcommand)]
        command: FieldCommand,
    },
    /// Operator evaluation.
    Op {
        #[command(subcommand)]
        command: OpCommand,
    },
    /// Solve a Dirichlet problem on a ball.
    Solve(SolveArgs),
    /// Run one audit on a saved solution.
    Verify(VerifyArgs),
    /// Run a scenario file.
    Run(RunArgs),
}

#[derive(Subcommand)]
enum YoungCommand {
    /// Indices, constants and randomized certification.
    Report {
        #[arg(long, default_value = "power:3")]
        young: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(long, value_enum)]
    kind: AnalyticKind,
    /// Comma-separated center; its length sets the dimension.
    #[arg(long, default_value = "0")]
    center: String,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
}

impl AnalyticArgs {
    fn spec(&self) -> CliResult<AnalyticSpec> {
        Ok(AnalyticSpec {
            kind: self.kind,
            center: parse_list(&self.center)?,
            amplitude: self.amplitude,
            width: self.width,
            radius: self.radius,
        })
    }
}

#[derive(Subcommand)]
enum FieldCommand {
    /// Sample an analytic field on a grid.
    Make {
        #[command(flatten)]
        analytic: AnalyticArgs,
        #[arg(long, default_value = "1d:256")]
        grid: String,
        /// Half width of the grid box around the center.
        #[arg(long, default_value_t = 1.25)]
        half_width: f64,
        /// `zero` or `decay:c,beta`.
        #[arg(long, default_value = "zero")]
        exterior: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a CSV field (with header, or plain `x,value` rows in 1D) to a field file.
    Import {
        #[arg(long)]
        from: PathBuf,
        #[arg(long, default_value = "zero")]
        exterior: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample a field file at points and optionally check tail membership.
    Probe {
        #[arg(long)]
        field: PathBuf,
        /// Comma-separated point; repeatable.
        #[arg(long = "at")]
        at: Vec<String>,
        /// Young function for the tail check.
        #[arg(long)]
        young: Option<String>,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
    },
}

#[derive(Args)]
struct OperatorArgs {
    #[arg(long, default_value = "power:3")]
    young: String,
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    #[arg(long, default_value = "fractional")]
    kernel: String,
    #[arg(long, default_value_t = 8)]
    quad_near: usize,
    #[arg(long, default_value_t = 8)]
    quad_far: usize,
    #[arg(long, default_value_t = 128)]
    angular: usize,
}

impl OperatorArgs {
    fn params(&self) -> OperatorParams<f64> {
        OperatorParams {
            quad_near: self.quad_near,
            quad_far: self.quad_far,
            angular: self.angular,
            ..OperatorParams::new(self.s)
        }
    }
}

#[derive(Subcommand)]
enum OpCommand {
    /// Evaluate the operator at points.
    Eval {
        #[command(flatten)]
        op: OperatorArgs,
        /// Field file; otherwise `--kind` selects an analytic field.
        #[arg(long, conflicts_with = "kind")]
        field: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: Option<AnalyticKind>,
        #[arg(long, default_value = "0")]
        center: String,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long = "at", required = true)]
        at: Vec<String>,
    },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value = "power:3")]
    young: String,
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    #[arg(long, default_value = "fractional")]
    kernel: String,
    #[arg(long, default_value = "1d:256")]
    grid: String,
    #[arg(long, default_value = "ball:1")]
    domain: String,
    #[arg(long, default_value = "const:1")]
    rhs: String,
    #[arg(long, value_enum, default_value = "pseudo-time")]
    method: MethodChoice,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    audit: AuditKind,
    #[arg(long)]
    sol: PathBuf,
    #[command(flatten)]
    op: OperatorArgs,
    /// Relative tolerance.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    /// Domain; defaults to the support ball stored in the field file.
    #[arg(long)]
    domain: Option<String>,
    /// Directory for CSV side files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_json(path: &Option<PathBuf>, value: &impl Serialize) -> CliResult<()> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(value)? + "\n";
        std::fs::write(p, text).map_err(|e| CliError::io(p, e))?;
    }
    Ok(())
}

fn save_grid(field: &GridField64, path: &Path) -> CliResult<()> {
    io::save(field, path).map_err(|e| CliError::stage("write", format!("{}: {e}", path.display())))
}

/// Plain 1D `x,value` rows on a uniform grid.
fn import_plain(text: &str, exterior: &str) -> CliResult<GridField64> {
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with(|c: char| c.is_alphabetic()) {
            continue;
        }
        let row = parse_list(t).map_err(|e| CliError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        match row.as_slice() {
            [x, v] => {
                xs.push(*x);
                vs.push(*v);
            }
            _ => {
                return Err(CliError::Parse {
                    line: i + 1,
                    message: "expected `x,value`".into(),
                })
            }
        }
    }
    if xs.len() < 4 {
        return Err(CliError::Usage("need at least 4 rows".into()));
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    if xs.iter().enumerate().any(|(i, x)| (x - (xs[0] + h * i as f64)).abs() > 1e-9 * (1.0 + h.abs())) {
        return Err(CliError::Usage("x values must be uniformly spaced and increasing".into()));
    }
    let spec = GridSpec::new(vec![xs[0]], h, vec![xs.len()])?;
    Ok(GridField64::new(spec, vs, parse_exterior(exterior)?, None)?)
}

fn points(at: &[String]) -> CliResult<Vec<Vec<f64>>> {
    at.iter().map(|p| parse_list(p)).collect()
}

fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Young {
            command: YoungCommand::Report { young, samples },
        } => {
            let y = YoungFunction64::parse(&young)?;
            let r = young_summary(&y, samples, cli.seed.unwrap_or(0), SampleRange::default());
            println!("{}: p- = {}, p+ = {}", r.label, r.p_minus, r.p_plus);
            for c in &r.certification {
                println!(
                    "  {:?}: {} violations in {} samples (constant {})",
                    c.lemma_id, c.n_violations, c.n_samples, c.constant_used
                );
            }
            write_json(&cli.json, &r)?;
            Ok(if r.passed { 0 } else { 1 })
        }
        Command::Field { command } => match command {
            FieldCommand::Make {
                analytic,
                grid,
                half_width,
                exterior,
                out,
            } => {
                let spec = analytic.spec()?;
                let u = spec.build()?;
                let (dim, n) = parse_grid(&grid)?;
                if dim != spec.center.len() {
                    return Err(CliError::Usage(format!(
                        "center has {} coordinates, grid has dimension {dim}",
                        spec.center.len()
                    )));
                }
                let g = GridSpec::centered(&spec.center, half_width, n)?;
                let samples = (0..g.len()).map(|i| u.sample(&g.node(i))).collect();
                let field = GridField64::new(g, samples, parse_exterior(&exterior)?, None)?;
                save_grid(&field, &out)?;
                println!("wrote {} ({} nodes)", out.display(), field.samples().len());
                Ok(0)
            }
            FieldCommand::Import { from, exterior, out } => {
                let text = std::fs::read_to_string(&from).map_err(|e| CliError::io(&from, e))?;
                let field = match io::from_csv::<f64>(&text) {
                    Ok(f) => f,
                    Err(_) => import_plain(&text, &exterior)?,
                };
                save_grid(&field, &out)?;
                println!("wrote {} ({} nodes)", out.display(), field.samples().len());
                Ok(0)
            }
            FieldCommand::Probe { field, at, young, s } => {
                let g = load_grid(&field)?;
                let u = ScalarField64::from(g);
                #[derive(Serialize)]
                struct Probe {
                    points: Vec<(Vec<f64>, f64)>,
                    tail: Option<fracg::TailReport>,
                }
                let pts = points(&at)?;
                let values: Vec<(Vec<f64>, f64)> = pts.into_iter().map(|x| {
                    let v = u.sample(&x);
                    (x, v)
                }).collect();
                for (x, v) in &values {
                    println!("u({x:?}) = {v:e}");
                }
                let tail = match young {
                    Some(y) => {
                        let y = YoungFunction64::parse(&y)?;
                        let t = check_tail_membership(&u, &y, s, 1e3, 400)?;
                        println!("tail: in L_g = {}, in L_g' = {}", t.in_l_g, t.in_l_gprime);
                        Some(t)
                    }
                    None => None,
                };
                write_json(&cli.json, &Probe { points: values, tail })?;
                Ok(0)
            }
        },
        Command::Op {
            command:
                OpCommand::Eval {
                    op,
                    field,
                    kind,
                    center,
                    amplitude,
                    width,
                    radius,
                    at,
                },
        } => {
            let y = YoungFunction64::parse(&op.young)?;
            let kernel = parse_kernel(&op.kernel, op.s)?;
            let operator = FracGOperator::new(&y, op.params(), kernel)?;
            let u = match (field, kind) {
                (Some(p), _) => ScalarField64::from(load_grid(&p)?),
                (None, Some(kind)) => AnalyticSpec {
                    kind,
                    center: parse_list(&center)?,
                    amplitude,
                    width,
                    radius,
                }
                .build()?,
                (None, None) => return Err(CliError::Usage("give --field or --kind".into())),
            };
            let pts = points(&at)?;
            let mut out = Vec::new();
            for x in pts {
                let v = operator.eval(&u, &x)?;
                println!("L u({x:?}) = {:e}  (tail bound {:e}, r_far {:e})", v.value, v.tail_bound, v.r_far_used);
                out.push((x, v));
            }
            write_json(&cli.json, &out)?;
            Ok(0)
        }
        Command::Solve(a) => {
            let mut cfg = RunConfig::minimal(&a.young, a.s, &a.grid, &a.domain, &a.rhs);
            cfg.kernel = a.kernel;
            cfg.solver.method = a.method;
            cfg.solver.tol = a.tol;
            cfg.solver.max_iter = a.max_iter;
            cfg.audits.run = Vec::new();
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let outcome = run_scenario(&cfg, Some(&a.out))?;
            if let Some(s) = &outcome.report.solve {
                println!(
                    "converged = {}, iterations = {}, residual = {:e}, u(center) = {:.9}",
                    s.converged, s.iterations, s.final_residual, s.center_value
                );
            }
            println!("artifacts in {}", outcome.dir.display());
            write_json(&cli.json, &outcome.report)?;
            Ok(outcome.exit_code())
        }
        Command::Verify(a) => {
            let g = load_grid(&a.sol)?;
            let (center, radius) = match (&a.domain, g.support()) {
                (Some(d), _) => parse_ball(d, g.dim())?,
                (None, Some(b)) => (b.center.clone(), b.radius),
                (None, None) => {
                    return Err(CliError::Usage("field has no support ball; pass --domain".into()))
                }
            };
            let y = YoungFunction64::parse(&a.op.young)?;
            let kernel = parse_kernel(&a.op.kernel, a.op.s)?;
            let op = FracGOperator::new(&y, a.op.params(), kernel)?;
            let domain = Domain::Ball { center, radius };
            let grid = g.spec().clone();
            let input = AuditInput {
                op,
                mask: mask_of(&grid, &domain),
                field: ScalarField64::from(g),
                grid,
                domain,
                solved: None,
            };
            let settings = AuditSection {
                tol: a.tol,
                ..AuditSection::default()
            };
            let (rec, side) = run_audit(a.audit, &input, &settings);
            if let Some(dir) = &a.out {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                for (name, contents) in side {
                    let p = dir.join(name);
                    std::fs::write(&p, contents).map_err(|e| CliError::io(&p, e))?;
                }
            }
            println!("{}: {} ({})", rec.name, rec.status, rec.message);
            write_json(&cli.json, &rec)?;
            Ok(if rec.passed { 0 } else { 1 })
        }
        Command::Run(a) => {
            let text = std::fs::read_to_string(&a.config).map_err(|e| CliError::io(&a.config, e))?;
            let mut cfg = parse_config(&text)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let base = a.config.parent().unwrap_or(Path::new("."));
            for p in [&mut cfg.field, &mut cfg.solver.init].into_iter().flatten() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
            let out = a.out.unwrap_or_else(|| {
                if cfg.output.dir.is_relative() {
                    base.join(&cfg.output.dir)
                } else {
                    cfg.output.dir.clone()
                }
            });
            let outcome = run_scenario(&cfg, Some(&out))?;
            for rec in &outcome.report.audits {
                println!("{}: {} ({})", rec.name, rec.status, rec.message);
            }
            if outcome.report.passed {
                println!("all stages passed; artifacts in {}", outcome.dir.display());
            } else {
                println!("failed: {}", outcome.report.failed.join(", "));
            }
            write_json(&cli.json, &outcome.report)?;
            Ok(outcome.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
