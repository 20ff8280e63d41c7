use std::path::Path;
use std::process::{Command, Output};

fn fracg(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracg"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const BALL: &str = r#"young = "power:3"
s = 0.5
grid = "1d:128"
domain = "ball:1"
rhs = "const:1"

[solver]
method = "anderson"

[young_report]
samples = 2000
"#;

#[test]
fn ball_scenario_passes_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ball.toml"), BALL).unwrap();
    let o = fracg(&["run", "ball.toml"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let out = dir.path().join("out");
    for f in ["sol.field", "history.csv", "report.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let history = std::fs::read_to_string(out.join("history.csv")).unwrap();
    assert!(history.starts_with("iter,tau,sup_residual\n"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    // defaults are echoed
    assert_eq!(report["config"]["kernel"], "fractional");
    assert_eq!(report["config"]["operator"]["angular"], 128);
    assert_eq!(report["config"]["audits"]["lambda_count"], 20);
    assert!(report["solve"]["tol_used"].as_f64().unwrap() > 0.0);
    let center = report["solve"]["center_value"].as_f64().unwrap();
    assert!((center - 0.41913).abs() < 1e-3, "{center}");
}

#[test]
fn asymmetric_imported_field_fails_symmetry() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracg(
        &[
            "field", "make", "--kind", "bump", "--center", "0.3", "--radius", "2", "--grid", "1d:128",
            "--half-width", "1.6", "--out", "asym.field",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let cfg = "young = \"power:3\"\ns = 0.5\ngrid = \"1d:128\"\ndomain = \"ball:1\"\nfield = \"asym.field\"\n\n[audits]\nrun = [\"symmetry\"]\n\n[young_report]\nsamples = 1000\n";
    std::fs::write(dir.path().join("asym.toml"), cfg).unwrap();
    let o = fracg(&["run", "asym.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("audit:symmetry"));
    assert!(dir.path().join("out/symmetry_axis0.csv").exists());
}

#[test]
fn config_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), BALL.replace("s = 0.5", "s = 1.5")).unwrap();
    let o = fracg(&["run", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("line 2") && e.contains("s must lie in (0,1)"), "{e}");

    std::fs::write(dir.path().join("foo.toml"), format!("foo = 1\n{BALL}")).unwrap();
    let o = fracg(&["run", "foo.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("foo") && e.contains("line 1"), "{e}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = BALL.replace("1d:128", "1d:64");
    std::fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let a = fracg(&["--seed", "3", "run", "c.toml", "--out", "a"], dir.path());
    let b = fracg(&["--seed", "3", "--threads", "1", "run", "c.toml", "--out", "b"], dir.path());
    assert!(a.status.success() && b.status.success());
    for f in ["report.json", "history.csv", "sol.field"] {
        let x = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let y = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let c = fracg(&["--seed", "4", "run", "c.toml", "--out", "c"], dir.path());
    assert!(c.status.success());
    let r: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("c/report.json")).unwrap()).unwrap();
    assert_eq!(r["config"]["seed"], 4);
}

#[test]
fn solve_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracg(&["solve", "--grid", "1d:64", "--method", "anderson", "--out", "s"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("converged = true"));
    for audit in ["mp", "symmetry", "amp"] {
        let o = fracg(
            &["verify", audit, "--sol", "s/sol.field", "--json", &format!("{audit}.json"), "--out", "v"],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{audit}: {}", stdout(&o));
        let r: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join(format!("{audit}.json"))).unwrap())
                .unwrap();
        assert_eq!(r["passed"], true);
    }
    assert!(dir.path().join("v/amp_lambda.csv").exists());
}

#[test]
fn young_report_and_operator_eval() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracg(
        &["--json", "y.json", "young", "report", "--young", "double_phase:3,4", "--samples", "5000"],
        dir.path(),
    );
    assert!(o.status.success());
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("y.json")).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
    assert_eq!(r["certification"].as_array().unwrap().len(), 6);

    let o = fracg(
        &["--json", "op.json", "op", "eval", "--kind", "gaussian", "--at", "0", "--at", "1"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("op.json")).unwrap()).unwrap();
    let v0 = r[0][1]["value"].as_f64().unwrap();
    let v1 = r[1][1]["value"].as_f64().unwrap();
    assert!((v0 - 4.614_780_266_318_053).abs() < 1e-4 * 4.62, "{v0}");
    assert!((v1 + 1.340_716_093_880_612).abs() < 1e-4 * 1.35, "{v1}");
}

#[test]
fn field_make_import_probe() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracg(
        &["field", "make", "--kind", "gaussian", "--center", "0,0", "--grid", "2d:16", "--out", "g.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = fracg(&["field", "import", "--from", "g.csv", "--out", "g.field"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = fracg(
        &["field", "probe", "--field", "g.field", "--at", "0,0", "--young", "power:3"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let u0: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("u([0.0, 0.0]) = "))
        .expect("probe value line")
        .trim()
        .parse()
        .unwrap();
    assert!((u0 - 1.0).abs() < 1e-12, "{out}");
    assert!(out.contains("in L_g = true"));

    let rows: String = (0..=20).map(|i| format!("{},{}\n", -1.0 + 0.1 * i as f64, 1.0)).collect();
    std::fs::write(dir.path().join("plain.csv"), format!("x,value\n{rows}")).unwrap();
    let o = fracg(
        &["field", "import", "--from", "plain.csv", "--exterior", "decay:1,0", "--out", "p.field"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::write(dir.path().join("uneven.csv"), "0,1\n0.1,1\n0.3,1\n0.4,1\n").unwrap();
    let o = fracg(&["field", "import", "--from", "uneven.csv", "--out", "u.field"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
