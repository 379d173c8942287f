use std::process::Command;

use logtrig::cli::{ReportEnvelope, Status};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn logtrig(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_logtrig"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(args: &[&str]) -> (i32, ReportEnvelope) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let run = logtrig(&full);
    let env = ReportEnvelope::from_json(&run.stdout).unwrap_or_else(|e| panic!("{e}\n{}", run.stderr));
    (run.code, env)
}

fn f(s: &Option<String>) -> f64 {
    s.as_deref().unwrap().parse().unwrap()
}

#[test]
fn all_identities_up_to_one_hundred() {
    let (code, env) = json(&["verify-identities", "--families", "all", "--n-max", "100"]);
    assert_eq!(code, 0);
    assert_eq!(env.status, Status::Ok);
    assert_eq!(env.results.len(), 497);
    assert!(env.results.iter().all(|r| r.kind == "identity" && r.pass));
}

#[test]
fn n_max_below_family_minimum_is_usage() {
    let run = logtrig(&["verify-identities", "--families", "tan", "--n-max", "1"]);
    assert_eq!(run.code, 2);
    assert!(!run.stderr.is_empty());
}

#[test]
fn converge_sine_three_grids() {
    let (code, env) = json(&["converge", "--target", "log-sin-0-pi", "--n-list", "100,1000,10000"]);
    assert_eq!(code, 0);
    assert_eq!(env.results.len(), 4);
    let last = env.results.last().unwrap();
    assert_eq!(last.kind, "extrapolation");
    let limit = f(&last.value);
    assert!((limit + std::f64::consts::PI * std::f64::consts::LN_2).abs() < 1e-6);
}

#[test]
fn tangent_rejects_even_grid() {
    assert_eq!(logtrig(&["converge", "--target", "log-tan-0-halfpi", "--n-list", "4"]).code, 2);
}

#[test]
fn gamma_residual_at_one_thousand() {
    let (code, env) = json(&["converge", "--target", "log-gamma-0-1", "--n-list", "1000"]);
    assert_eq!(code, 0);
    let rec = &env.results[0];
    let expected = -(1000f64).ln() / 1998.0;
    assert!((f(&rec.residual) - expected).abs() < 1e-12);
    assert!((f(&rec.predicted_residual) - expected).abs() < 1e-15);
}

#[test]
fn cosine_oracle_value() {
    let (code, env) = json(&["oracle", "--target", "log-cos-0-halfpi"]);
    assert_eq!(code, 0);
    let row = &env.results[0];
    assert!((f(&row.value) + 1.0887930451518010).abs() < 1e-9);
    assert!(row.nodes.unwrap() > 0);
}

#[test]
fn shifted_oracle_needs_theta() {
    let (code, env) = json(&["oracle", "--target", "log-abs-sin-shifted", "--theta", "0.3"]);
    assert_eq!(code, 0);
    assert!((f(&env.results[0].value) + std::f64::consts::LN_2).abs() < 1e-7);
    assert_eq!(logtrig(&["oracle", "--target", "log-abs-sin-shifted"]).code, 2);
    assert_eq!(logtrig(&["oracle", "--target", "log-sin-0-pi", "--theta", "1"]).code, 2);
    let (code, _) = json(&["oracle", "--target", "log-abs-sin-shifted", "--theta", "-2.5"]);
    assert_eq!(code, 0);
}

#[test]
fn usage_errors() {
    assert_eq!(logtrig(&["--precision-bits", "40", "oracle", "--target", "log-gamma-0-1"]).code, 2);
    assert_eq!(logtrig(&["converge", "--target", "nope"]).code, 2);
    assert_eq!(logtrig(&["converge", "--target", "log-sin-0-pi", "--n-list", "1000,100"]).code, 2);
    assert_eq!(logtrig(&["bogus"]).code, 2);
}

#[test]
fn report_all_csv() {
    let run = logtrig(&["--format", "csv", "report-all", "--n-max", "30"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(!run.stdout.contains('\r'));
    let mut lines = run.stdout.lines();
    assert_eq!(
        lines.next().unwrap(),
        "kind,subject,n,theta,value,closed_form,residual,predicted_residual,error_estimate,nodes,level,threshold,pass"
    );
    let kinds: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    for kind in ["identity", "riemann", "extrapolation", "oracle", "cross-method"] {
        assert!(kinds.contains(&kind), "{kind}");
    }
    assert!(run.stdout.ends_with('\n'));
}

#[test]
fn double_precision_envelope_is_consistent() {
    let (code, env) = json(&["--precision-bits", "53", "report-all", "--n-max", "20"]);
    assert_eq!(code, env.status.exit_code());
    assert_eq!(env.parameters.get("precision_bits").map(String::as_str), Some("53"));
    assert!(!env.results.is_empty());
}

#[test]
fn table_output_ends_with_status() {
    let run = logtrig(&["oracle", "--target", "log-gamma-0-1"]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.lines().last().unwrap().starts_with("status: ok"));
}

#[test]
fn repeated_runs_match() {
    let args = ["converge", "--target", "log-cos-0-halfpi", "--n-list", "10,100,1000"];
    let (_, mut a) = json(&args);
    let (_, mut b) = json(&args);
    a.timing_ms = 0;
    b.timing_ms = 0;
    assert_eq!(a, b);
}
