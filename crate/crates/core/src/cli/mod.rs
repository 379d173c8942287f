//! Command-line front end.
//!
//! ```text
//! logtrig verify-identities [--families all|tan,sin,...] [--n-max N]
//! logtrig converge --target ID [--n-list 100,1000,...]
//! logtrig oracle --target ID [--theta X] [--abs-tol T]
//! logtrig report-all [--n-max N] [--theta X] [--abs-tol T]
//! common: --precision-bits P (128)  --format table|json|csv (table)
//! ```
//!
//! Exit codes: 0 all rows pass, 1 some row exceeds its tolerance, 2 usage
//! error, 3 numeric failure.

mod report;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

pub use report::{ReportEnvelope, Row, Status};
use report::num;

use crate::error::{Error, Result};
use crate::identities::{check_family_range, check_shifted_sampled, Family, IdentityCheckResult};
use crate::numerics::{ExtReal, Precision};
use crate::oracle::oracle_check;
use crate::riemann::{converge, ConvergenceReport, IntegralTarget, TargetId};

/// Grid sizes used when `--n-list` is not given.
pub const DEFAULT_N_LIST: [u64; 4] = [100, 1_000, 10_000, 100_000];

/// The tangent target needs odd grid sizes; its default list is shifted by one.
pub const DEFAULT_TAN_M_LIST: [u64; 4] = [101, 1_001, 10_001, 100_001];

pub const DEFAULT_N_MAX: u64 = 1000;
pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const DEFAULT_THETA: f64 = 1.0;

/// Extrapolated limits must land this close to the closed form.
pub const EXTRAPOLATION_TOLERANCE: f64 = 1e-9;
/// Shortcut and quadrature must agree this closely.
pub const CROSS_METHOD_TOLERANCE: f64 = 1e-8;
/// Oracle rows pass when the deviation is below this many tolerances.
pub const ORACLE_TOLERANCE_FACTOR: u64 = 10;

/// Fixed seed for the θ drawn per N in identity reports.
pub const THETA_SEED: u64 = 0x5eed_1dea;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "logtrig", version, about = "Log-trigonometric integrals from product identities")]
struct Args {
    /// Working precision in bits (53..=65536).
    #[arg(long, global = true, default_value_t = 128)]
    precision_bits: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Check the product identities for every N up to --n-max.
    VerifyIdentities {
        /// Comma-separated families (tan, sin, half-sin, cos, shifted) or "all".
        #[arg(long, default_value = "all")]
        families: String,
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: u64,
    },
    /// Riemann sums of one target over a list of grid sizes, with extrapolation.
    Converge {
        #[arg(long)]
        target: String,
        /// Comma-separated ascending grid sizes.
        #[arg(long)]
        n_list: Option<String>,
    },
    /// Tanh-sinh quadrature of one target.
    Oracle {
        #[arg(long)]
        target: String,
        /// Required for log-abs-sin-shifted, rejected otherwise.
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        #[arg(long, default_value_t = DEFAULT_ABS_TOL)]
        abs_tol: f64,
    },
    /// Identities, convergence, quadrature and cross-method checks together.
    ReportAll {
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: u64,
        /// θ for the shifted target.
        #[arg(long, default_value_t = DEFAULT_THETA, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = DEFAULT_ABS_TOL)]
        abs_tol: f64,
    },
}

/// A validated command ready to run.
#[derive(Clone, Debug)]
pub enum Command {
    VerifyIdentities { families: Vec<Family>, n_max: u64 },
    Converge { target: TargetId, n_list: Vec<u64> },
    Oracle { target: TargetId, theta: Option<ExtReal>, abs_tol: ExtReal },
    ReportAll { n_max: u64, theta: ExtReal, abs_tol: ExtReal },
}

#[derive(Clone, Debug)]
pub struct Invocation {
    pub command: Command,
    pub precision: Precision,
    pub format: Format,
}

/// Everything a process run produces.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
    pub envelope: Option<ReportEnvelope>,
}

/// Errors a user can fix by changing the command line.
fn is_usage(e: &Error) -> bool {
    matches!(e, Error::InvalidPrecision { .. } | Error::InvalidParameter(_) | Error::Parse(_))
}

pub fn parse_families(text: &str) -> Result<Vec<Family>> {
    if text.trim() == "all" {
        return Ok(Family::ALL.to_vec());
    }
    let mut families: Vec<Family> = text
        .split(',')
        .map(|s| s.trim().parse::<Family>())
        .collect::<Result<_>>()?;
    families.sort();
    families.dedup();
    Ok(families)
}

pub fn parse_n_list(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad grid size '{s}' in --n-list")))
        })
        .collect()
}

fn parse_real(text: &str, what: &str, prec: Precision) -> Result<ExtReal> {
    ExtReal::parse(text, prec).map_err(|_| Error::Parse(format!("bad {what} '{text}'")))
}

fn tolerance(abs_tol: f64, prec: Precision) -> Result<ExtReal> {
    if !(abs_tol.is_finite() && abs_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("--abs-tol must be positive, got {abs_tol}")));
    }
    ExtReal::from_f64(abs_tol, prec)
}

fn check_theta(target: TargetId, theta: &Option<ExtReal>) -> Result<()> {
    match (target.needs_theta(), theta) {
        (true, None) => Err(Error::InvalidParameter(format!("--theta is required for {target}"))),
        (false, Some(_)) => Err(Error::InvalidParameter(format!("--theta applies only to {}", TargetId::LogAbsSinShifted))),
        _ => Ok(()),
    }
}

fn check_n_list(target: TargetId, n_list: &[u64]) -> Result<()> {
    if !target.is_product_based() {
        return Err(Error::InvalidParameter(format!(
            "{target} has no Riemann-sum route; use the oracle command"
        )));
    }
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("--n-list must be nonempty and strictly ascending".into()));
    }
    if let Some(n) = n_list.iter().find(|&&n| n < 3) {
        return Err(Error::InvalidParameter(format!("grid sizes must be >= 3, got {n}")));
    }
    if target == TargetId::LogTan0HalfPi {
        if let Some(m) = n_list.iter().find(|&&m| m % 2 == 0) {
            return Err(Error::InvalidParameter(format!("{target} needs odd M, got {m}")));
        }
    }
    Ok(())
}

fn default_n_list(target: TargetId) -> Vec<u64> {
    if target == TargetId::LogTan0HalfPi {
        DEFAULT_TAN_M_LIST.to_vec()
    } else {
        DEFAULT_N_LIST.to_vec()
    }
}

fn check_n_max(n_max: u64) -> Result<()> {
    if n_max < 2 {
        return Err(Error::InvalidParameter(format!("--n-max must be >= 2, got {n_max}")));
    }
    if n_max > 1 << 29 {
        return Err(Error::InvalidParameter(format!("--n-max {n_max} is too large")));
    }
    Ok(())
}

fn validate(args: Args) -> Result<Invocation> {
    let precision = Precision::new(args.precision_bits)?;
    let command = match args.command {
        CommandArgs::VerifyIdentities { families, n_max } => {
            check_n_max(n_max)?;
            Command::VerifyIdentities {
                families: parse_families(&families)?,
                n_max,
            }
        }
        CommandArgs::Converge { target, n_list } => {
            let target: TargetId = target.parse()?;
            let n_list = match n_list {
                Some(text) => parse_n_list(&text)?,
                None => default_n_list(target),
            };
            check_n_list(target, &n_list)?;
            Command::Converge { target, n_list }
        }
        CommandArgs::Oracle { target, theta, abs_tol } => {
            let target: TargetId = target.parse()?;
            let theta = theta.map(|t| parse_real(&t, "--theta", precision)).transpose()?;
            check_theta(target, &theta)?;
            Command::Oracle {
                target,
                theta,
                abs_tol: tolerance(abs_tol, precision)?,
            }
        }
        CommandArgs::ReportAll { n_max, theta, abs_tol } => {
            check_n_max(n_max)?;
            Command::ReportAll {
                n_max,
                theta: ExtReal::from_f64(theta, precision)
                    .map_err(|_| Error::InvalidParameter("--theta must be finite".into()))?,
                abs_tol: tolerance(abs_tol, precision)?,
            }
        }
    };
    Ok(Invocation {
        command,
        precision,
        format: args.format,
    })
}

fn base_parameters(prec: Precision) -> BTreeMap<String, String> {
    let mut p = BTreeMap::new();
    p.insert("precision_bits".to_string(), prec.bits().to_string());
    p
}

fn join(ns: &[u64]) -> String {
    ns.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn identity_row(r: &IdentityCheckResult) -> Row {
    let case = &r.case;
    Row {
        kind: "identity".into(),
        subject: case.family().name().into(),
        n: Some(case.n_param()),
        theta: case.theta().map(ExtReal::to_decimal),
        value: num(&r.computed_product),
        closed_form: num(&r.closed_form),
        residual: num(&r.relative_residual),
        threshold: num(&r.threshold()),
        pass: r.passes(),
        ..Row::default()
    }
}

fn identity_rows(families: &[Family], n_max: u64, prec: Precision) -> Result<Vec<Row>> {
    let mut families = families.to_vec();
    families.sort();
    let mut rows = Vec::new();
    for family in families {
        let results = if family == Family::ShiftedSinProduct {
            check_shifted_sampled(1..=n_max, 1, THETA_SEED, prec)?
        } else {
            check_family_range(family, family.min_n()..=n_max, prec)?
        };
        rows.extend(results.iter().map(identity_row));
    }
    Ok(rows)
}

fn convergence_rows(report: &ConvergenceReport) -> Vec<Row> {
    let target = report.target.id().name();
    let closed = report.target.closed_form();
    let mut rows: Vec<Row> = report
        .records
        .iter()
        .map(|r| Row {
            kind: "riemann".into(),
            subject: target.into(),
            n: Some(r.n_param),
            value: num(&r.sum_value),
            closed_form: num(closed),
            residual: num(&r.observed_error),
            predicted_residual: num(&r.predicted_residual),
            threshold: num(&r.residual_law_bound()),
            pass: r.residual_law_holds(),
            ..Row::default()
        })
        .collect();
    let tol = ExtReal::from_f64(EXTRAPOLATION_TOLERANCE, closed.precision()).expect("finite");
    rows.push(Row {
        kind: "extrapolation".into(),
        subject: target.into(),
        n: report.records.last().map(|r| r.n_param),
        value: num(&report.extrapolated_limit),
        closed_form: num(closed),
        residual: num(&report.extrapolation_error),
        // a single record cannot be extrapolated; its row is informational
        threshold: report.fitted.then(|| tol.to_decimal()),
        pass: !report.fitted || report.extrapolation_error < tol,
        ..Row::default()
    });
    rows
}

fn oracle_row(target: &IntegralTarget, abs_tol: &ExtReal, prec: Precision) -> Result<(Row, ExtReal)> {
    let (result, deviation) = oracle_check(target, abs_tol, prec)?;
    let threshold = abs_tol * ORACLE_TOLERANCE_FACTOR;
    let row = Row {
        kind: "oracle".into(),
        subject: target.id().name().into(),
        theta: target.theta().map(ExtReal::to_decimal),
        value: num(&result.value),
        closed_form: num(target.closed_form()),
        residual: num(&deviation),
        error_estimate: num(&result.error_estimate),
        nodes: Some(result.node_count),
        level: Some(result.level),
        threshold: num(&threshold),
        pass: deviation < threshold,
        ..Row::default()
    };
    Ok((row, result.value))
}

pub fn cmd_verify_identities(families: &[Family], n_max: u64, prec: Precision) -> Result<ReportEnvelope> {
    check_n_max(n_max)?;
    let mut params = base_parameters(prec);
    let mut sorted = families.to_vec();
    sorted.sort();
    sorted.dedup();
    let names: Vec<&str> = sorted.iter().map(|f| f.name()).collect();
    params.insert("families".into(), names.join(","));
    params.insert("n_max".into(), n_max.to_string());
    let rows = identity_rows(&sorted, n_max, prec)?;
    Ok(ReportEnvelope::from_rows("verify-identities", params, rows))
}

pub fn cmd_converge(target: TargetId, n_list: &[u64], prec: Precision) -> Result<ReportEnvelope> {
    check_n_list(target, n_list)?;
    let mut params = base_parameters(prec);
    params.insert("target".into(), target.name().into());
    params.insert("n_list".into(), join(n_list));
    let report = converge(&IntegralTarget::new(target, None, prec)?, n_list, prec)?;
    Ok(ReportEnvelope::from_rows("converge", params, convergence_rows(&report)))
}

pub fn cmd_oracle(target: TargetId, theta: Option<ExtReal>, abs_tol: &ExtReal, prec: Precision) -> Result<ReportEnvelope> {
    check_theta(target, &theta)?;
    let mut params = base_parameters(prec);
    params.insert("target".into(), target.name().into());
    params.insert("abs_tol".into(), abs_tol.to_decimal());
    if let Some(t) = &theta {
        params.insert("theta".into(), t.to_decimal());
    }
    let (row, _) = oracle_row(&IntegralTarget::new(target, theta, prec)?, abs_tol, prec)?;
    Ok(ReportEnvelope::from_rows("oracle", params, vec![row]))
}

pub fn cmd_report_all(n_max: u64, theta: &ExtReal, abs_tol: &ExtReal, prec: Precision) -> Result<ReportEnvelope> {
    check_n_max(n_max)?;
    let mut params = base_parameters(prec);
    params.insert("n_max".into(), n_max.to_string());
    params.insert("n_list".into(), join(&DEFAULT_N_LIST));
    params.insert("tan_m_list".into(), join(&DEFAULT_TAN_M_LIST));
    params.insert("theta".into(), theta.to_decimal());
    params.insert("abs_tol".into(), abs_tol.to_decimal());

    let mut rows = identity_rows(&Family::ALL, n_max, prec)?;

    let mut limits = Vec::new();
    for id in TargetId::PRODUCT_BASED {
        let target = IntegralTarget::new(id, None, prec)?;
        let report = converge(&target, &default_n_list(id), prec)?;
        rows.extend(convergence_rows(&report));
        limits.push((id, report.extrapolated_limit));
    }

    let mut oracle_values = BTreeMap::new();
    for id in TargetId::ALL {
        let th = id.needs_theta().then(|| theta.clone());
        let (row, value) = oracle_row(&IntegralTarget::new(id, th, prec)?, abs_tol, prec)?;
        rows.push(row);
        oracle_values.insert(id, value);
    }

    let tol = ExtReal::from_f64(CROSS_METHOD_TOLERANCE, prec)?;
    for (id, limit) in limits {
        let gap = (&oracle_values[&id] - &limit).abs();
        rows.push(Row {
            kind: "cross-method".into(),
            subject: id.name().into(),
            value: num(&limit),
            residual: num(&gap),
            threshold: num(&tol),
            pass: gap < tol,
            ..Row::default()
        });
    }
    Ok(ReportEnvelope::from_rows("report-all", params, rows))
}

/// Runs a validated invocation and fills in the elapsed time.
pub fn execute(inv: &Invocation) -> Result<ReportEnvelope> {
    let start = Instant::now();
    let prec = inv.precision;
    let mut env = match &inv.command {
        Command::VerifyIdentities { families, n_max } => cmd_verify_identities(families, *n_max, prec),
        Command::Converge { target, n_list } => cmd_converge(*target, n_list, prec),
        Command::Oracle { target, theta, abs_tol } => cmd_oracle(*target, theta.clone(), abs_tol, prec),
        Command::ReportAll { n_max, theta, abs_tol } => cmd_report_all(*n_max, theta, abs_tol, prec),
    }?;
    env.timing_ms = start.elapsed().as_millis() as u64;
    Ok(env)
}

pub fn render(env: &ReportEnvelope, format: Format) -> String {
    match format {
        Format::Table => env.to_table(),
        Format::Json => env.to_json() + "\n",
        Format::Csv => env.to_csv(),
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::VerifyIdentities { .. } => "verify-identities",
        Command::Converge { .. } => "converge",
        Command::Oracle { .. } => "oracle",
        Command::ReportAll { .. } => "report-all",
    }
}

fn usage(message: String) -> Outcome {
    Outcome {
        exit_code: 2,
        stdout: String::new(),
        stderr: message,
        envelope: None,
    }
}

/// Parses `args` (program name first), runs the command and renders the
/// report. Never exits the process.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                usage(text)
            } else {
                Outcome {
                    exit_code: 0,
                    stdout: text,
                    stderr: String::new(),
                    envelope: None,
                }
            };
        }
    };
    let inv = match validate(parsed) {
        Ok(inv) => inv,
        Err(e) => return usage(format!("error: {e}\n")),
    };
    match execute(&inv) {
        Ok(env) => Outcome {
            exit_code: env.status.exit_code(),
            stdout: render(&env, inv.format),
            stderr: String::new(),
            envelope: Some(env),
        },
        Err(e) => failure(&inv, e),
    }
}

fn failure(inv: &Invocation, e: Error) -> Outcome {
    if is_usage(&e) {
        return usage(format!("error: {e}\n"));
    }
    let env = ReportEnvelope::failed(command_name(&inv.command), base_parameters(inv.precision));
    Outcome {
        exit_code: Status::Error.exit_code(),
        stdout: render(&env, inv.format),
        stderr: format!("error: {e}\n"),
        envelope: Some(env),
    }
}
