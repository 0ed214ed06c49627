//! Subcommands. Exit codes: 0 success, 2 input error, 3 certificate fails,
//! 4 non-convergence, 5 verification fails.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use oddsol_core::{
    certify, cross_validate, shoot, solve_continuation, solve_picard, ContinuationOptions,
    OddPeriodicFunction, PicardOptions, Problem, ShootingOptions, SolveError, SolveReport,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, ProblemConfig};
use crate::io::{fmt_num, read_solution_csv, solution_csv};
use crate::record::{CertificateRecord, RunRecord, SolveSummary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;
pub const EXIT_VERIFICATION: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "oddsol",
    version,
    about = "Odd periodic solutions of u'' + g(u) = k(t)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Auto,
    Picard,
    Continuation,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct SolveFlags {
    #[arg(long, value_enum, default_value = "auto")]
    pub method: Method,
    /// Step sup-norm tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Sine modes N.
    #[arg(long, default_value_t = oddsol_core::DEFAULT_MODES)]
    pub modes: usize,
    /// Initial continuation increment.
    #[arg(long, default_value_t = 0.1)]
    pub lambda_step: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the contraction condition ||g'|| < 2/T^2.
    Certify { config: PathBuf },
    /// Compute a solution; writes CSV plus a JSON sidecar next to it.
    Solve {
        config: PathBuf,
        #[command(flatten)]
        flags: SolveFlags,
        #[arg(long, default_value = "solution.csv")]
        out: PathBuf,
    },
    /// Check a solution file against the ODE and the shooting oracle.
    Verify {
        config: PathBuf,
        solution: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Solve over a range of one parameter (`period` or the family parameter).
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[command(flatten)]
        flags: SolveFlags,
        /// CSV output; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run Picard, continuation and shooting on one problem and compare.
    Compare {
        config: PathBuf,
        #[command(flatten)]
        flags: SolveFlags,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: format!("{}: {}", e.code(), e),
        }
    }
}

fn input_error(message: String) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message,
    }
}

fn load(path: &Path) -> Result<(ProblemConfig, Problem), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_error(format!("E_IO: cannot read {}: {e}", path.display())))?;
    let config = ProblemConfig::parse(&text)?;
    let problem = config.to_problem()?;
    Ok((config, problem))
}

/// Runs a parsed command line, writing records to `out` and diagnostics to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let started = Instant::now();
    let result = match cli.command {
        Command::Certify { config } => cmd_certify(&config),
        Command::Solve {
            config,
            flags,
            out: path,
        } => cmd_solve(&config, &flags, &path),
        Command::Verify {
            config,
            solution,
            tol,
        } => cmd_verify(&config, &solution, tol),
        Command::Sweep {
            config,
            param,
            from,
            to,
            steps,
            flags,
            out: path,
        } => cmd_sweep(
            &config,
            &param,
            from,
            to,
            steps,
            &flags,
            path.as_deref(),
            out,
        ),
        Command::Compare { config, flags } => cmd_compare(&config, &flags),
    };
    match result {
        Ok((mut record, code)) => {
            if let Some(r) = record.as_mut() {
                r.wall_time_s = started.elapsed().as_secs_f64();
                let _ = writeln!(out, "{}", r.to_json());
            }
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

type Outcome = Result<(Option<RunRecord>, i32), Failure>;

fn record(
    command: &str,
    config: &ProblemConfig,
    p: &Problem,
    options: serde_json::Value,
    outcome: impl Serialize,
) -> RunRecord {
    RunRecord {
        command: command.to_string(),
        label: p.label().to_string(),
        config: config.clone(),
        options,
        outcome: serde_json::to_value(outcome).expect("outcome serializes"),
        wall_time_s: 0.0,
    }
}

fn cmd_certify(path: &Path) -> Outcome {
    let (config, p) = load(path)?;
    let cert = CertificateRecord::new(&p, certify(&p));
    let code = if cert.holds {
        EXIT_OK
    } else {
        EXIT_CERTIFICATE
    };
    Ok((Some(record("certify", &config, &p, json!({}), &cert)), code))
}

fn check_flags(flags: &SolveFlags) -> Result<(), Failure> {
    if !(flags.tol > 0.0 && flags.tol.is_finite()) {
        return Err(input_error("E_OPTION: --tol must be positive".into()));
    }
    if flags.modes < 2 {
        return Err(input_error("E_OPTION: --modes must be at least 2".into()));
    }
    if !(flags.lambda_step > 0.0 && flags.lambda_step <= 1.0) {
        return Err(input_error(
            "E_OPTION: --lambda-step must lie in (0, 1]".into(),
        ));
    }
    Ok(())
}

fn picard_options(flags: &SolveFlags) -> PicardOptions {
    PicardOptions {
        modes: flags.modes,
        tol: flags.tol,
        max_iter: flags.max_iter,
        initial_guess: None,
    }
}

fn continuation_options(flags: &SolveFlags) -> ContinuationOptions {
    ContinuationOptions {
        modes: flags.modes,
        tol: flags.tol,
        lambda_step: flags.lambda_step,
        ..ContinuationOptions::default()
    }
}

/// Resolves `auto` and runs the chosen solver.
fn solve_with(p: &Problem, flags: &SolveFlags) -> (&'static str, Result<SolveReport, SolveError>) {
    let certified = certify(p).map(|c| c.holds).unwrap_or(false);
    let method = match flags.method {
        Method::Auto if certified => Method::Picard,
        Method::Auto => Method::Continuation,
        m => m,
    };
    match method {
        Method::Picard => ("picard", solve_picard(p, &picard_options(flags))),
        _ => (
            "continuation",
            solve_continuation(p, &continuation_options(flags)),
        ),
    }
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| input_error(format!("E_IO: cannot write {}: {e}", path.display())))
}

fn cmd_solve(path: &Path, flags: &SolveFlags, csv_path: &Path) -> Outcome {
    let (config, p) = load(path)?;
    check_flags(flags)?;
    let cert = CertificateRecord::new(&p, certify(&p));
    let (method, result) = solve_with(&p, flags);
    let (summary, best, code) = match &result {
        Ok(r) => (
            SolveSummary::from_report(method, r, cert),
            Some(&r.solution),
            EXIT_OK,
        ),
        Err(SolveError::InvalidOption(msg)) => return Err(input_error(format!("E_OPTION: {msg}"))),
        Err(e) => (
            SolveSummary::from_error(method, flags.modes, e, cert),
            e.partial_report().map(|r| &r.solution),
            EXIT_NONCONVERGENCE,
        ),
    };
    if let Some(u) = best {
        write_file(csv_path, &solution_csv(&p, u))?;
    }
    let options = json!({ "flags": flags, "out": csv_path.display().to_string() });
    let rec = record("solve", &config, &p, options, &summary);
    write_file(&sidecar_path(csv_path), &deterministic_json(&rec))?;
    Ok((Some(rec), code))
}

/// Sidecar text; wall time is zeroed so identical runs give identical bytes.
fn deterministic_json(rec: &RunRecord) -> String {
    let mut r = rec.clone();
    r.wall_time_s = 0.0;
    r.to_json() + "\n"
}

#[derive(Debug, Serialize)]
struct VerifyOutcome {
    passed: bool,
    tol: f64,
    distance: Option<f64>,
    candidate_residual: f64,
    oracle_residual: Option<f64>,
    candidate_slope: Option<f64>,
    oracle_slope: Option<f64>,
    error: Option<String>,
}

fn cmd_verify(path: &Path, solution: &Path, tol: f64) -> Outcome {
    let (config, p) = load(path)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(input_error("E_OPTION: --tol must be positive".into()));
    }
    let text = std::fs::read_to_string(solution)
        .map_err(|e| input_error(format!("E_IO: cannot read {}: {e}", solution.display())))?;
    let u = read_solution_csv(&text, p.period()).map_err(|e| input_error(format!("E_CSV: {e}")))?;
    let candidate_residual = oddsol_core::residual(&p, &u);
    let outcome = match cross_validate(&p, &u, tol, &ShootingOptions::default()) {
        Ok(cv) => VerifyOutcome {
            passed: cv.passed,
            tol,
            distance: Some(cv.distance),
            candidate_residual: cv.candidate_residual,
            oracle_residual: Some(cv.oracle_residual),
            candidate_slope: Some(cv.candidate_slope),
            oracle_slope: Some(cv.oracle_slope),
            error: None,
        },
        Err(e) => VerifyOutcome {
            passed: false,
            tol,
            distance: None,
            candidate_residual,
            oracle_residual: None,
            candidate_slope: Some(u.derivative().evaluate(0.0)),
            oracle_slope: None,
            error: Some(e.to_string()),
        },
    };
    let code = if outcome.passed {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    };
    let options = json!({ "tol": tol, "solution": solution.display().to_string() });
    Ok((Some(record("verify", &config, &p, options, &outcome)), code))
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub lambda: Option<f64>,
    pub holds: bool,
    pub converged: bool,
    pub iterations: Option<usize>,
    pub solution_norm: Option<f64>,
    pub residual: Option<f64>,
    pub oracle_distance: Option<f64>,
}

pub const SWEEP_HEADER: &str =
    "param,lambda,holds,converged,iterations,solution_norm,residual,oracle_distance";

impl SweepRow {
    fn csv(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map(fmt_num).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{}",
            fmt_num(self.param),
            opt(self.lambda),
            self.holds,
            self.converged,
            self.iterations.map(|i| i.to_string()).unwrap_or_default(),
            opt(self.solution_norm),
            opt(self.residual),
            opt(self.oracle_distance),
        )
    }
}

pub fn sweep_values(from: f64, to: f64, steps: usize) -> Option<Vec<f64>> {
    if !from.is_finite() || !to.is_finite() || steps == 0 || from > to || (steps == 1 && from != to)
    {
        return None;
    }
    if steps == 1 {
        return Some(vec![from]);
    }
    Some(
        (0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect(),
    )
}

fn sweep_row(p: &Problem, value: f64, flags: &SolveFlags) -> SweepRow {
    let cert = certify(p).ok();
    let (_, result) = solve_with(p, flags);
    let (converged, report) = match &result {
        Ok(r) => (true, Some(r)),
        Err(e) => (false, e.partial_report()),
    };
    let oracle_distance = result
        .as_ref()
        .ok()
        .and_then(|r| cross_validate(p, &r.solution, 1e-6, &ShootingOptions::default()).ok())
        .map(|cv| cv.distance);
    SweepRow {
        param: value,
        lambda: cert.map(|c| c.lambda),
        holds: cert.is_some_and(|c| c.holds),
        converged,
        iterations: report.map(|r| r.iterations),
        solution_norm: report.map(|r| r.solution.sup_norm()),
        residual: report.map(|r| r.residual),
        oracle_distance,
    }
}

/// Rows in parameter order, computed in parallel.
pub fn sweep_table(
    config: &ProblemConfig,
    param: &str,
    values: &[f64],
    flags: &SolveFlags,
) -> Result<Vec<SweepRow>, ConfigError> {
    let problems = values
        .iter()
        .map(|&v| config.with_parameter(param, v)?.to_problem())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(problems
        .par_iter()
        .zip(values.par_iter())
        .map(|(p, &v)| sweep_row(p, v, flags))
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    path: &Path,
    param: &str,
    from: f64,
    to: f64,
    steps: usize,
    flags: &SolveFlags,
    csv_path: Option<&Path>,
    out: &mut dyn Write,
) -> Outcome {
    let (config, _) = load(path)?;
    check_flags(flags)?;
    let values = sweep_values(from, to, steps).ok_or_else(|| {
        input_error(format!(
            "E_RANGE: bad sweep range from={from} to={to} steps={steps}"
        ))
    })?;
    let rows = sweep_table(&config, param, &values, flags)?;
    let mut text = String::from(SWEEP_HEADER);
    text.push('\n');
    for row in &rows {
        text.push_str(&row.csv());
        text.push('\n');
    }
    match csv_path {
        Some(path) => write_file(path, &text)?,
        None => {
            let _ = out.write_all(text.as_bytes());
        }
    }
    Ok((None, EXIT_OK))
}

#[derive(Debug, Serialize)]
struct MethodOutcome {
    ok: bool,
    regime: Option<String>,
    residual: Option<f64>,
    iterations: Option<usize>,
    solution_norm: Option<f64>,
    error: Option<String>,
}

impl MethodOutcome {
    fn solved(
        regime: Option<&str>,
        residual: f64,
        iterations: Option<usize>,
        u: &OddPeriodicFunction,
    ) -> Self {
        MethodOutcome {
            ok: true,
            regime: regime.map(String::from),
            residual: Some(residual),
            iterations,
            solution_norm: Some(u.sup_norm()),
            error: None,
        }
    }

    fn failed(e: impl ToString) -> Self {
        MethodOutcome {
            ok: false,
            regime: None,
            residual: None,
            iterations: None,
            solution_norm: None,
            error: Some(e.to_string()),
        }
    }
}

#[derive(Debug, Serialize)]
struct CompareOutcome {
    certificate: CertificateRecord,
    picard: MethodOutcome,
    continuation: MethodOutcome,
    shooting: MethodOutcome,
    picard_continuation: Option<f64>,
    picard_shooting: Option<f64>,
    continuation_shooting: Option<f64>,
}

fn cmd_compare(path: &Path, flags: &SolveFlags) -> Outcome {
    let (config, p) = load(path)?;
    check_flags(flags)?;
    let certificate = CertificateRecord::new(&p, certify(&p));
    let picard = solve_picard(&p, &picard_options(flags));
    let continuation = solve_continuation(&p, &continuation_options(flags));

    // Seed the shooting bracket from whichever spectral solution exists.
    let seed = continuation
        .as_ref()
        .or(picard.as_ref())
        .ok()
        .map(|r| r.solution.derivative().evaluate(0.0));
    let bracket = match seed {
        Some(s) => {
            let d = 1e-3 * (1.0 + s.abs());
            (s - d, s + d)
        }
        None => (-1.0, 1.0),
    };
    let shooting_opts = ShootingOptions {
        modes: flags.modes,
        ..ShootingOptions::default()
    };
    let shot = shoot(&p, bracket, &shooting_opts);

    let dist = |a: Option<&OddPeriodicFunction>, b: Option<&OddPeriodicFunction>| match (a, b) {
        (Some(a), Some(b)) => Some(a.distance(b)),
        _ => None,
    };
    let u_pic = picard.as_ref().ok().map(|r| &r.solution);
    let u_con = continuation.as_ref().ok().map(|r| &r.solution);
    let u_sho = shot.as_ref().ok().map(|s| &s.reconstructed);

    let outcome = CompareOutcome {
        picard: match &picard {
            Ok(r) => MethodOutcome::solved(
                Some(r.regime.as_str()),
                r.residual,
                Some(r.iterations),
                &r.solution,
            ),
            Err(e) => MethodOutcome::failed(e),
        },
        continuation: match &continuation {
            Ok(r) => MethodOutcome::solved(
                Some(r.regime.as_str()),
                r.residual,
                Some(r.iterations),
                &r.solution,
            ),
            Err(e) => MethodOutcome::failed(e),
        },
        shooting: match &shot {
            Ok(s) => MethodOutcome::solved(
                None,
                oddsol_core::residual(&p, &s.reconstructed),
                Some(s.evaluations),
                &s.reconstructed,
            ),
            Err(e) => MethodOutcome::failed(e),
        },
        picard_continuation: dist(u_pic, u_con),
        picard_shooting: dist(u_pic, u_sho),
        continuation_shooting: dist(u_con, u_sho),
        certificate,
    };
    let all_ok = outcome.picard.ok && outcome.continuation.ok && outcome.shooting.ok;
    let code = if all_ok { EXIT_OK } else { EXIT_NONCONVERGENCE };
    let options = json!({ "flags": flags });
    Ok((
        Some(record("compare", &config, &p, options, &outcome)),
        code,
    ))
}
