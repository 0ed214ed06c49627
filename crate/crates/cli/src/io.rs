//! Solution CSV files.
//!
//! Header `t,u,u_prime,residual_pointwise`, one row per point of the `4N`
//! grid `t_j = j T / (4N)`, numbers in shortest round-trip decimal form.

use std::fmt::Write as _;

use oddsol_core::oracle::pointwise_residual;
use oddsol_core::{OddPeriodicFunction, Problem};

pub const CSV_HEADER: &str = "t,u,u_prime,residual_pointwise";

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("expected header `{CSV_HEADER}`")]
    BadHeader,
    #[error("line {line}: {message}")]
    BadRow { line: usize, message: String },
    #[error("row count {0} is not a multiple of 4 of at least 16")]
    BadRowCount(usize),
    #[error("line {line}: t = {found} does not match grid value {expected}")]
    OffGrid {
        line: usize,
        found: f64,
        expected: f64,
    },
    #[error("u column is not an odd periodic function: {0}")]
    NotOdd(#[from] oddsol_core::FuncSpaceError),
}

/// Shortest round-trip decimal, positional for moderate magnitudes and
/// exponent form otherwise (`%g` style).
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn solution_csv(p: &Problem, u: &OddPeriodicFunction) -> String {
    let points = 4 * u.modes();
    let period = u.period();
    let values = u.sample(points);
    let slopes = u.derivative().sample(points);
    let residuals = pointwise_residual(p, u, points);
    let mut out = String::with_capacity(points * 80);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for j in 0..points {
        let t = j as f64 * period / points as f64;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_num(t),
            fmt_num(values[j]),
            fmt_num(slopes[j]),
            fmt_num(residuals[j])
        );
    }
    out
}

/// Reads the `u` column back into an `N`-mode sine series, `N = rows / 4`.
pub fn read_solution_csv(text: &str, period: f64) -> Result<OddPeriodicFunction, CsvError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(CSV_HEADER) {
        return Err(CsvError::BadHeader);
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(CsvError::BadRow {
                line: line_no,
                message: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|e| CsvError::BadRow {
                line: line_no,
                message: e.to_string(),
            })
        };
        rows.push((line_no, parse(fields[0])?, parse(fields[1])?));
    }
    let points = rows.len();
    if points < 16 || points % 4 != 0 {
        return Err(CsvError::BadRowCount(points));
    }
    for (j, &(line, t, _)) in rows.iter().enumerate() {
        let expected = j as f64 * period / points as f64;
        if (t - expected).abs() > 1e-9 * period.max(1.0) {
            return Err(CsvError::OffGrid {
                line,
                found: t,
                expected,
            });
        }
    }
    let samples: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let u = OddPeriodicFunction::from_samples(&samples, period)?;
    Ok(u.resized(points / 4))
}
