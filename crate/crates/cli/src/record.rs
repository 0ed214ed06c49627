//! JSON run records.

use oddsol_core::{ContractionCertificate, Problem, SolveError, SolveReport};
use serde::{Deserialize, Serialize};

use crate::config::ProblemConfig;

/// One record per invocation. Everything except `wall_time_s` is a
/// deterministic function of config, flags and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub label: String,
    pub config: ProblemConfig,
    pub options: serde_json::Value,
    pub outcome: serde_json::Value,
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub holds: bool,
    pub lambda: Option<f64>,
    pub lipschitz_g: Option<f64>,
    pub norm_bound: f64,
    /// `2 / T^2`.
    pub threshold: f64,
    pub reason: Option<String>,
}

impl CertificateRecord {
    pub fn new(p: &Problem, cert: Result<ContractionCertificate, SolveError>) -> Self {
        let norm_bound = p.period() * p.period() / 2.0;
        match cert {
            Ok(c) => CertificateRecord {
                holds: c.holds,
                lambda: Some(c.lambda),
                lipschitz_g: Some(c.lipschitz_g),
                norm_bound: c.norm_bound,
                threshold: c.threshold(),
                reason: None,
            },
            Err(e) => CertificateRecord {
                holds: false,
                lambda: None,
                lipschitz_g: None,
                norm_bound,
                threshold: 1.0 / norm_bound,
                reason: Some(e.to_string()),
            },
        }
    }
}

/// Scalar summary of a [`SolveReport`], written as the solve sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub method: String,
    pub regime: Option<String>,
    pub iterations: Option<usize>,
    pub map_applications: Option<usize>,
    pub last_step_norm: Option<f64>,
    pub residual: Option<f64>,
    pub fixed_point_residual: Option<f64>,
    pub solution_norm: Option<f64>,
    pub modes: usize,
    pub apriori_bound: Option<f64>,
    pub lambda_path: Vec<f64>,
    pub damping: Option<f64>,
    pub diverging: Option<bool>,
    pub certificate: CertificateRecord,
    pub error: Option<String>,
}

impl SolveSummary {
    pub fn from_report(method: &str, r: &SolveReport, certificate: CertificateRecord) -> Self {
        SolveSummary {
            converged: true,
            method: method.to_string(),
            regime: Some(r.regime.as_str().to_string()),
            iterations: Some(r.iterations),
            map_applications: Some(r.step_norms.len()),
            last_step_norm: r.step_norms.last().copied(),
            residual: Some(r.residual),
            fixed_point_residual: Some(r.fixed_point_residual),
            solution_norm: Some(r.solution.sup_norm()),
            modes: r.solution.modes(),
            apriori_bound: r.apriori_bound,
            lambda_path: r.lambda_path.clone(),
            damping: Some(r.damping),
            diverging: None,
            certificate,
            error: None,
        }
    }

    pub fn from_error(
        method: &str,
        modes: usize,
        e: &SolveError,
        certificate: CertificateRecord,
    ) -> Self {
        let mut s = match e.partial_report() {
            Some(r) => SolveSummary::from_report(method, r, certificate),
            None => SolveSummary {
                converged: false,
                method: method.to_string(),
                regime: None,
                iterations: None,
                map_applications: None,
                last_step_norm: None,
                residual: None,
                fixed_point_residual: None,
                solution_norm: None,
                modes,
                apriori_bound: None,
                lambda_path: Vec::new(),
                damping: None,
                diverging: None,
                certificate,
                error: None,
            },
        };
        s.converged = false;
        s.error = Some(e.to_string());
        if let SolveError::NotConverged { diverging, .. } = e {
            s.diverging = Some(*diverging);
        }
        s
    }
}
