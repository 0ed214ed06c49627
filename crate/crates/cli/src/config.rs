//! Problem configuration documents.
//!
//! ```json
//! {"family":"pendulum","params":{"a":0.04},"period":6.283185307,
//!  "forcing":[{"mode":1,"amplitude":0.05}],
//!  "derivative_bound":0.04,"majorants":[{"eps":0,"M":0.04}]}
//! ```
//!
//! Unknown keys are rejected at every level.

use std::collections::BTreeMap;

use oddsol_core::{Family, Nonlinearity, Problem, ProblemError};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("malformed configuration: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unknown family `{0}` (expected zero, linear, pendulum, tanh_g or cubic)")]
    UnknownFamily(String),
    #[error("family `{family}` requires parameter `{name}`")]
    MissingParameter { family: String, name: &'static str },
    #[error("family `{family}` has no parameter `{name}`")]
    UnknownParameter { family: String, name: String },
    #[error("forcing mode must be a positive integer, got {0}")]
    BadForcingMode(i64),
    #[error("unknown sweep parameter `{0}`")]
    UnknownSweepParameter(String),
    #[error("{0}")]
    Problem(#[from] ProblemError),
}

impl ConfigError {
    /// Stable machine-readable code, distinct per failure kind.
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::Malformed(_) => "E_MALFORMED",
            ConfigError::UnknownFamily(_) => "E_UNKNOWN_FAMILY",
            ConfigError::MissingParameter { .. } => "E_PARAM_MISSING",
            ConfigError::UnknownParameter { .. } => "E_PARAM_UNKNOWN",
            ConfigError::BadForcingMode(_) => "E_FORCING_MODE",
            ConfigError::UnknownSweepParameter(_) => "E_SWEEP_PARAM",
            ConfigError::Problem(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingEntry {
    pub mode: i64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MajorantEntry {
    pub eps: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    pub period: f64,
    #[serde(default)]
    pub forcing: Vec<ForcingEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub majorants: Vec<MajorantEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

fn family_parameter(family: &str) -> Result<Option<&'static str>, ConfigError> {
    match family {
        "zero" => Ok(None),
        "linear" => Ok(Some("c")),
        "pendulum" => Ok(Some("a")),
        "tanh_g" => Ok(Some("s")),
        "cubic" => Ok(Some("c3")),
        other => Err(ConfigError::UnknownFamily(other.to_string())),
    }
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn family(&self) -> Result<Family, ConfigError> {
        let expected = family_parameter(&self.family)?;
        if let Some(name) = self.params.keys().find(|k| Some(k.as_str()) != expected) {
            return Err(ConfigError::UnknownParameter {
                family: self.family.clone(),
                name: name.clone(),
            });
        }
        let value = match expected {
            None => 0.0,
            Some(name) => *self.params.get(name).ok_or(ConfigError::MissingParameter {
                family: self.family.clone(),
                name,
            })?,
        };
        Ok(match self.family.as_str() {
            "zero" => Family::Zero,
            "linear" => Family::Linear { c: value },
            "pendulum" => Family::Pendulum { a: value },
            "tanh_g" => Family::Tanh { s: value },
            _ => Family::Cubic { c3: value },
        })
    }

    pub fn to_problem(&self) -> Result<Problem, ConfigError> {
        let family = self.family()?;
        let mut b = Problem::builder(Nonlinearity::Builtin(family), self.period);
        for entry in &self.forcing {
            if entry.mode < 0 {
                return Err(ConfigError::BadForcingMode(entry.mode));
            }
            b = b.forcing_term(entry.mode as usize, entry.amplitude);
        }
        if let Some(bound) = self.derivative_bound {
            b = b.derivative_bound(bound);
        }
        for mj in &self.majorants {
            b = b.majorant(mj.eps, mj.m);
        }
        if let Some(label) = &self.label {
            b = b.label(label);
        }
        Ok(b.build()?)
    }

    /// Copy with `period` or the family parameter `name` replaced.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self, ConfigError> {
        let mut out = self.clone();
        if name == "period" {
            out.period = value;
        } else if family_parameter(&self.family)? == Some(name) {
            out.params.insert(name.to_string(), value);
        } else {
            return Err(ConfigError::UnknownSweepParameter(name.to_string()));
        }
        Ok(out)
    }
}

/// Parses and validates a configuration document.
pub fn parse_problem(text: &str) -> Result<Problem, ConfigError> {
    ProblemConfig::parse(text)?.to_problem()
}
