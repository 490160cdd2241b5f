//! Experiment orchestration: Monte Carlo runs of the limit theorem, exact and
//! Monte Carlo verification suites, and report output.

pub mod clt;
pub mod config;
pub mod engine;
pub mod report;
pub mod stats;
pub mod verify;

use serde::{Deserialize, Serialize};

pub use clt::{run_clt, write_outputs, CltRun, ExperimentReport, SizeRecord, Timing};
pub use config::{boundary_ladder, interior_ladder, ExperimentConfig, Tolerances};

/// One pass/fail comparison recorded in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub upper: Option<f64>,
    pub pass: bool,
}

impl Check {
    /// `|value - target| <= rel * |target|`.
    pub fn relative(name: &str, value: f64, target: f64, rel: f64) -> Self {
        let half = rel * target.abs();
        Self {
            name: name.to_string(),
            value,
            target: Some(target),
            lower: Some(target - half),
            upper: Some(target + half),
            pass: (value - target).abs() <= half,
        }
    }

    /// `value < ceiling`.
    pub fn below(name: &str, value: f64, ceiling: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            target: None,
            lower: None,
            upper: Some(ceiling),
            pass: value < ceiling,
        }
    }

    /// `value <= ceiling`.
    pub fn at_most(name: &str, value: f64, ceiling: f64) -> Self {
        Self {
            pass: value <= ceiling,
            ..Self::below(name, value, ceiling)
        }
    }

    /// `lower <= value <= upper`.
    pub fn within(name: &str, value: f64, lower: f64, upper: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            target: None,
            lower: Some(lower),
            upper: Some(upper),
            pass: (lower..=upper).contains(&value),
        }
    }

    /// A boolean property.
    pub fn holds(name: &str, ok: bool) -> Self {
        Self {
            name: name.to_string(),
            value: if ok { 1.0 } else { 0.0 },
            target: None,
            lower: None,
            upper: None,
            pass: ok,
        }
    }
}
