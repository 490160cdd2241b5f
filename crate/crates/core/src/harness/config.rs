use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::{condition_statistic, rate};
use crate::model::{CaseTag, NearlyUnstableDesign};
use crate::rng::InnovationDist;
use crate::simulate::SimMethod;

/// Smallest replication count accepted for a statistical check.
pub const MIN_REPS: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed relative deviation of an empirical covariance entry (or of the
    /// non-degenerate direction variance in the interior case).
    #[serde(default = "default_cov_rel_tol")]
    pub cov_rel_tol: f64,
    /// Ceiling on the variance along the null direction of a singular limit.
    #[serde(default = "default_zero_var_ceiling")]
    pub zero_var_ceiling: f64,
}

fn default_cov_rel_tol() -> f64 {
    0.3
}

fn default_zero_var_ceiling() -> f64 {
    0.05
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cov_rel_tol: default_cov_rel_tol(),
            zero_var_ceiling: default_zero_var_ceiling(),
        }
    }
}

fn default_dist() -> InnovationDist {
    InnovationDist::Gaussian
}

/// A Monte Carlo experiment along a ladder of `(m, s)` sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub design: NearlyUnstableDesign,
    /// `(m, s)`: model index and window sum.
    pub ladder: Vec<(u64, u64)>,
    pub reps: u32,
    #[serde(default = "default_dist")]
    pub dist: InnovationDist,
    /// Defaults to the exact method for the innovation law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<SimMethod>,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(design: NearlyUnstableDesign, ladder: Vec<(u64, u64)>, reps: u32, seed: u64) -> Self {
        Self {
            design,
            ladder,
            reps,
            dist: InnovationDist::Gaussian,
            method: None,
            seed,
            tolerances: Tolerances::default(),
            out_dir: None,
        }
    }

    pub fn method(&self) -> SimMethod {
        self.method.unwrap_or_else(|| SimMethod::default_for(self.dist))
    }

    /// Parses JSON; errors carry the line and column of the offending token.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            Error::InvalidConfig(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.reps < MIN_REPS {
            return bad(format!("reps = {} but at least {MIN_REPS} are required", self.reps));
        }
        if self.ladder.is_empty() {
            return bad("ladder is empty".into());
        }
        let t = self.tolerances;
        if !(t.cov_rel_tol > 0.0) || !(t.zero_var_ceiling > 0.0) {
            return bad(format!("tolerances must be positive, got {t:?}"));
        }
        let method = self.method();
        if method.is_cholesky() && self.dist != InnovationDist::Gaussian {
            return bad(format!("method {method} needs gaussian innovations, got {}", self.dist));
        }
        check_ladder(&self.design, &self.ladder)
    }
}

/// Each `(m, s)` must give stationary parameters, a defined rate, `s >= 2`, and the
/// condition statistic must increase strictly along the ladder.
pub fn check_ladder(design: &NearlyUnstableDesign, ladder: &[(u64, u64)]) -> Result<()> {
    let mut last = f64::NEG_INFINITY;
    for (idx, &(m, s)) in ladder.iter().enumerate() {
        let at = |msg: String| Error::InvalidConfig(format!("ladder[{idx}] = ({m}, {s}): {msg}"));
        if s < 2 {
            return Err(at("window sum must be at least 2".into()));
        }
        design.params_at(m).map_err(|e| at(e.to_string()))?;
        if design.case_tag == CaseTag::Boundary {
            rate(design, m, s).map_err(|e| at(e.to_string()))?;
        }
        let stat = condition_statistic(design, m, s);
        if !(stat > last) {
            return Err(at(format!(
                "condition statistic {stat} does not increase (previous {last})"
            )));
        }
        last = stat;
    }
    Ok(())
}

/// Interior ladders `s = m`.
pub fn interior_ladder(ms: &[u64]) -> Vec<(u64, u64)> {
    ms.iter().map(|&m| (m, m)).collect()
}

/// Boundary ladders `s = ceil(m^(5/4))`.
pub fn boundary_ladder(ms: &[u64]) -> Vec<(u64, u64)> {
    // the epsilon keeps exact powers such as 16^(5/4) = 32 from rounding up
    ms.iter().map(|&m| (m, ((m as f64).powf(1.25) - 1e-9).ceil() as u64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const INTERIOR: &str = r#"{
        "design": {"alpha": 0.5, "beta": 0.5, "gamma": {"kind": "const", "c": 1}, "delta": {"kind": "const", "c": 1}, "case": "interior"},
        "ladder": [[64, 64], [128, 128]],
        "reps": 1000,
        "seed": 42
    }"#;

    #[test]
    fn parses_and_defaults() {
        let cfg = ExperimentConfig::from_json(INTERIOR, "inline").unwrap();
        assert_eq!(cfg.ladder, vec![(64, 64), (128, 128)]);
        assert_eq!(cfg.method(), SimMethod::BoundaryCholesky);
        assert_eq!(cfg.tolerances, Tolerances::default());
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn zero_reps_rejected() {
        let text = INTERIOR.replace("1000", "0");
        assert!(matches!(ExperimentConfig::from_json(&text, "x"), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn malformed_json_reports_position() {
        let text = INTERIOR.replace("\"reps\": 1000,", "\"reps\": ,");
        let err = ExperimentConfig::from_json(&text, "cfg.json").unwrap_err().to_string();
        assert!(err.contains("cfg.json:4:"), "{err}");
    }

    #[test]
    fn flat_ladder_rejected() {
        let design = NearlyUnstableDesign::constant(1.0, 0.0, 2.0, 1.0).unwrap();
        // s = m keeps the statistic at sqrt 3
        let err = check_ladder(&design, &[(16, 16), (32, 32)]).unwrap_err();
        assert!(err.to_string().contains("does not increase"));
        assert!(check_ladder(&design, &boundary_ladder(&[16, 32, 64])).is_ok());
    }

    #[test]
    fn nonstationary_index_rejected() {
        let design = NearlyUnstableDesign::constant(1.0, 0.0, 2.0, 1.0).unwrap();
        // m = 1 puts alpha_m at -1
        assert!(check_ladder(&design, &[(1, 8)]).is_err());
    }

    #[test]
    fn ladders() {
        assert_eq!(boundary_ladder(&[16, 32, 64]), vec![(16, 32), (32, 77), (64, 182)]);
        assert_eq!(interior_ladder(&[64]), vec![(64, 64)]);
    }

    #[test]
    fn cholesky_needs_gaussian() {
        let mut cfg = ExperimentConfig::from_json(INTERIOR, "inline").unwrap();
        cfg.dist = InnovationDist::Rademacher;
        assert!(cfg.validate().is_ok());
        cfg.method = Some(SimMethod::FullCholesky);
        assert!(cfg.validate().is_err());
    }
}
