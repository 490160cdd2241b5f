//! Monte Carlo check of the estimator's limit law along a size ladder.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::engine::{replicate, with_workers};
use super::report::{write_json, write_raw_csv, RawRow};
use super::stats::{principal_axes, summarize, Projection};
use super::Check;
use crate::error::{Error, Result};
use crate::estimate::lse;
use crate::limits::{condition_statistic, limit_law, LimitLaw};
use crate::mat2::Matrix2;
use crate::model::{CaseTag, ModelParams, TriangleWindow};
use crate::simulate::Simulator;

/// Share of singular replications above which a run is aborted.
pub const MAX_SINGULAR_SHARE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeRecord {
    pub m: u64,
    pub s: u64,
    pub params: ModelParams,
    pub rate: f64,
    pub condition_statistic: f64,
    pub reps_used: usize,
    pub singular_count: usize,
    pub jitter: f64,
    /// Mean of `rate * (theta_hat - theta_m)`.
    pub mean: [f64; 2],
    pub covariance: Matrix2,
    pub target: Matrix2,
    /// `covariance - target`.
    pub deviation: Matrix2,
    /// Covariance of `rate * Theta_m^(1/2) (theta_hat - theta_m)` (boundary case).
    pub normalized_covariance: Option<Matrix2>,
    pub projections: Vec<Projection>,
    pub checks: Vec<Check>,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub law: LimitLaw,
    pub sizes: Vec<SizeRecord>,
    /// Interior case: the null-direction variance decreases along the ladder.
    pub null_direction_decreasing: Option<bool>,
    /// Acceptance rests on the last ladder point.
    pub pass: bool,
}

/// Wall-clock timings, kept out of the report so reports stay byte-reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_secs: f64,
    pub per_size_secs: Vec<f64>,
}

pub struct CltRun {
    pub report: ExperimentReport,
    /// Raw per-replication rows for each ladder point.
    pub raw: Vec<Vec<RawRow>>,
    pub timing: Timing,
}

pub fn run_clt(config: &ExperimentConfig, workers: Option<usize>) -> Result<CltRun> {
    config.validate()?;
    let start = Instant::now();
    let design = &config.design;
    let m_probe = config.ladder.iter().map(|&(m, _)| m).max().unwrap_or(1);
    let law = limit_law(design, m_probe)?;
    let mut sizes = Vec::with_capacity(config.ladder.len());
    let mut raw = Vec::with_capacity(config.ladder.len());
    let mut per_size_secs = Vec::new();
    for (idx, &(m, s)) in config.ladder.iter().enumerate() {
        let t0 = Instant::now();
        let (record, rows) = run_size(config, &law, idx as u32, m, s, workers)?;
        sizes.push(record);
        raw.push(rows);
        per_size_secs.push(t0.elapsed().as_secs_f64());
    }
    let null_direction_decreasing = (law.case_tag == CaseTag::Interior).then(|| {
        let v: Vec<f64> = sizes
            .iter()
            .filter_map(|r| r.projections.iter().find(|p| p.name == "null").map(|p| p.variance))
            .collect();
        v.windows(2).all(|w| w[1] < w[0])
    });
    let pass = sizes.last().is_some_and(|r| r.within_tolerance);
    Ok(CltRun {
        report: ExperimentReport {
            // the output location is not part of the experiment
            config: ExperimentConfig { out_dir: None, ..config.clone() },
            seed: config.seed,
            law,
            sizes,
            null_direction_decreasing,
            pass,
        },
        raw,
        timing: Timing {
            total_secs: start.elapsed().as_secs_f64(),
            per_size_secs,
        },
    })
}

fn run_size(
    config: &ExperimentConfig,
    law: &LimitLaw,
    point: u32,
    m: u64,
    s: u64,
    workers: Option<usize>,
) -> Result<(SizeRecord, Vec<RawRow>)> {
    let design = &config.design;
    let params = design.params_at(m)?;
    let window = TriangleWindow::balanced(s as i64);
    let rate = law.rate(m, s)?;
    let sim = Simulator::new(params, window, config.method(), config.dist)?;
    let outcomes = with_workers(workers, || {
        replicate(&sim, config.seed, point, config.reps, |rep, field| {
            match lse(field, window) {
                Ok(est) => {
                    let e = est.error(params);
                    Ok(Some(RawRow {
                        rep_id: rep,
                        alpha_hat: est.alpha_hat,
                        beta_hat: est.beta_hat,
                        scaled_err: [rate * e[0], rate * e[1]],
                    }))
                }
                Err(Error::SingularDesign { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
    })??;
    let reps = outcomes.len();
    let rows: Vec<RawRow> = outcomes.into_iter().flatten().collect();
    let singular = reps - rows.len();
    if singular as f64 > MAX_SINGULAR_SHARE * reps as f64 {
        return Err(Error::TooManySingular { singular, reps });
    }
    let errs: Vec<[f64; 2]> = rows.iter().map(|r| r.scaled_err).collect();
    let (mean, cov) = summarize(&errs);
    let target = law.covariance;

    let normalized_covariance = if law.case_tag == CaseTag::Boundary {
        let root = law.normalizer(m)?;
        let z: Vec<[f64; 2]> = errs.iter().map(|e| root.mul_vec(*e)).collect();
        Some(summarize(&z).1)
    } else {
        None
    };

    let tol = config.tolerances;
    let mut checks = Vec::new();
    let projections;
    match law.case_tag {
        CaseTag::Interior => {
            // the limit lives on the difference direction; its complement is null
            let [live, null] = principal_axes(&target);
            let p_live = Projection::new("live", live, &errs, &target);
            let p_null = Projection::new("null", null, &errs, &target);
            checks.push(Check::relative("live-direction variance", p_live.variance, p_live.target_variance, tol.cov_rel_tol));
            checks.push(Check::below("null-direction variance", p_null.variance, tol.zero_var_ceiling));
            projections = vec![p_live, p_null];
        }
        CaseTag::Boundary => {
            let [major, minor] = principal_axes(&target);
            projections = vec![
                Projection::new("major", major, &errs, &target),
                Projection::new("minor", minor, &errs, &target),
            ];
            if law.normalized_only {
                let z = normalized_covariance.unwrap_or_default();
                let id = Matrix2::identity();
                for (name, v, t) in entry_triples(&z, &id) {
                    if t == 0.0 {
                        checks.push(Check::below(&format!("normalized {name} magnitude"), v.abs(), tol.cov_rel_tol));
                    } else {
                        checks.push(Check::relative(&format!("normalized {name}"), v, t, tol.cov_rel_tol));
                    }
                }
            } else {
                for (name, v, t) in entry_triples(&cov, &target) {
                    checks.push(Check::relative(&format!("covariance {name}"), v, t, tol.cov_rel_tol));
                }
            }
        }
    }
    let within_tolerance = checks.iter().all(|c| c.pass);
    let record = SizeRecord {
        m,
        s,
        params,
        rate,
        condition_statistic: condition_statistic(design, m, s),
        reps_used: rows.len(),
        singular_count: singular,
        jitter: sim.jitter(),
        mean,
        covariance: cov,
        target,
        deviation: cov - target,
        normalized_covariance,
        projections,
        checks,
        within_tolerance,
    };
    Ok((record, rows))
}

fn entry_triples(a: &Matrix2, b: &Matrix2) -> [(&'static str, f64, f64); 3] {
    [("11", a.a11, b.a11), ("12", a.a12, b.a12), ("22", a.a22, b.a22)]
}

/// Writes `report.json`, `raw_m{m}_s{s}.csv` per ladder point and the `timing.json`
/// sidecar into `dir`.
pub fn write_outputs(run: &CltRun, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_json(&dir.join("report.json"), &run.report)?;
    for (rec, rows) in run.report.sizes.iter().zip(&run.raw) {
        let f = std::fs::File::create(dir.join(format!("raw_m{}_s{}.csv", rec.m, rec.s)))?;
        write_raw_csv(std::io::BufWriter::new(f), rows)?;
    }
    write_json(&dir.join("timing.json"), &run.timing)?;
    Ok(())
}
