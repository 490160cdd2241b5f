//! Command-line front end. Exit codes: 0 pass, 2 failed check, 1 usage or
//! configuration error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::covariance::{CovKernel, CovMethod};
use crate::error::{Error, Result};
use crate::estimate::lse;
use crate::harness::report::{fmt_f64, to_json};
use crate::harness::verify::{self, default_grid, default_probe_pairs};
use crate::harness::{boundary_ladder, interior_ladder, run_clt, write_outputs, ExperimentConfig};
use crate::io::{read_field_csv, write_field_csv};
use crate::limits::{condition_statistic, limit_law, rate};
use crate::model::{CaseTag, ModelParams, NearlyUnstableDesign, TriangleWindow};
use crate::rng::{InnovationDist, RngStream};
use crate::simulate::{simulate, SimMethod};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "spar", version, about = "Planar autoregressive fields: covariances, simulation, estimation and limit checks")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stationary covariances.
    #[command(subcommand)]
    Cov(CovCmd),
    /// Field simulation.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Least-squares fit of a field CSV.
    Estimate(EstimateArgs),
    /// Limit laws of nearly-unstable designs.
    #[command(subcommand)]
    Limits(LimitsCmd),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Verification suites.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<ModelParams> {
        let p = ModelParams::new(self.alpha, self.beta);
        p.check_stationary()?;
        Ok(p)
    }
}

#[derive(Debug, Subcommand)]
enum CovCmd {
    /// One covariance R(k, l).
    Eval {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[arg(long, allow_hyphen_values = true)]
        l: i64,
        #[arg(long, default_value = "closed-form")]
        method: CovMethod,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// R(k, l) for |k| <= kmax, |l| <= lmax as CSV `k,l,value`.
    Table {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long)]
        kmax: i64,
        #[arg(long)]
        lmax: i64,
        #[arg(long, default_value = "closed-form")]
        method: CovMethod,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check of the four covariance routes on the default grid.
    Verify(CovVerifyArgs),
}

#[derive(Debug, Args)]
struct CovVerifyArgs {
    #[arg(long, default_value_t = 6)]
    kmax: i64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum SimCmd {
    /// Draw one field on the window T(k, l) and write it as CSV.
    Field {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long)]
        k: i64,
        #[arg(long)]
        l: i64,
        #[arg(long)]
        method: Option<SimMethod>,
        #[arg(long, default_value = "gaussian")]
        dist: InnovationDist,
        #[arg(long)]
        seed: u64,
        /// Stream id within the seed.
        #[arg(long, default_value_t = 0)]
        rep: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k: i64,
    #[arg(long)]
    l: i64,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum LimitsCmd {
    /// Print the limit law and the condition statistic along a ladder.
    Describe {
        /// Design JSON, or an experiment config whose design and ladder are used.
        #[arg(long)]
        design: PathBuf,
        /// Model indices for the default ladder (ignored for experiment configs).
        #[arg(long, value_delimiter = ',', default_values_t = [16u64, 32, 64, 128])]
        ms: Vec<u64>,
    },
}

#[derive(Debug, Subcommand)]
enum ExperimentCmd {
    /// Run a Monte Carlo experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides the config output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long)]
    design: PathBuf,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    s: u64,
    #[arg(long)]
    reps: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.2)]
    tol: f64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum VerifyCmd {
    /// Covariance routes against each other and the recursion identities.
    Cov(CovVerifyArgs),
    /// Scaled E[B] along a ladder against its limit.
    InfoTrend {
        #[arg(long)]
        design: PathBuf,
        #[arg(long, value_delimiter = ',')]
        ms: Option<Vec<u64>>,
        #[arg(long, default_value_t = 0.1)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scaled covariance bounds and decay, plus the difference and pmf sweeps.
    Covlim {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 400)]
        n_probe: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo mean of the scaled det B.
    Detb(McArgs),
    /// Monte Carlo covariance of the scaled score.
    Score(McArgs),
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Cov(c) => cov(c),
        Command::Sim(SimCmd::Field { p, k, l, method, dist, seed, rep, out }) => {
            let params = p.params()?;
            let w = TriangleWindow::new(k, l);
            let method = method.unwrap_or_else(|| SimMethod::default_for(dist));
            let field = simulate(params, w, method, dist, &mut RngStream::new(seed, rep))?;
            write_field_csv(sink(out.as_deref())?, &field)?;
            Ok(true)
        }
        Command::Estimate(a) => estimate(a),
        Command::Limits(LimitsCmd::Describe { design, ms }) => describe(&design, &ms),
        Command::Experiment(ExperimentCmd::Run { config, seed, workers, out_dir }) => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if out_dir.is_some() {
                cfg.out_dir = out_dir;
            }
            let run = run_clt(&cfg, workers)?;
            match &cfg.out_dir {
                Some(dir) => {
                    write_outputs(&run, dir)?;
                    for r in &run.report.sizes {
                        println!(
                            "m={} s={} reps={} singular={} within_tolerance={}",
                            r.m, r.s, r.reps_used, r.singular_count, r.within_tolerance
                        );
                    }
                    println!("pass={} report={}", run.report.pass, dir.join("report.json").display());
                }
                None => print!("{}", to_json(&run.report)?),
            }
            Ok(run.report.pass)
        }
        Command::Verify(v) => verify_cmd(v),
    }
}

fn cov(c: CovCmd) -> Result<bool> {
    match c {
        CovCmd::Eval { p, k, l, method, tol } => {
            let kern = CovKernel::new(p.params()?, method, tol)?;
            println!("{}", fmt_f64(kern.get(k, l)?));
            Ok(true)
        }
        CovCmd::Table { p, kmax, lmax, method, tol, out } => {
            let kern = CovKernel::new(p.params()?, method, tol)?;
            let mut w = csv::Writer::from_writer(sink(out.as_deref())?);
            w.write_record(["k", "l", "value"])?;
            for k in -kmax..=kmax {
                for l in -lmax..=lmax {
                    w.write_record([k.to_string(), l.to_string(), fmt_f64(kern.get(k, l)?)])?;
                }
            }
            w.flush()?;
            Ok(true)
        }
        CovCmd::Verify(a) => cov_verify(a),
    }
}

#[derive(Serialize)]
struct CovVerifyReport {
    agreement: verify::CovAgreementReport,
    identities: verify::IdentityReport,
    pass: bool,
}

fn cov_verify(a: CovVerifyArgs) -> Result<bool> {
    let grid = default_grid();
    let agreement = verify::verify_cov(&grid, a.kmax, a.tol)?;
    let identities = verify::verify_identities(&grid, a.kmax, a.tol)?;
    let pass = agreement.pass && identities.pass;
    emit(a.out.as_deref(), &CovVerifyReport { agreement, identities, pass })?;
    Ok(pass)
}

fn estimate(a: EstimateArgs) -> Result<bool> {
    let w = TriangleWindow::new(a.k, a.l);
    let file = File::open(&a.input).map_err(|e| Error::InvalidConfig(format!("{}: {e}", a.input.display())))?;
    let field = read_field_csv(BufReader::new(file), w)?;
    let est = lse(&field, w)?;
    if a.json {
        print!("{}", to_json(&est)?);
    } else {
        println!("alpha_hat {}", fmt_f64(est.alpha_hat));
        println!("beta_hat {}", fmt_f64(est.beta_hat));
        println!("detB {}", fmt_f64(est.det_b));
    }
    Ok(true)
}

/// A design file holds either a design object or an experiment config.
/// A design and, when the file was an experiment config, its ladder.
type LoadedDesign = (NearlyUnstableDesign, Option<Vec<(u64, u64)>>);

fn load_design(path: &Path) -> Result<LoadedDesign> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{origin}: {e}")))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
    if value.get("ladder").is_some() {
        let cfg = ExperimentConfig::from_json(&text, &origin)?;
        return Ok((cfg.design, Some(cfg.ladder)));
    }
    let design = serde_json::from_value(value).map_err(|e| Error::InvalidConfig(format!("{origin}: {e}")))?;
    Ok((design, None))
}

fn default_ladder(design: &NearlyUnstableDesign, ms: &[u64]) -> Vec<(u64, u64)> {
    match design.case_tag {
        CaseTag::Interior => interior_ladder(ms),
        CaseTag::Boundary => boundary_ladder(ms),
    }
}

#[derive(Serialize)]
struct LadderRow {
    m: u64,
    s: u64,
    alpha_m: f64,
    beta_m: f64,
    condition_statistic: f64,
    rate: f64,
}

#[derive(Serialize)]
struct Description {
    law: crate::limits::LimitLaw,
    ladder: Vec<LadderRow>,
}

fn describe(path: &Path, ms: &[u64]) -> Result<bool> {
    let (design, ladder) = load_design(path)?;
    let ladder = ladder.unwrap_or_else(|| default_ladder(&design, ms));
    let m_probe = ladder.iter().map(|&(m, _)| m).max().unwrap_or(1);
    let law = limit_law(&design, m_probe)?;
    let rows = ladder
        .iter()
        .map(|&(m, s)| {
            let p = design.params_at(m)?;
            Ok(LadderRow {
                m,
                s,
                alpha_m: p.alpha,
                beta_m: p.beta,
                condition_statistic: condition_statistic(&design, m, s),
                rate: rate(&design, m, s)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    print!("{}", to_json(&Description { law, ladder: rows })?);
    Ok(true)
}

#[derive(Serialize)]
struct CovLimOutput {
    covlim: verify::CovLimReport,
    diffbound: verify::SweepReport,
    pmf_diff: verify::SweepReport,
    pmf_level: verify::SweepReport,
    pass: bool,
}

fn verify_cmd(v: VerifyCmd) -> Result<bool> {
    match v {
        VerifyCmd::Cov(a) => cov_verify(a),
        VerifyCmd::InfoTrend { design, ms, tol, out } => {
            let (d, ladder) = load_design(&design)?;
            let ladder = match (ms, ladder) {
                (Some(ms), _) => default_ladder(&d, &ms),
                (None, Some(l)) => l,
                (None, None) => default_ladder(&d, &[16, 32, 64]),
            };
            let r = verify::verify_info_trend(&d, &ladder, tol)?;
            emit(out.as_deref(), &r)?;
            Ok(r.pass)
        }
        VerifyCmd::Covlim { design, m, n_probe, out } => {
            let (d, _) = load_design(&design)?;
            let covlim = verify::verify_covlim(&d, m, n_probe, &default_probe_pairs())?;
            let (qs, nus) = (&verify::SWEEP_QS, &verify::SWEEP_NUS);
            let diffbound = verify::diffbound_sweep(qs, nus, 40, verify::DIFFBOUND_CEILING)?;
            let pmf_diff = verify::pmf_sweep(qs, nus, &verify::PMF_SIZES, false, verify::PMF_DIFF_CEILING);
            let pmf_level = verify::pmf_sweep(qs, nus, &verify::PMF_SIZES, true, verify::PMF_LEVEL_CEILING);
            let pass = covlim.pass && diffbound.pass && pmf_diff.pass && pmf_level.pass;
            emit(out.as_deref(), &CovLimOutput { covlim, diffbound, pmf_diff, pmf_level, pass })?;
            Ok(pass)
        }
        VerifyCmd::Detb(a) => {
            let (d, _) = load_design(&a.design)?;
            let r = verify::verify_detb(&d, a.m, a.s, a.reps, a.seed, a.tol, a.workers)?;
            emit(a.out.as_deref(), &r)?;
            Ok(r.pass)
        }
        VerifyCmd::Score(a) => {
            let (d, _) = load_design(&a.design)?;
            let r = verify::verify_score(&d, a.m, a.s, a.reps, a.seed, a.tol, a.workers)?;
            emit(a.out.as_deref(), &r)?;
            Ok(r.pass)
        }
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn emit<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut w = sink(path)?;
    w.write_all(to_json(value)?.as_bytes())?;
    w.flush()?;
    Ok(())
}
