//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anigrowth_core::circular::{rose_bins, AngleSample, DEFAULT_ROSE_BINS};
use anigrowth_core::hypothesis::{
    build_confidence_rectangle, test_distal_boot, test_distal_vm, test_joint, test_rayleigh, test_tau_ks,
    ConcentrationScale, DistalTestConfig, TestReport,
};
use anigrowth_core::sim::{
    estimate_alignment_precision, finger_rng, grow_study, simulate_study_seeded, FiveNumber, GrowthSpec, SimConfig,
};
use anigrowth_core::study::{joint_theta, variable_growth_study};
use anigrowth_core::{EstimateTable, SolverConfig};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::harness::{derive_seed, estimate_study_par, joint_replicates, reference_sample};
use crate::io::{self, IoError};
use crate::sweep::{gamma_grid, run_sweep, sweep_metadata, tau_grid, SweepSpec, SweepTest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<anigrowth_core::Error> for CliError {
    fn from(e: anigrowth_core::Error) -> Self {
        match e {
            anigrowth_core::Error::InvalidInput(_) => CliError::Data(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Model(m) => m.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "anigrowth", version, about = "Detect anisotropic growth in matched minutiae patterns")]
pub struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestArg {
    Rayleigh,
    TauKs,
    Joint,
    DistalVm,
    DistalBoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConcentrationArg {
    Mean,
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    Rayleigh,
    TauKs,
}

#[derive(Debug, clap::Args)]
pub struct SolverArgs {
    /// Break threshold on the summed squared parameter increments.
    #[arg(long, default_value_t = SolverConfig::default().epsilon)]
    pub solver_epsilon: f64,
    #[arg(long, default_value_t = SolverConfig::default().max_iterations)]
    pub max_iterations: usize,
}

impl SolverArgs {
    fn config(&self) -> CliResult<SolverConfig> {
        let c = SolverConfig {
            epsilon: self.solver_epsilon,
            max_iterations: self.max_iterations,
        };
        c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(c)
    }
}

#[derive(Debug, clap::Args)]
pub struct DataSource {
    /// Matched-pairs CSV.
    #[arg(long, conflicts_with = "sim_config")]
    pub input: Option<PathBuf>,
    /// Simulation config JSON; the stand-in preset when neither is given.
    #[arg(long)]
    pub sim_config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate (γ, β, τ, λ) for every matched pair.
    Estimate {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run one of the anisotropy tests on an estimate table.
    Test {
        estimates: PathBuf,
        #[arg(long, value_enum)]
        test: TestArg,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Accuracy on the doubled-angle scale (default 2·eta).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Alignment precision on the axis scale.
        #[arg(long, default_value_t = 0.075)]
        eta: f64,
        #[arg(long, default_value_t = 100)]
        bootstrap: usize,
        /// Axis tested by the distal tests, on the γ scale.
        #[arg(long, default_value_t = 0.0)]
        axis: f64,
        #[arg(long, value_enum, default_value = "total")]
        concentration: ConcentrationArg,
        /// Reference rates (CSV with a `tau` or `tau_hat` column).
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Simulation config used for reference samples and replicates.
        #[arg(long)]
        reference_config: Option<PathBuf>,
        /// Matched-pairs CSV behind the estimates (joint test).
        #[arg(long)]
        study: Option<PathBuf>,
        /// Null replicates for the joint rectangle.
        #[arg(long, default_value_t = 200)]
        replicates: u64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Simulate a matched-pairs dataset, optionally with injected growth.
    Simulate {
        /// Simulation config JSON (stand-in preset when absent).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Growth spec JSON.
        #[arg(long, conflicts_with_all = ["gamma", "tau"])]
        growth: Option<PathBuf>,
        /// Fixed growth axis.
        #[arg(long, requires = "tau")]
        gamma: Option<f64>,
        /// Fixed growth rate.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Smallest detected growth rate per direction.
    Sweep {
        #[arg(long, value_enum)]
        test: SweepArg,
        #[command(flatten)]
        source: DataSource,
        /// Directions kπ/steps, k = 0, …, steps − 1.
        #[arg(long, default_value_t = 20)]
        gamma_steps: usize,
        #[arg(long, default_value_t = 0.002)]
        tau_step: f64,
        #[arg(long, default_value_t = 0.3)]
        tau_max: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Reference rates for the rate test (simulated from the config otherwise).
        #[arg(long)]
        reference: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Alignment precision from estimated rotations.
    AlignPrecision {
        estimates: PathBuf,
        /// Where to write the five-number summary CSV.
        #[arg(long)]
        boxplot: Option<PathBuf>,
    },
    /// Rose-diagram counts of the doubled axes.
    Rose {
        estimates: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ROSE_BINS)]
        bins: usize,
    },
    /// Grow a dataset with random (τ, λ), estimate and run the tests.
    Study {
        #[command(flatten)]
        source: DataSource,
        /// Growth spec JSON.
        #[arg(long)]
        growth: PathBuf,
        #[arg(long, default_value_t = 0.075)]
        eta: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 100)]
        bootstrap: usize,
        /// Where to write the reports JSON (boxplot CSV goes to --output).
        #[arg(long)]
        reports: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display()))),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn load_sim_config(path: Option<&Path>, seed: u64) -> CliResult<SimConfig> {
    let config = match path {
        Some(p) => io::load_json::<SimConfig>(p)?,
        None => SimConfig {
            seed,
            ..SimConfig::stand_in()
        },
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

fn load_source(source: &DataSource, seed: u64) -> CliResult<anigrowth_core::StudyDataset> {
    match &source.input {
        Some(p) => Ok(io::load_study(p)?),
        None => Ok(simulate_study_seeded(&load_sim_config(source.sim_config.as_deref(), seed)?)?),
    }
}

fn json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn report_bytes(report: &TestReport, format: Option<Format>) -> CliResult<Vec<u8>> {
    match format {
        Some(Format::Csv) => {
            let mut buf = Vec::new();
            io::write_report_csv(report, &mut buf)?;
            Ok(buf)
        }
        _ => {
            let mut s = io::report_json(report)?;
            s.push('\n');
            Ok(s.into_bytes())
        }
    }
}

fn doubled(table: &EstimateTable) -> CliResult<AngleSample> {
    if table.is_empty() {
        return Err(CliError::Data("estimate table is empty".into()));
    }
    Ok(AngleSample::new(table.doubled_angles())?)
}

fn warn_nonconverged(keys: &[(u32, u32)]) {
    for (p, k) in keys {
        eprintln!("warning: estimate for finger {p} impression {k} did not converge");
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let out = cli.output.as_deref();
    match cli.command {
        Command::Estimate { input, solver } => {
            let study = io::load_study(&input)?;
            let est = estimate_study_par(&study, &solver.config()?)?;
            warn_nonconverged(&est.nonconverged);
            let bytes = match cli.format {
                Some(Format::Json) => {
                    let rows: Vec<io::EstimateRecord> = est.table.rows().map(Into::into).collect();
                    json(&rows)?
                }
                _ => {
                    let mut buf = Vec::new();
                    io::write_estimates(&est.table, &mut buf)?;
                    buf
                }
            };
            emit(out, &bytes)
        }
        Command::Test {
            estimates,
            test,
            alpha,
            epsilon,
            eta,
            bootstrap,
            axis,
            concentration,
            reference,
            reference_config,
            study,
            replicates,
            solver,
        } => {
            let table = io::load_estimates(&estimates)?;
            let distal = DistalTestConfig {
                epsilon: epsilon.unwrap_or(2.0 * eta),
                alpha,
                bootstrap_b: bootstrap,
                axis,
                concentration: match concentration {
                    ConcentrationArg::Mean => ConcentrationScale::MeanResultant,
                    ConcentrationArg::Total => ConcentrationScale::TotalResultant,
                },
            };
            let usage = |e: anigrowth_core::Error| CliError::Usage(e.to_string());
            let report = match test {
                TestArg::Rayleigh => test_rayleigh(&doubled(&table)?, alpha).map_err(usage)?,
                TestArg::TauKs => {
                    let reference = match (reference, reference_config) {
                        (Some(p), _) => io::load_tau_sample(&p)?,
                        (None, Some(p)) => {
                            let cfg = load_sim_config(Some(&p), cli.seed)?;
                            reference_sample(&cfg, &solver.config()?)?.taus
                        }
                        (None, None) => {
                            return Err(CliError::Usage(
                                "tau-ks needs --reference or --reference-config".into(),
                            ))
                        }
                    };
                    if reference.is_empty() || table.is_empty() {
                        return Err(CliError::Data("rate samples must be non-empty".into()));
                    }
                    let mut r = test_tau_ks(&table.taus(), &reference, alpha).map_err(usage)?;
                    r.seed = Some(cli.seed);
                    r
                }
                TestArg::Joint => {
                    let study_path =
                        study.ok_or_else(|| CliError::Usage("joint needs --study (matched-pairs CSV)".into()))?;
                    let data = io::load_study(&study_path)?;
                    let theta = joint_theta(&data, &table)?;
                    let cfg = load_sim_config(reference_config.as_deref(), cli.seed)?;
                    let reps = joint_replicates(&cfg, replicates, &solver.config()?)?;
                    let rect = build_confidence_rectangle(&reps, alpha)?;
                    let mut r = test_joint(theta, &rect)?;
                    r.seed = Some(cli.seed);
                    r
                }
                TestArg::DistalVm => {
                    distal.validate().map_err(usage)?;
                    test_distal_vm(&doubled(&table)?, &distal)?
                }
                TestArg::DistalBoot => {
                    distal.validate().map_err(usage)?;
                    if bootstrap < 50 {
                        return Err(CliError::Usage("--bootstrap must be at least 50".into()));
                    }
                    test_distal_boot(&doubled(&table)?, &distal, cli.seed)?
                }
            };
            let bytes = report_bytes(&report, cli.format)?;
            if out.is_some() {
                std::io::stdout().write_all(&bytes)?;
            }
            emit(out, &bytes)
        }
        Command::Simulate {
            config,
            growth,
            gamma,
            tau,
        } => {
            let cfg = load_sim_config(config.as_deref(), cli.seed)?;
            let mut study = simulate_study_seeded(&cfg)?;
            let spec = match (growth, tau) {
                (Some(p), _) => Some(io::load_json::<GrowthSpec>(&p)?),
                (None, Some(t)) => Some(GrowthSpec::fixed(gamma.unwrap_or(0.0), t)),
                (None, None) => None,
            };
            if let Some(spec) = spec {
                let mut rng = finger_rng(derive_seed(cfg.seed, u64::MAX), 0);
                study = grow_study(&study, &spec, &mut rng).map_err(|e| CliError::Usage(e.to_string()))?.0;
            }
            let mut buf = Vec::new();
            io::write_study(&study, &mut buf)?;
            emit(out, &buf)
        }
        Command::Sweep {
            test,
            source,
            gamma_steps,
            tau_step,
            tau_max,
            alpha,
            reference,
            solver,
        } => {
            let solver = solver.config()?;
            let study = load_source(&source, cli.seed)?;
            if gamma_steps == 0 || !(tau_step > 0.0) || !(tau_max >= tau_step) {
                return Err(CliError::Usage("sweep needs gamma-steps >= 1 and 0 < tau-step <= tau-max".into()));
            }
            let spec = SweepSpec {
                gamma_grid: gamma_grid(gamma_steps),
                tau_grid: tau_grid(tau_step, tau_max),
                test: match test {
                    SweepArg::Rayleigh => SweepTest::Rayleigh,
                    SweepArg::TauKs => SweepTest::TauKs,
                },
                alpha,
                seed: cli.seed,
            };
            spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let reference = match (spec.test, reference) {
                (SweepTest::Rayleigh, _) => None,
                (SweepTest::TauKs, Some(p)) => Some(io::load_tau_sample(&p)?),
                (SweepTest::TauKs, None) => {
                    let cfg = load_sim_config(source.sim_config.as_deref(), cli.seed)?;
                    let cfg = SimConfig {
                        seed: derive_seed(cfg.seed, 1),
                        ..cfg
                    };
                    Some(reference_sample(&cfg, &solver)?.taus)
                }
            };
            let points = run_sweep(&study, &spec, reference.as_deref(), &solver)?;
            let meta = sweep_metadata(&spec, &points, reference.as_ref().map(Vec::len));
            let rows: Vec<(f64, Option<f64>)> = points.iter().map(|p| (p.gamma, p.tau_min)).collect();
            let bytes = match cli.format {
                Some(Format::Json) => json(&points)?,
                _ => {
                    let mut buf = Vec::new();
                    io::write_sweep(&rows, &mut buf)?;
                    buf
                }
            };
            if let Some(path) = out {
                let mut meta_path = path.as_os_str().to_owned();
                meta_path.push(".meta.json");
                fs::write(PathBuf::from(meta_path), json(&meta)?)?;
            }
            emit(out, &bytes)
        }
        Command::AlignPrecision { estimates, boxplot } => {
            let table = io::load_estimates(&estimates)?;
            if table.is_empty() {
                return Err(CliError::Usage("estimate table is empty".into()));
            }
            let betas = table.betas();
            let eta = estimate_alignment_precision(&betas)?;
            let summary = FiveNumber::of(&betas)?;
            if let Some(path) = boxplot {
                let mut buf = Vec::new();
                io::write_boxplots(&[("beta_hat", summary)], &mut buf)?;
                fs::write(&path, buf).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            }
            #[derive(Serialize)]
            struct Precision {
                eta: f64,
                epsilon: f64,
                n: usize,
                quartile_rule: &'static str,
                boxplot: FiveNumber,
            }
            emit(
                out,
                &json(&Precision {
                    eta,
                    epsilon: 2.0 * eta,
                    n: betas.len(),
                    quartile_rule: "linear interpolation at (n-1)q",
                    boxplot: summary,
                })?,
            )
        }
        Command::Rose { estimates, bins } => {
            let table = io::load_estimates(&estimates)?;
            let bins = rose_bins(&doubled(&table)?, bins).map_err(|e| CliError::Usage(e.to_string()))?;
            let mut buf = Vec::new();
            io::write_rose(&bins, &mut buf)?;
            emit(out, &buf)
        }
        Command::Study {
            source,
            growth,
            eta,
            alpha,
            bootstrap,
            reports,
            solver,
        } => {
            let solver = solver.config()?;
            let study = load_source(&source, cli.seed)?;
            let spec: GrowthSpec = io::load_json(&growth)?;
            let distal = DistalTestConfig {
                epsilon: 2.0 * eta,
                alpha,
                bootstrap_b: bootstrap,
                ..DistalTestConfig::default()
            };
            distal.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let ref_cfg = load_sim_config(source.sim_config.as_deref(), cli.seed)?;
            let ref_cfg = SimConfig {
                seed: derive_seed(ref_cfg.seed, 1),
                ..ref_cfg
            };
            let reference = reference_sample(&ref_cfg, &solver)?.taus;
            let mut rng = finger_rng(derive_seed(cli.seed, 2), 0);
            let outcome = variable_growth_study(&study, &spec, &reference, &distal, &solver, &mut rng)?;
            warn_nonconverged(&outcome.estimates.nonconverged);
            let col = |f: fn(&anigrowth_core::study::GrowthComparison) -> f64| -> Vec<f64> {
                outcome.comparisons.iter().map(f).collect()
            };
            let series = [
                ("tau", FiveNumber::of(&col(|c| c.tau))?),
                ("tau_hat", FiveNumber::of(&col(|c| c.tau_hat))?),
                ("lambda", FiveNumber::of(&col(|c| c.lambda))?),
                ("lambda_hat", FiveNumber::of(&col(|c| c.lambda_hat))?),
            ];
            let mut buf = Vec::new();
            io::write_boxplots(&series, &mut buf)?;
            let mut reports_json = serde_json::to_string_pretty(&outcome.reports)
                .map_err(|e| CliError::Data(e.to_string()))?;
            reports_json.push('\n');
            match reports {
                Some(path) => fs::write(path, reports_json)?,
                None => eprint!("{reports_json}"),
            }
            emit(out, &buf)
        }
    }
}

/// Parses the process arguments, runs, and maps errors to exit codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
