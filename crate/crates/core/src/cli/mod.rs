//! Command-line front end: `run`, `verify`, `refine` and `list-models`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::verify::{certify, refinement_study, CertificateReport, RefinementStudy};
use crate::trajectory::{Continuity, Trajectory};

pub mod config;
pub mod output;

pub use config::{BuiltModel, GridConfig, ModelConfig, OutputConfig, RunConfig, Setup};
pub use output::{RunSummary, SavedRun};

#[derive(Debug, Parser)]
#[command(name = "energetic", version, about = "Incremental minimization and certification of rate-independent evolutions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the incremental problem and write the trajectory.
    Run(CommonArgs),
    /// Certify a run, either solved afresh from --config or loaded from --run.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Saved run.json to verify instead of solving.
        #[arg(long, conflicts_with = "config")]
        run: Option<PathBuf>,
    },
    /// Solve on successive dyadic refinements and compare the levels.
    Refine {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Print the available model names.
    ListModels,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default: the config's output.directory, else ./out).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Verification tolerance on energy-like quantities.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Certificate did not pass (1).
    Certificate(String),
    /// Unreadable or invalid configuration or input (2).
    Config(String),
    /// A solver step failed (3).
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Certificate(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Certificate(m) | CliError::Config(m) | CliError::Solver(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::StepFailure { .. } | Error::Model(_) => CliError::Solver(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = RunConfig::load(path).map_err(CliError::Config)?;
    Ok(cfg.with_overrides(common.seed, common.tol))
}

fn out_dir(common: &CommonArgs, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.output.directory.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn wants(cfg: &RunConfig, format: config::Format) -> bool {
    cfg.output.formats.contains(&format)
}

fn summarize(setup: &Setup, sol: &crate::solvers::IncrementalSolution) -> RunSummary {
    let model = setup.model.model();
    RunSummary {
        model: model.name().to_string(),
        guarantee: sol.guarantee,
        steps: sol.grid.steps(),
        lipschitz: model.lipschitz_bound(),
        coercivity: model.coercivity_const(),
        offset: model.normalization_offset(),
        dissipation_total: sol.total_dissipation(),
        final_energy: *sol.energies.last().expect("at least one node"),
        non_attainment_steps: sol.log.iter().filter(|l| l.non_attainment).map(|l| l.step).collect(),
    }
}

/// Solves the configured problem and writes trajectory.csv and run.json.
pub fn cmd_run(common: &CommonArgs) -> Result<SavedRun, CliError> {
    let cfg = load_config(common)?;
    let setup = cfg.setup()?;
    let dir = out_dir(common, &cfg)?;
    let sol = setup.model.solve(&setup.grid, &setup.z0, &setup.strategy)?;
    let saved = SavedRun {
        summary: summarize(&setup, &sol),
        config: cfg.clone(),
        solution: sol,
    };
    if wants(&cfg, config::Format::Csv) {
        output::write_trajectory(&dir.join("trajectory.csv"), &saved.solution).map_err(CliError::Config)?;
        if let Some(fields) = &saved.solution.equilibria {
            output::write_equilibria(&dir.join("equilibria.csv"), &saved.solution, fields)
                .map_err(CliError::Config)?;
        }
    }
    output::write_json(&dir.join("run.json"), &saved).map_err(CliError::Config)?;
    Ok(saved)
}

fn load_run(path: &Path) -> Result<SavedRun, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("missing run {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Certifies a run and writes certificate.json (and certificate.csv).
pub fn cmd_verify(common: &CommonArgs, run: Option<&Path>) -> Result<CertificateReport, CliError> {
    let (cfg, saved) = match run {
        Some(path) => {
            let saved = load_run(path)?;
            (saved.config.clone().with_overrides(common.seed, common.tol), Some(saved.solution))
        }
        None => (load_config(common)?, None),
    };
    let setup = cfg.setup()?;
    let dir = out_dir(common, &cfg)?;
    let sol = match saved {
        Some(sol) => {
            if sol.grid != setup.grid {
                return Err(CliError::Config("saved run grid differs from its config".into()));
            }
            sol
        }
        None => setup.model.solve(&setup.grid, &setup.z0, &setup.strategy)?,
    };
    let traj = Trajectory::new(sol.grid.clone(), sol.states.clone(), Continuity::Left)?;
    let report = certify(setup.model.model(), &traj, Some(sol.guarantee), &setup.check);
    output::write_json(&dir.join("certificate.json"), &report).map_err(CliError::Config)?;
    if wants(&cfg, config::Format::Csv) {
        output::write_certificate_table(&dir.join("certificate.csv"), &report)
            .map_err(CliError::Config)?;
    }
    Ok(report)
}

/// Runs the refinement study and writes refinement.csv and refinement.json.
pub fn cmd_refine(common: &CommonArgs, levels: Option<usize>) -> Result<RefinementStudy, CliError> {
    let cfg = load_config(common)?;
    let setup = cfg.setup()?;
    let dir = out_dir(common, &cfg)?;
    let levels = levels.or(cfg.levels).unwrap_or(4);
    let study = refinement_study(setup.model.model(), &setup.grid, &setup.z0, &setup.strategy, levels)?;
    if wants(&cfg, config::Format::Csv) {
        output::write_refinement_table(&dir.join("refinement.csv"), &study).map_err(CliError::Config)?;
    }
    output::write_json(&dir.join("refinement.json"), &study).map_err(CliError::Config)?;
    Ok(study)
}

fn refinement_text(study: &RefinementStudy) -> String {
    let mut out = String::from("level  steps  fineness  dissipation  bound_slack  energy_gap  sup_gap_to_next\n");
    for (i, l) in study.levels.iter().enumerate() {
        out += &format!(
            "{:>5}  {:>5}  {:<8}  {:<11}  {:<11}  {:<10}  {}\n",
            l.level,
            l.steps,
            output::fmt_real(l.fineness),
            output::fmt_real(l.dissipation),
            output::fmt_real(l.bound_slack),
            output::fmt_real(l.energy_gap),
            study.sup_gaps.get(i).map_or("-".into(), |&g| output::fmt_real(g))
        );
    }
    out
}

/// Parses arguments, runs the command and maps the outcome to an exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::ListModels => {
            for (name, about) in config::MODEL_NAMES {
                println!("{name:<20} {about}");
            }
            Ok(())
        }
        Command::Run(common) => cmd_run(common).map(|saved| {
            let s = &saved.summary;
            println!(
                "{}: {} steps, guarantee {:?}, C_I {}, c_D {}, offset {}, dissipation {}",
                s.model,
                s.steps,
                s.guarantee,
                output::fmt_real(s.lipschitz),
                output::fmt_real(s.coercivity),
                output::fmt_real(s.offset),
                output::fmt_real(s.dissipation_total)
            );
        }),
        Command::Verify { common, run } => cmd_verify(common, run.as_deref()).and_then(|report| {
            print!("{}", output::certificate_text(&report));
            if report.passed {
                Ok(())
            } else {
                Err(CliError::Certificate("certificate failed".into()))
            }
        }),
        Command::Refine { common, levels } => cmd_refine(common, *levels).and_then(|study| {
            print!("{}", refinement_text(&study));
            match study.aborted {
                Some(reason) => Err(CliError::Solver(reason)),
                None => Ok(()),
            }
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
