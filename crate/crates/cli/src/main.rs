//! Command-line front end for the persistence simulation.
//!
//! Subcommands: `run`, `sweep`, `sensitivity`, `calibrate`, `search`, and
//! `plot`. Run-producing subcommands require an explicit `--seed` and write
//! their artifacts plus a reproducibility manifest into `--out-dir`. Exit
//! codes: 0 success, 1 validation/usage error, 2 I/O error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use persistence_core::artifacts::{
    calibration_artifacts, run_artifacts, search_artifacts, sensitivity_artifacts,
    sweep_artifacts, write_artifacts, Artifact,
};
use persistence_core::csvio::{format_float, read_experiment_csv, read_trajectory_csv};
use persistence_core::model::FactorName;
use persistence_core::search::Objective;
use persistence_core::svg::{render, PlotData, PlotKind, PlotSpec};
use persistence_core::Error as CoreError;

use config::FileConfig;

#[derive(Parser)]
#[command(
    name = "persistence-sim",
    version,
    about = "Seed-reproducible agent-based simulation of post-secondary student persistence"
)]
struct Cli {
    /// Worker threads for replicates and searches; output is identical for
    /// any value.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one seeded run; writes run_result.json, trace.csv, manifest.json
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Sweep one factor across its levels, the others fixed
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        factor: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Repetitions per level
        #[arg(long)]
        reps: Option<u32>,
    },
    /// Evaluate one factor at ±10% around a center level
    Sensitivity {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        factor: String,
        #[arg(long)]
        center: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[arg(long)]
        reps: Option<u32>,
    },
    /// Fit the hazard vector to the target graduation/departure rates
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Replicates per candidate
        #[arg(long)]
        reps: Option<u32>,
    },
    /// Hill searches over the factor grid
    Search {
        #[arg(long)]
        config: PathBuf,
        /// max-graduates or min-quitters
        #[arg(long)]
        objective: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Fitness replicates per grid point
        #[arg(long)]
        reps: Option<u32>,
    },
    /// Render a CSV artifact into a standalone SVG
    Plot {
        /// per-year-lines, graduated-departed, sensitivity-boxplot, or
        /// search-trajectory
        #[arg(long)]
        kind: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        title: Option<String>,
    },
}

enum CliError {
    Validation(String),
    Io(String),
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<String> for CliError {
    fn from(msg: String) -> Self {
        CliError::Validation(msg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: could not size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    FileConfig::parse(&text).map_err(CliError::Validation)
}

fn write_out(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    write_artifacts(dir, artifacts)
        .map_err(|e| CliError::Io(format!("cannot write artifacts to {}: {e}", dir.display())))
}

fn dispatch(command: Command) -> Result<String, CliError> {
    match command {
        Command::Run {
            config,
            seed,
            out_dir,
        } => {
            let sim = load_config(&config)?.sim_config(seed)?;
            let (result, artifacts) = run_artifacts(&sim).map_err(CliError::from)?;
            write_out(&out_dir, &artifacts)?;
            Ok(format!(
                "command=run status=ok seed={seed} attended={} graduates={} quitters={} \
                 never_attended={} out_dir={}",
                result.attended,
                result.graduates,
                result.quitters,
                result.never_attended,
                out_dir.display()
            ))
        }
        Command::Sweep {
            config,
            factor,
            seed,
            out_dir,
            reps,
        } => {
            let factor = FactorName::parse(&factor).map_err(CliError::from)?;
            let spec = load_config(&config)?.sweep_spec(factor, seed, reps)?;
            let (table, artifacts) = sweep_artifacts(&spec).map_err(CliError::from)?;
            write_out(&out_dir, &artifacts)?;
            Ok(format!(
                "command=sweep status=ok factor={factor} levels={} reps={} rows={} out_dir={}",
                spec.levels.len(),
                spec.repetitions,
                table.rows.len(),
                out_dir.display()
            ))
        }
        Command::Sensitivity {
            config,
            factor,
            center,
            seed,
            out_dir,
            reps,
        } => {
            let factor = FactorName::parse(&factor).map_err(CliError::from)?;
            let file = load_config(&config)?;
            let repetitions = file.sensitivity_repetitions(reps)?;
            let base = file.sim_config(seed)?;
            let (outcome, artifacts) =
                sensitivity_artifacts(&base, factor, center, repetitions, seed)
                    .map_err(CliError::from)?;
            write_out(&out_dir, &artifacts)?;
            Ok(format!(
                "command=sensitivity status=ok factor={factor} center={} levels={},{},{} \
                 clamped={} reps={repetitions} out_dir={}",
                format_float(center),
                format_float(outcome.levels[0]),
                format_float(outcome.levels[1]),
                format_float(outcome.levels[2]),
                outcome.clamped,
                out_dir.display()
            ))
        }
        Command::Calibrate {
            config,
            seed,
            out_dir,
            reps,
        } => {
            let spec = load_config(&config)?.calibration_spec(seed, reps)?;
            let (outcome, artifacts) = calibration_artifacts(&spec).map_err(CliError::from)?;
            write_out(&out_dir, &artifacts)?;
            let h = outcome.fitted;
            Ok(format!(
                "command=calibrate status=ok h1={} h2={} h3={} h4={} graduate_rate={} \
                 quitter_rate={} residual={} candidates={} feasible={} out_dir={}",
                format_float(h.h1),
                format_float(h.h2),
                format_float(h.h3),
                format_float(h.h4),
                format_float(outcome.graduate_rate),
                format_float(outcome.quitter_rate),
                format_float(outcome.residual),
                outcome.candidates_evaluated,
                outcome.feasible,
                out_dir.display()
            ))
        }
        Command::Search {
            config,
            objective,
            seed,
            out_dir,
            reps,
        } => {
            let objective = Objective::parse(&objective).map_err(CliError::from)?;
            let spec = load_config(&config)?.search_spec(objective, seed, reps)?;
            let (outcome, artifacts) = search_artifacts(&spec).map_err(CliError::from)?;
            write_out(&out_dir, &artifacts)?;
            let p = outcome.best_point;
            Ok(format!(
                "command=search status=ok objective={} best_goal={} best_academic={} \
                 best_skill={} best_integration={} best_fitness={} searches={} evaluations={} \
                 out_dir={}",
                objective.as_str(),
                format_float(p.goal),
                format_float(p.academic_experience),
                format_float(p.social_skill),
                format_float(p.social_integration),
                format_float(outcome.best_fitness),
                spec.num_searches,
                outcome.evaluations.len(),
                out_dir.display()
            ))
        }
        Command::Plot {
            kind,
            input,
            out,
            title,
        } => {
            let kind = PlotKind::parse(&kind).map_err(CliError::from)?;
            let text = std::fs::read_to_string(&input)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", input.display())))?;
            let data = match kind {
                PlotKind::SearchTrajectory => {
                    PlotData::Trajectories(read_trajectory_csv(&text).map_err(CliError::from)?)
                }
                _ => PlotData::Table(read_experiment_csv(&text).map_err(CliError::from)?),
            };
            let mut spec = PlotSpec::new(kind);
            if let Some(title) = title {
                spec.title = title;
            }
            let svg = render(&data, &spec).map_err(CliError::from)?;
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| {
                    CliError::Io(format!("cannot create {}: {e}", parent.display()))
                })?;
            }
            std::fs::write(&out, svg.as_bytes())
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", out.display())))?;
            Ok(format!(
                "command=plot status=ok kind={} in={} out={} bytes={}",
                kind.as_str(),
                input.display(),
                out.display(),
                svg.len()
            ))
        }
    }
}
