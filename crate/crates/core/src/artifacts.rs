//! Artifact assembly for the command-line workflows: result JSON, CSV
//! tables, and a manifest per invocation pinning config, seed, and engine
//! version so any artifact can be reproduced exactly.

use std::path::Path;

use serde::Serialize;

use crate::csvio::{write_experiment_csv, write_trace_csv, write_trajectory_csv};
use crate::engine::{run_traced, RunResult, SimConfig};
use crate::error::Error;
use crate::experiments::{
    calibrate, sensitivity, sweep, CalibrationOutcome, CalibrationSpec, ExperimentTable,
    SensitivityOutcome, SweepSpec,
};
use crate::model::{FactorName, FactorVector, HazardVector};
use crate::search::{run_searches, Objective, SearchBest, SearchOutcome, SearchSpec};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One file to be written into the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn new(name: &str, bytes: impl Into<Vec<u8>>) -> Self {
        Artifact {
            name: name.to_string(),
            bytes: bytes.into(),
        }
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("artifact types serialize");
    s.push('\n');
    s.into_bytes()
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'static str,
    engine_version: &'static str,
    seed: u64,
    config: &'a SimConfig,
}

#[derive(Serialize)]
struct ExperimentManifest<'a, S: Serialize> {
    command: &'static str,
    engine_version: &'static str,
    master_seed: u64,
    fitted_hazards: HazardVector,
    spec: &'a S,
}

/// Execute one run and assemble `run_result.json`, `trace.csv`, and
/// `manifest.json`.
pub fn run_artifacts(config: &SimConfig) -> Result<(RunResult, Vec<Artifact>), Error> {
    let (result, trace) = run_traced(config)?;
    let artifacts = vec![
        Artifact::new("run_result.json", json_bytes(&result)),
        Artifact::new("trace.csv", write_trace_csv(&trace)),
        Artifact::new(
            "manifest.json",
            json_bytes(&RunManifest {
                command: "run",
                engine_version: ENGINE_VERSION,
                seed: config.seed,
                config,
            }),
        ),
    ];
    Ok((result, artifacts))
}

/// Execute a sweep and assemble `sweep_<factor>.csv` plus its manifest.
pub fn sweep_artifacts(spec: &SweepSpec) -> Result<(ExperimentTable, Vec<Artifact>), Error> {
    let table = sweep(spec)?;
    let artifacts = vec![
        Artifact::new(
            &format!("sweep_{}.csv", spec.factor.as_str()),
            write_experiment_csv(&table),
        ),
        Artifact::new(
            "manifest.json",
            json_bytes(&ExperimentManifest {
                command: "sweep",
                engine_version: ENGINE_VERSION,
                master_seed: spec.master_seed,
                fitted_hazards: spec.base_config.hazards,
                spec,
            }),
        ),
    ];
    Ok((table, artifacts))
}

#[derive(Serialize)]
struct SensitivityManifestSpec<'a> {
    factor: FactorName,
    center: f64,
    repetitions: u32,
    levels: [f64; 3],
    clamped: bool,
    base_config: &'a SimConfig,
}

/// Execute a sensitivity study and assemble `sensitivity_<factor>.csv` plus
/// its manifest (which records the clamp flag).
pub fn sensitivity_artifacts(
    base_config: &SimConfig,
    factor: FactorName,
    center: f64,
    repetitions: u32,
    master_seed: u64,
) -> Result<(SensitivityOutcome, Vec<Artifact>), Error> {
    let outcome = sensitivity(base_config, factor, center, repetitions, master_seed)?;
    let artifacts = vec![
        Artifact::new(
            &format!("sensitivity_{}.csv", factor.as_str()),
            write_experiment_csv(&outcome.table),
        ),
        Artifact::new(
            "manifest.json",
            json_bytes(&ExperimentManifest {
                command: "sensitivity",
                engine_version: ENGINE_VERSION,
                master_seed,
                fitted_hazards: base_config.hazards,
                spec: &SensitivityManifestSpec {
                    factor,
                    center,
                    repetitions,
                    levels: outcome.levels,
                    clamped: outcome.clamped,
                    base_config,
                },
            }),
        ),
    ];
    Ok((outcome, artifacts))
}

/// Execute the calibration grid search and assemble `calibration.json` plus
/// its manifest.
pub fn calibration_artifacts(
    spec: &CalibrationSpec,
) -> Result<(CalibrationOutcome, Vec<Artifact>), Error> {
    let outcome = calibrate(spec)?;
    let artifacts = vec![
        Artifact::new("calibration.json", json_bytes(&outcome)),
        Artifact::new(
            "manifest.json",
            json_bytes(&ExperimentManifest {
                command: "calibrate",
                engine_version: ENGINE_VERSION,
                master_seed: spec.master_seed,
                fitted_hazards: outcome.fitted,
                spec,
            }),
        ),
    ];
    Ok((outcome, artifacts))
}

#[derive(Serialize)]
struct SearchSummary<'a> {
    objective: Objective,
    best_point: FactorVector,
    best_fitness: f64,
    per_search_bests: &'a [SearchBest],
}

/// Execute the searches and assemble `search_trajectory.csv`,
/// `search_summary.json`, and the manifest.
pub fn search_artifacts(spec: &SearchSpec) -> Result<(SearchOutcome, Vec<Artifact>), Error> {
    let outcome = run_searches(spec)?;
    let artifacts = vec![
        Artifact::new(
            "search_trajectory.csv",
            write_trajectory_csv(&outcome.evaluations),
        ),
        Artifact::new(
            "search_summary.json",
            json_bytes(&SearchSummary {
                objective: outcome.objective,
                best_point: outcome.best_point,
                best_fitness: outcome.best_fitness,
                per_search_bests: &outcome.per_search_bests,
            }),
        ),
        Artifact::new(
            "manifest.json",
            json_bytes(&ExperimentManifest {
                command: "search",
                engine_version: ENGINE_VERSION,
                master_seed: spec.master_seed,
                fitted_hazards: spec.base_config.hazards,
                spec,
            }),
        ),
    ];
    Ok((outcome, artifacts))
}

/// Write every artifact into `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    for artifact in artifacts {
        std::fs::write(dir.join(&artifact.name), &artifact.bytes)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_artifacts_are_reproducible() {
        let config = SimConfig::baseline(7);
        let (r1, a1) = run_artifacts(&config).unwrap();
        let (r2, a2) = run_artifacts(&config).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(a1, a2);
        let names: Vec<&str> = a1.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["run_result.json", "trace.csv", "manifest.json"]);
        let manifest = String::from_utf8(a1[2].bytes.clone()).unwrap();
        assert!(manifest.contains("\"seed\": 7"));
        assert!(manifest.contains("engine_version"));
    }

    #[test]
    fn artifacts_write_to_disk() {
        let dir = tempfile::tempdir().unwrap();
        let config = SimConfig::baseline(3);
        let (_, artifacts) = run_artifacts(&config).unwrap();
        write_artifacts(dir.path(), &artifacts).unwrap();
        for artifact in &artifacts {
            let on_disk = std::fs::read(dir.path().join(&artifact.name)).unwrap();
            assert_eq!(on_disk, artifact.bytes);
        }
    }
}
