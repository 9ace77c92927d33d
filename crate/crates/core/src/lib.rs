//! Deterministic agent-based simulation of post-secondary student
//! persistence.
//!
//! A population of teachers and deaf agents lives on an optional grid world.
//! Deaf agents decide once, in year 1, whether to attend college; enrolled
//! students form links with teachers and other students, and each year they
//! may depart with probability `hazard[year] * (1 - level)`, where `level`
//! is the equally weighted mean of four non-cognitive factors (clear goals,
//! social skill, academic experience, social integration — the latter two
//! scaled by link counts). Students persisting through year 4 graduate.
//!
//! On top of the engine sit batch harnesses reproducing the standard
//! studies: one-factor sweeps, ±10% sensitivity analysis, hazard-vector
//! calibration against the reported optimum rates, and behavior search over
//! the factor grid — plus CSV/SVG/JSON reporting. Every run is a pure
//! function of its configuration and seed: identical inputs give
//! byte-identical artifacts on any platform and any thread count.

pub mod artifacts;
pub mod csvio;
pub mod engine;
mod error;
pub mod experiments;
pub mod model;
pub mod rng;
pub mod search;
pub mod stats;
pub mod svg;

pub use error::Error;

pub use engine::{run, run_traced, RunResult, SimConfig};
pub use model::{AgentStatus, FactorName, FactorSpec, FactorVector, HazardVector};
