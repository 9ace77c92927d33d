//! Batch studies over the engine: one-factor sweeps, ±10% sensitivity
//! analysis, and hazard calibration against the reported optimum endpoints.
//!
//! Replicates are embarrassingly parallel: every replicate's run seed is
//! derived from `(master_seed, stream, replicate)` alone, and aggregation
//! works over a deterministically ordered result set, so thread count never
//! changes output. With `common_random_numbers` enabled (the default) the
//! same replicate seeds are reused at every level, which pairs runs across
//! levels and makes the monotone effect of a factor visible without huge
//! replicate counts.

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{run, FactorSpecs, RunResult, SimConfig};
use crate::error::Error;
use crate::model::{FactorName, FactorSpec, FactorVector, HazardVector};
use crate::rng::{derive_seed, domain};
use crate::stats::Summary;

/// Seed for one replicate run within an experiment stream.
pub fn replicate_seed(master_seed: u64, dom: u64, stream: u64, rep: u32) -> u64 {
    derive_seed(&[master_seed, dom, stream, u64::from(rep)])
}

/// The standard sweep levels 0.1, 0.2, ..., 1.0.
pub fn default_levels() -> Vec<f64> {
    (1..=10).map(|i| f64::from(i) / 10.0).collect()
}

/// One-factor sweep protocol: the varied factor takes each level in turn
/// while the other three stay at `fixed_level`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub factor: FactorName,
    pub levels: Vec<f64>,
    pub fixed_level: f64,
    pub repetitions: u32,
    pub base_config: SimConfig,
    pub master_seed: u64,
    /// Reuse the same replicate seeds at every level.
    pub common_random_numbers: bool,
}

impl SweepSpec {
    pub fn new(factor: FactorName, base_config: SimConfig, master_seed: u64) -> Self {
        SweepSpec {
            factor,
            levels: default_levels(),
            fixed_level: 0.5,
            repetitions: 10,
            base_config,
            master_seed,
            common_random_numbers: true,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.levels.is_empty() {
            return Err(Error::invalid("sweep needs at least one level"));
        }
        for pair in self.levels.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::invalid("sweep levels must be strictly increasing"));
            }
        }
        if self
            .levels
            .iter()
            .any(|l| !(*l > 0.0 && *l <= 1.0))
        {
            return Err(Error::invalid("sweep levels must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.fixed_level) {
            return Err(Error::invalid("fixed_level must lie in [0, 1]"));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be positive"));
        }
        self.base_config.validate()
    }

    fn config_at_level(&self, level: f64) -> SimConfig {
        let mut config = self.base_config.clone();
        let mut specs = FactorSpecs::all_fixed(self.fixed_level);
        specs.set(self.factor, FactorSpec::Fixed(level));
        config.factor_specs = specs;
        config
    }
}

/// Metric recorded in an experiment table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Persisted,
    Graduates,
    Quitters,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Persisted => "persisted",
            Metric::Graduates => "graduates",
            Metric::Quitters => "quitters",
        }
    }

    pub fn parse(s: &str) -> Result<Metric, Error> {
        match s {
            "persisted" => Ok(Metric::Persisted),
            "graduates" => Ok(Metric::Graduates),
            "quitters" => Ok(Metric::Quitters),
            other => Err(Error::schema(
                "metric",
                format!("unknown metric `{other}`"),
            )),
        }
    }
}

/// Summary statistics for one `(level, metric[, year])` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub factor: FactorName,
    pub level: f64,
    pub metric: Metric,
    /// 1-based year for `Persisted` rows; `None` for run totals.
    pub year: Option<u8>,
    pub summary: Summary,
    pub reps: u32,
}

/// Aggregated statistics over replicates for a sweep or sensitivity grid.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ExperimentTable {
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentTable {
    /// Distinct levels in first-appearance order.
    pub fn levels(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for row in &self.rows {
            if !out.iter().any(|l| l == &row.level) {
                out.push(row.level);
            }
        }
        out
    }

    pub fn rows_for(&self, metric: Metric) -> impl Iterator<Item = &ExperimentRow> {
        self.rows.iter().filter(move |r| r.metric == metric)
    }
}

fn aggregate_rows(
    factor: FactorName,
    level: f64,
    years: u8,
    results: &[RunResult],
    rows: &mut Vec<ExperimentRow>,
) {
    let reps = results.len() as u32;
    let summary_of = |samples: Vec<f64>| {
        Summary::from_samples(&samples).expect("at least one replicate per level")
    };
    for year in 1..=years {
        let samples: Vec<f64> = results
            .iter()
            .map(|r| f64::from(r.persisted_by_year[usize::from(year) - 1]))
            .collect();
        rows.push(ExperimentRow {
            factor,
            level,
            metric: Metric::Persisted,
            year: Some(year),
            summary: summary_of(samples),
            reps,
        });
    }
    for (metric, extract) in [
        (Metric::Graduates, (|r: &RunResult| f64::from(r.graduates)) as fn(&RunResult) -> f64),
        (Metric::Quitters, |r: &RunResult| f64::from(r.quitters)),
    ] {
        let samples: Vec<f64> = results.iter().map(extract).collect();
        rows.push(ExperimentRow {
            factor,
            level,
            metric,
            year: None,
            summary: summary_of(samples),
            reps,
        });
    }
}

/// Run every `(level, replicate)` cell of a sweep and return the raw results
/// grouped by level, in level order.
pub fn sweep_raw(spec: &SweepSpec) -> Result<Vec<(f64, Vec<RunResult>)>, Error> {
    spec.validate()?;
    let reps = spec.repetitions;
    let cells: Vec<(usize, u32)> = (0..spec.levels.len())
        .flat_map(|li| (0..reps).map(move |rep| (li, rep)))
        .collect();
    let results: Vec<RunResult> = cells
        .par_iter()
        .map(|&(li, rep)| {
            let mut config = spec.config_at_level(spec.levels[li]);
            let stream = if spec.common_random_numbers {
                0
            } else {
                li as u64 + 1
            };
            config.seed = replicate_seed(spec.master_seed, domain::SWEEP, stream, rep);
            run(&config)
        })
        .collect::<Result<_, _>>()?;
    let mut grouped = Vec::with_capacity(spec.levels.len());
    for (li, &level) in spec.levels.iter().enumerate() {
        let start = li * reps as usize;
        grouped.push((level, results[start..start + reps as usize].to_vec()));
    }
    Ok(grouped)
}

/// One-factor sweep: per level, the per-year persistence counts plus final
/// graduate and quitter tallies, each summarized over the replicates.
pub fn sweep(spec: &SweepSpec) -> Result<ExperimentTable, Error> {
    let grouped = sweep_raw(spec)?;
    let mut rows = Vec::new();
    for (level, results) in &grouped {
        aggregate_rows(spec.factor, *level, spec.base_config.years, results, &mut rows);
    }
    Ok(ExperimentTable { rows })
}

/// Result of a ±10% sensitivity evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityOutcome {
    pub factor: FactorName,
    pub center: f64,
    /// The evaluated levels `0.9c, c, 1.1c` (upper clamped to 1).
    pub levels: [f64; 3],
    /// True when `1.1 * center` exceeded 1 and was clamped.
    pub clamped: bool,
    pub table: ExperimentTable,
}

/// Evaluate departed-student distributions at `0.9*center`, `center`, and
/// `1.1*center` for one factor, holding the other factors at their base
/// specs. Replicates share seeds across the three levels.
pub fn sensitivity(
    base_config: &SimConfig,
    factor: FactorName,
    center: f64,
    repetitions: u32,
    master_seed: u64,
) -> Result<SensitivityOutcome, Error> {
    if !(center > 0.0 && center <= 1.0) {
        return Err(Error::invalid(format!("center {center} outside (0, 1]")));
    }
    if repetitions == 0 {
        return Err(Error::invalid("repetitions must be positive"));
    }
    base_config.validate()?;
    let raw_upper = 1.1 * center;
    let clamped = raw_upper > 1.0;
    let levels = [0.9 * center, center, if clamped { 1.0 } else { raw_upper }];
    let cells: Vec<(usize, u32)> = (0..3)
        .flat_map(|li| (0..repetitions).map(move |rep| (li, rep)))
        .collect();
    let results: Vec<RunResult> = cells
        .par_iter()
        .map(|&(li, rep)| {
            let mut config = base_config.clone();
            config
                .factor_specs
                .set(factor, FactorSpec::Fixed(levels[li]));
            config.seed = replicate_seed(master_seed, domain::SENSITIVITY, 0, rep);
            run(&config)
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for (li, &level) in levels.iter().enumerate() {
        let start = li * repetitions as usize;
        let samples: Vec<f64> = results[start..start + repetitions as usize]
            .iter()
            .map(|r| f64::from(r.quitters))
            .collect();
        rows.push(ExperimentRow {
            factor,
            level,
            metric: Metric::Quitters,
            year: None,
            summary: Summary::from_samples(&samples).expect("repetitions >= 1"),
            reps: repetitions,
        });
    }
    Ok(SensitivityOutcome {
        factor,
        center,
        levels,
        clamped,
        table: ExperimentTable { rows },
    })
}

/// Graduate count reported at the optimum factor mix.
pub const OPTIMUM_GRADUATE_COUNT: f64 = 88.7;
/// Departed count reported at the optimum factor mix.
pub const OPTIMUM_QUITTER_COUNT: f64 = 86.3;

/// Calibration targets as rates. The reported absolute counts exceed the
/// expected attendee count under the reference population, so the fit is to
/// `graduates/attended` and `quitters/attended` instead.
pub fn target_rates() -> (f64, f64) {
    let total = OPTIMUM_GRADUATE_COUNT + OPTIMUM_QUITTER_COUNT;
    (
        OPTIMUM_GRADUATE_COUNT / total,
        OPTIMUM_QUITTER_COUNT / total,
    )
}

/// The factor mix the optimum endpoints were reported at: social skill 0.9,
/// every other factor 1.
pub fn optimum_factor_point() -> FactorVector {
    FactorVector {
        goal: 1.0,
        academic_experience: 1.0,
        social_skill: 0.9,
        social_integration: 1.0,
    }
}

/// Grid-search protocol for fitting the hazard vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationSpec {
    pub base_config: SimConfig,
    pub factor_point: FactorVector,
    pub replicates: u32,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_step: f64,
    pub master_seed: u64,
}

impl CalibrationSpec {
    pub fn new(base_config: SimConfig, master_seed: u64) -> Self {
        CalibrationSpec {
            base_config,
            factor_point: optimum_factor_point(),
            replicates: 200,
            grid_min: 0.05,
            grid_max: 0.95,
            grid_step: 0.05,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be positive"));
        }
        if self.grid_step <= 0.0 {
            return Err(Error::invalid("grid_step must be positive"));
        }
        if !(0.0..=1.0).contains(&self.grid_min) || !(0.0..=1.0).contains(&self.grid_max) {
            return Err(Error::invalid("hazard grid bounds must lie in [0, 1]"));
        }
        self.factor_point.validate()?;
        self.base_config.validate()
    }

    fn grid_values(&self) -> Vec<f64> {
        let mut vals = Vec::new();
        let mut i = 0u32;
        loop {
            let v = self.grid_min + f64::from(i) * self.grid_step;
            if v > self.grid_max + 1e-12 {
                break;
            }
            // snap accumulated float drift to clean decimals
            vals.push(((v.min(1.0)) * 1e12).round() / 1e12);
            i += 1;
        }
        vals
    }
}

/// Fitted hazards and the achieved rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationOutcome {
    pub fitted: HazardVector,
    pub graduate_rate: f64,
    pub quitter_rate: f64,
    pub target_graduate_rate: f64,
    pub target_quitter_rate: f64,
    /// Euclidean distance between achieved and target rates.
    pub residual: f64,
    pub candidates_evaluated: usize,
    /// False when the search space was empty and the base hazards were
    /// reported as a best effort.
    pub feasible: bool,
}

fn mean_rates(config: &SimConfig, rep_seeds: &[u64]) -> (f64, f64) {
    let mut g_sum = 0.0;
    let mut q_sum = 0.0;
    let mut counted = 0u32;
    for &seed in rep_seeds {
        let mut c = config.clone();
        c.seed = seed;
        let r = run(&c).expect("validated calibration config");
        if r.attended > 0 {
            g_sum += f64::from(r.graduates) / f64::from(r.attended);
            q_sum += f64::from(r.quitters) / f64::from(r.attended);
            counted += 1;
        }
    }
    if counted == 0 {
        (f64::NAN, f64::NAN)
    } else {
        (g_sum / f64::from(counted), q_sum / f64::from(counted))
    }
}

/// Grid-search the hazard vector (each component over the spec's grid,
/// respecting `h1 >= h2 >= h3 >= h4`) minimizing squared error between the
/// replicate-mean graduation/departure rates at the optimum factor mix and
/// the target rates. Candidates share replicate seeds, and ties prefer the
/// earliest candidate in descending lexicographic order.
pub fn calibrate(spec: &CalibrationSpec) -> Result<CalibrationOutcome, Error> {
    spec.validate()?;
    let (target_g, target_q) = target_rates();
    let rep_seeds: Vec<u64> = (0..spec.replicates)
        .map(|rep| replicate_seed(spec.master_seed, domain::CALIBRATION, 0, rep))
        .collect();
    // the grid is dynamics-neutral; drop it for the fitting runs
    let mut eval_config = spec.base_config.clone();
    eval_config.grid = None;
    eval_config.factor_specs = FactorSpecs::fixed(spec.factor_point);

    let vals = spec.grid_values();
    let mut candidates = Vec::new();
    for &h1 in vals.iter().rev() {
        for &h2 in vals.iter().rev().filter(|&&v| v <= h1) {
            for &h3 in vals.iter().rev().filter(|&&v| v <= h2) {
                for &h4 in vals.iter().rev().filter(|&&v| v <= h3) {
                    candidates.push(HazardVector { h1, h2, h3, h4 });
                }
            }
        }
    }
    if candidates.is_empty() {
        let mut fallback = eval_config.clone();
        fallback.hazards = spec.base_config.hazards;
        let (g, q) = mean_rates(&fallback, &rep_seeds);
        let residual = ((g - target_g).powi(2) + (q - target_q).powi(2)).sqrt();
        return Ok(CalibrationOutcome {
            fitted: spec.base_config.hazards,
            graduate_rate: g,
            quitter_rate: q,
            target_graduate_rate: target_g,
            target_quitter_rate: target_q,
            residual,
            candidates_evaluated: 0,
            feasible: false,
        });
    }

    let rates: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|h| {
            let mut config = eval_config.clone();
            config.hazards = *h;
            mean_rates(&config, &rep_seeds)
        })
        .collect();

    let mut best = 0usize;
    let mut best_err = f64::INFINITY;
    for (i, &(g, q)) in rates.iter().enumerate() {
        let err = (g - target_g).powi(2) + (q - target_q).powi(2);
        if err.is_finite() && err < best_err {
            best_err = err;
            best = i;
        }
    }
    let (g, q) = rates[best];
    Ok(CalibrationOutcome {
        fitted: candidates[best],
        graduate_rate: g,
        quitter_rate: q,
        target_graduate_rate: target_g,
        target_quitter_rate: target_q,
        residual: ((g - target_g).powi(2) + (q - target_q).powi(2)).sqrt(),
        candidates_evaluated: candidates.len(),
        feasible: true,
    })
}
