//! Behavior search over the discretized factor grid: seeded random-restart
//! steepest-ascent hill climbing, maximizing mean graduates or minimizing
//! mean quitters.
//!
//! Fitness at a grid point is the replicate mean of the objective metric
//! with all four factors fixed at the point's values. Replicate seeds are
//! deterministic, and by default shared across points (common random
//! numbers), which makes the fitness surface deterministic and componentwise
//! monotone within a run. Fitness is memoized per point inside each search;
//! only fresh engine evaluations count against `max_evaluations`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{run, FactorSpecs, SimConfig};
use crate::error::Error;
use crate::experiments::replicate_seed;
use crate::model::FactorVector;
use crate::rng::{derive_seed, domain, Stream};

/// Search direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Objective {
    #[serde(rename = "max-graduates")]
    MaximizeGraduates,
    #[serde(rename = "min-quitters")]
    MinimizeQuitters,
}

impl Objective {
    pub fn as_str(&self) -> &'static str {
        match self {
            Objective::MaximizeGraduates => "max-graduates",
            Objective::MinimizeQuitters => "min-quitters",
        }
    }

    pub fn parse(s: &str) -> Result<Objective, Error> {
        match s {
            "max-graduates" | "maximize-graduates" => Ok(Objective::MaximizeGraduates),
            "min-quitters" | "minimize-quitters" => Ok(Objective::MinimizeQuitters),
            other => Err(Error::invalid(format!(
                "unknown objective `{other}`; use max-graduates or min-quitters"
            ))),
        }
    }

    /// True when `a` is a strict improvement over `b`.
    fn improves(&self, a: f64, b: f64) -> bool {
        match self {
            Objective::MaximizeGraduates => a > b,
            Objective::MinimizeQuitters => a < b,
        }
    }
}

/// Protocol for one batch of hill searches.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSpec {
    pub objective: Objective,
    /// Grid resolution; must divide (0, 1] into whole steps.
    pub grid_step: f64,
    pub fitness_replicates: u32,
    pub num_searches: u32,
    /// Fresh fitness evaluations allowed per search.
    pub max_evaluations: u32,
    pub base_config: SimConfig,
    pub master_seed: u64,
    /// Reuse the same replicate seeds at every grid point.
    pub common_random_numbers: bool,
}

impl SearchSpec {
    pub fn new(objective: Objective, base_config: SimConfig, master_seed: u64) -> Self {
        SearchSpec {
            objective,
            grid_step: 0.1,
            fitness_replicates: 10,
            num_searches: 10,
            max_evaluations: 200,
            base_config,
            master_seed,
            common_random_numbers: true,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.grid_step > 0.0 && self.grid_step <= 1.0) {
            return Err(Error::invalid("grid_step must lie in (0, 1]"));
        }
        let n = (1.0 / self.grid_step).round();
        if n < 1.0 || (n * self.grid_step - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "grid_step {} does not divide (0, 1] evenly",
                self.grid_step
            )));
        }
        if self.fitness_replicates == 0 || self.num_searches == 0 || self.max_evaluations == 0 {
            return Err(Error::invalid(
                "fitness_replicates, num_searches, and max_evaluations must be positive",
            ));
        }
        self.base_config.validate()
    }

    /// Number of grid levels per factor axis.
    pub fn levels_per_axis(&self) -> u8 {
        (1.0 / self.grid_step).round() as u8
    }
}

/// 1-based grid indices along (goal, academic, skill, integration).
type GridPoint = [u8; 4];

fn point_vector(point: GridPoint, levels: u8) -> FactorVector {
    let value = |i: u8| f64::from(i) / f64::from(levels);
    FactorVector {
        goal: value(point[0]),
        academic_experience: value(point[1]),
        social_skill: value(point[2]),
        social_integration: value(point[3]),
    }
}

fn point_stream_id(point: FactorVector) -> u64 {
    let id = derive_seed(&[
        point.goal.to_bits(),
        point.academic_experience.to_bits(),
        point.social_skill.to_bits(),
        point.social_integration.to_bits(),
    ]);
    // stream 0 is reserved for common random numbers
    id.max(1)
}

/// Replicate-mean fitness of one factor point under the spec's objective.
pub fn evaluate_fitness(point: FactorVector, spec: &SearchSpec) -> Result<f64, Error> {
    point.validate()?;
    let stream = if spec.common_random_numbers {
        0
    } else {
        point_stream_id(point)
    };
    let mut config = spec.base_config.clone();
    config.grid = None;
    config.factor_specs = FactorSpecs::fixed(point);
    let mut sum = 0.0;
    for rep in 0..spec.fitness_replicates {
        config.seed = replicate_seed(spec.master_seed, domain::FITNESS, stream, rep);
        let result = run(&config)?;
        sum += match spec.objective {
            Objective::MaximizeGraduates => f64::from(result.graduates),
            Objective::MinimizeQuitters => f64::from(result.quitters),
        };
    }
    Ok(sum / f64::from(spec.fitness_replicates))
}

/// One fitness evaluation within a search.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    /// 1-based search number.
    pub search_id: u32,
    /// 1-based evaluation number within the search.
    pub evaluation: u32,
    pub point: FactorVector,
    pub fitness: f64,
    pub best_so_far: f64,
}

/// Best point found by one search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchBest {
    pub search_id: u32,
    pub point: FactorVector,
    pub fitness: f64,
}

/// Outcome of one or more searches.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub objective: Objective,
    pub best_point: FactorVector,
    pub best_fitness: f64,
    pub per_search_bests: Vec<SearchBest>,
    pub evaluations: Vec<EvalRecord>,
}

struct Climber<'a> {
    spec: &'a SearchSpec,
    search_id: u32,
    levels: u8,
    stream: Stream,
    memo: HashMap<GridPoint, f64>,
    records: Vec<EvalRecord>,
    evals: u32,
    best: Option<(GridPoint, f64)>,
}

impl<'a> Climber<'a> {
    fn new(spec: &'a SearchSpec, search_id: u32) -> Self {
        Climber {
            spec,
            search_id,
            levels: spec.levels_per_axis(),
            stream: Stream::derived(spec.master_seed, domain::SEARCH, &[u64::from(search_id)]),
            memo: HashMap::new(),
            records: Vec::new(),
            evals: 0,
            best: None,
        }
    }

    fn random_point(&mut self) -> GridPoint {
        let n = u32::from(self.levels);
        [
            self.stream.next_index(n) as u8 + 1,
            self.stream.next_index(n) as u8 + 1,
            self.stream.next_index(n) as u8 + 1,
            self.stream.next_index(n) as u8 + 1,
        ]
    }

    /// Memoized fitness; `None` when the budget is exhausted and the point
    /// has never been evaluated.
    fn fitness(&mut self, point: GridPoint) -> Result<Option<f64>, Error> {
        if let Some(&f) = self.memo.get(&point) {
            return Ok(Some(f));
        }
        if self.evals >= self.spec.max_evaluations {
            return Ok(None);
        }
        let vector = point_vector(point, self.levels);
        let fitness = evaluate_fitness(vector, self.spec)?;
        self.memo.insert(point, fitness);
        self.evals += 1;
        let improved = self
            .best
            .is_none_or(|(_, b)| self.spec.objective.improves(fitness, b));
        if improved {
            self.best = Some((point, fitness));
        }
        self.records.push(EvalRecord {
            search_id: self.search_id,
            evaluation: self.evals,
            point: vector,
            fitness,
            best_so_far: self.best.expect("set above").1,
        });
        Ok(Some(fitness))
    }

    fn climb(&mut self) -> Result<(), Error> {
        let total_points = u64::from(self.levels).pow(4);
        let mut current = self.random_point();
        loop {
            let current_fit = match self.fitness(current)? {
                Some(f) => f,
                None => return Ok(()),
            };
            // steepest ascent over the axis neighbors, first-wins on ties
            let mut best_move: Option<(GridPoint, f64)> = None;
            for axis in 0..4 {
                for delta in [-1i16, 1] {
                    let idx = i16::from(current[axis]) + delta;
                    if idx < 1 || idx > i16::from(self.levels) {
                        continue;
                    }
                    let mut neighbor = current;
                    neighbor[axis] = idx as u8;
                    let fit = match self.fitness(neighbor)? {
                        Some(f) => f,
                        None => return Ok(()),
                    };
                    if self.spec.objective.improves(fit, current_fit)
                        && best_move.is_none_or(|(_, b)| self.spec.objective.improves(fit, b))
                    {
                        best_move = Some((neighbor, fit));
                    }
                }
            }
            match best_move {
                Some((next, _)) => current = next,
                None => {
                    // local optimum: restart somewhere fresh
                    if self.memo.len() as u64 >= total_points {
                        return Ok(());
                    }
                    loop {
                        let p = self.random_point();
                        if !self.memo.contains_key(&p) {
                            current = p;
                            break;
                        }
                    }
                }
            }
        }
    }
}

/// Run one seeded hill search.
pub fn hill_search(spec: &SearchSpec, search_index: u32) -> Result<SearchOutcome, Error> {
    spec.validate()?;
    let mut climber = Climber::new(spec, search_index + 1);
    climber.climb()?;
    let (point, fitness) = climber.best.expect("at least one evaluation per search");
    let best = SearchBest {
        search_id: search_index + 1,
        point: point_vector(point, climber.levels),
        fitness,
    };
    Ok(SearchOutcome {
        objective: spec.objective,
        best_point: best.point,
        best_fitness: best.fitness,
        per_search_bests: vec![best],
        evaluations: climber.records,
    })
}

/// Run `num_searches` independent hill searches and report the global best
/// (ties prefer the lowest search number).
pub fn run_searches(spec: &SearchSpec) -> Result<SearchOutcome, Error> {
    spec.validate()?;
    let singles: Vec<SearchOutcome> = (0..spec.num_searches)
        .into_par_iter()
        .map(|i| hill_search(spec, i))
        .collect::<Result<_, _>>()?;
    let mut per_search_bests = Vec::with_capacity(singles.len());
    let mut evaluations = Vec::new();
    let mut best: Option<(FactorVector, f64)> = None;
    for single in singles {
        let b = &single.per_search_bests[0];
        if best.is_none()
            || spec
                .objective
                .improves(b.fitness, best.as_ref().expect("checked").1)
        {
            best = Some((b.point, b.fitness));
        }
        per_search_bests.push(b.clone());
        evaluations.extend(single.evaluations);
    }
    let (best_point, best_fitness) = best.expect("num_searches >= 1");
    Ok(SearchOutcome {
        objective: spec.objective,
        best_point,
        best_fitness,
        per_search_bests,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(objective: Objective) -> SearchSpec {
        let mut base = SimConfig::baseline(0);
        base.num_agents = 40;
        base.frac_teachers = 0.1;
        base.grid = None;
        let mut spec = SearchSpec::new(objective, base, 99);
        spec.fitness_replicates = 3;
        spec
    }

    #[test]
    fn grid_step_must_divide_evenly() {
        let mut spec = small_spec(Objective::MaximizeGraduates);
        spec.grid_step = 0.3;
        assert!(spec.validate().is_err());
        spec.grid_step = 0.25;
        assert!(spec.validate().is_ok());
        assert_eq!(spec.levels_per_axis(), 4);
        spec.grid_step = 0.1;
        assert_eq!(spec.levels_per_axis(), 10);
    }

    #[test]
    fn point_values_are_exact_grid_levels() {
        let v = point_vector([3, 10, 1, 5], 10);
        assert_eq!(v.goal, 0.3);
        assert_eq!(v.academic_experience, 1.0);
        assert_eq!(v.social_skill, 0.1);
        assert_eq!(v.social_integration, 0.5);
    }

    #[test]
    fn fitness_is_reproducible_bit_for_bit() {
        let spec = small_spec(Objective::MaximizeGraduates);
        let p = FactorVector::splat(0.5);
        let a = evaluate_fitness(p, &spec).unwrap();
        let b = evaluate_fitness(p, &spec).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn coarse_grid_search_matches_exhaustive_enumeration() {
        // 0.5 step -> two levels per axis -> 16 corner points; the search
        // budget covers the whole grid, so the best must match a full scan
        let mut spec = small_spec(Objective::MaximizeGraduates);
        spec.grid_step = 0.5;
        spec.max_evaluations = 50;
        let outcome = hill_search(&spec, 0).unwrap();
        let mut best: Option<(FactorVector, f64)> = None;
        for g in [1u8, 2] {
            for a in [1u8, 2] {
                for s in [1u8, 2] {
                    for i in [1u8, 2] {
                        let v = point_vector([g, a, s, i], 2);
                        let f = evaluate_fitness(v, &spec).unwrap();
                        if best.is_none() || f > best.expect("set").1 {
                            best = Some((v, f));
                        }
                    }
                }
            }
        }
        let (bp, bf) = best.expect("16 corners scanned");
        assert_eq!(outcome.best_fitness, bf);
        assert_eq!(outcome.best_point, bp);
        assert!(outcome.evaluations.len() <= 16);
    }

    #[test]
    fn trajectory_best_so_far_is_monotone() {
        for objective in [Objective::MaximizeGraduates, Objective::MinimizeQuitters] {
            let mut spec = small_spec(objective);
            spec.grid_step = 0.25;
            spec.max_evaluations = 60;
            let outcome = hill_search(&spec, 1).unwrap();
            for w in outcome.evaluations.windows(2) {
                match objective {
                    Objective::MaximizeGraduates => {
                        assert!(w[1].best_so_far >= w[0].best_so_far)
                    }
                    Objective::MinimizeQuitters => {
                        assert!(w[1].best_so_far <= w[0].best_so_far)
                    }
                }
            }
        }
    }

    #[test]
    fn single_search_equals_batch_of_one() {
        let mut spec = small_spec(Objective::MinimizeQuitters);
        spec.grid_step = 0.5;
        spec.num_searches = 1;
        spec.max_evaluations = 30;
        let single = hill_search(&spec, 0).unwrap();
        let batch = run_searches(&spec).unwrap();
        assert_eq!(single, batch);
    }

    #[test]
    fn objective_names_round_trip() {
        for o in [Objective::MaximizeGraduates, Objective::MinimizeQuitters] {
            assert_eq!(Objective::parse(o.as_str()).unwrap(), o);
        }
        assert!(Objective::parse("maximize-attendance").is_err());
    }
}
