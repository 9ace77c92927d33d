//! Shared test helpers: structural invariant checking for full runs and a
//! deterministic random-config generator.
#![allow(dead_code)]

use persistence_core::engine::{run_with_observer, GridSpec, RunResult, SimConfig, SimState};
use persistence_core::model::{AgentStatus, FactorSpec};
use persistence_core::rng::Stream;

/// Watches every tick boundary of a run and panics on any violation of the
/// agent state machine, conservation, link caps, or grid occupancy rules.
pub struct InvariantChecker {
    config: SimConfig,
    prev: Option<Vec<AgentStatus>>,
    boundaries_seen: u32,
}

impl InvariantChecker {
    pub fn new(config: &SimConfig) -> Self {
        InvariantChecker {
            config: config.clone(),
            prev: None,
            boundaries_seen: 0,
        }
    }

    pub fn observe(&mut self, state: &SimState) {
        let config = &self.config;
        assert_eq!(
            state.agents.len() as u32,
            config.num_agents,
            "agent conservation"
        );
        let teachers = state
            .agents
            .iter()
            .filter(|a| a.status == AgentStatus::Teacher)
            .count() as u32;
        assert_eq!(teachers, config.num_teachers(), "teacher count constant");

        for agent in &state.agents {
            assert!(agent.teacher_links <= 3, "teacher link cap");
            assert!(agent.student_links <= 8, "student link cap");
            match agent.status {
                AgentStatus::Teacher => {
                    assert!(agent.factors.is_none());
                    assert_eq!(agent.teacher_links, 0);
                    assert_eq!(agent.student_links, 0);
                }
                AgentStatus::Resident => {
                    assert_eq!(agent.teacher_links, 0, "residents have no links");
                    assert_eq!(agent.student_links, 0);
                }
                _ => {}
            }
            assert_eq!(
                agent.departed_in_year.is_some(),
                agent.status == AgentStatus::Quitter,
                "departed_in_year is set iff quitter"
            );
            if let Some(y) = agent.departed_in_year {
                assert!(y >= 1 && y <= state.current_year, "departure year in range");
            }
            if agent.status != AgentStatus::Teacher {
                let f = agent.factors.expect("deaf agents carry factors");
                for v in [
                    f.goal,
                    f.academic_experience,
                    f.social_skill,
                    f.social_integration,
                ] {
                    assert!((0.0..=1.0).contains(&v), "factor values in [0,1]");
                }
            }
        }

        if let Some(prev) = &self.prev {
            let first_tick = self.boundaries_seen == 1;
            let final_tick = state.current_year == config.years;
            for (agent, &was) in state.agents.iter().zip(prev.iter()) {
                let now = agent.status;
                // boundaries compose enrollment with the year's departure
                // decision, so tick 1 may show Resident -> Quitter (and, in a
                // one-year program, Resident -> Graduate) directly
                let legal = match (was, now) {
                    (a, b) if a == b => true,
                    (AgentStatus::Resident, AgentStatus::Student) => first_tick,
                    (AgentStatus::Resident, AgentStatus::Quitter) => {
                        first_tick && agent.departed_in_year == Some(1)
                    }
                    (AgentStatus::Resident, AgentStatus::Graduate) => first_tick && final_tick,
                    (AgentStatus::Student, AgentStatus::Quitter) => true,
                    (AgentStatus::Student, AgentStatus::Graduate) => final_tick,
                    _ => false,
                };
                assert!(
                    legal,
                    "illegal transition {was:?} -> {now:?} at year {}",
                    state.current_year
                );
            }
        }

        match &config.grid {
            Some(grid) => check_grid_occupancy(grid, state),
            None => {
                for agent in &state.agents {
                    assert!(agent.cell.is_none(), "no cells without a grid");
                }
            }
        }

        self.prev = Some(state.agents.iter().map(|a| a.status).collect());
        self.boundaries_seen += 1;
    }

    pub fn boundaries_seen(&self) -> u32 {
        self.boundaries_seen
    }
}

fn check_grid_occupancy(grid: &GridSpec, state: &SimState) {
    let mut seen = std::collections::HashSet::new();
    for agent in &state.agents {
        let cell = agent.cell.expect("grid configured: every agent is placed");
        assert!(cell.x < grid.width && cell.y < grid.height, "cell in bounds");
        assert!(seen.insert((cell.x, cell.y)), "one agent per cell");
        let inside = grid.college.contains(cell);
        match agent.status {
            AgentStatus::Teacher | AgentStatus::Student => {
                assert!(inside, "teachers and students sit inside the college")
            }
            _ => assert!(!inside, "everyone else lives outside the college"),
        }
    }
}

/// Run `config` under the invariant checker and verify the result identities.
pub fn check_run_invariants(config: &SimConfig) -> RunResult {
    let mut checker = InvariantChecker::new(config);
    let result = run_with_observer(config, |state| checker.observe(state)).expect("run succeeds");
    assert_eq!(checker.boundaries_seen(), u32::from(config.years) + 1);
    assert_result_identities(&result, config);
    result
}

pub fn assert_result_identities(result: &RunResult, config: &SimConfig) {
    assert_eq!(result.attended, result.graduates + result.quitters);
    assert_eq!(
        result.attended + result.never_attended,
        config.num_deaf_agents()
    );
    assert_eq!(result.departed_by_year.iter().sum::<u32>(), result.quitters);
    assert_eq!(
        *result.persisted_by_year.last().expect("years >= 1"),
        result.graduates
    );
    let mut cum = 0;
    for (p, d) in result
        .persisted_by_year
        .iter()
        .zip(&result.departed_by_year)
    {
        cum += d;
        assert_eq!(*p, result.attended - cum, "persisted identity");
    }
    for pair in result.persisted_by_year.windows(2) {
        assert!(pair[1] <= pair[0], "persisted counts never increase");
    }
}

/// Deterministic random configuration for fuzz suites. Every third config
/// carries a grid sized to fit its population.
pub fn random_config(stream: &mut Stream, index: u64, run_seed: u64) -> SimConfig {
    let num_agents = 1 + stream.next_index(80);
    let frac_teachers = stream.next_f64() * 0.9;
    let college_attendance_pct = stream.next_f64() * 100.0;
    let factor = |stream: &mut Stream| {
        if stream.next_f64() < 0.3 {
            FactorSpec::Uniform01
        } else {
            FactorSpec::Fixed(stream.next_f64())
        }
    };
    let factor_specs = persistence_core::engine::FactorSpecs {
        goal: factor(stream),
        academic_experience: factor(stream),
        social_skill: factor(stream),
        social_integration: factor(stream),
    };
    let mut h = [
        stream.next_f64(),
        stream.next_f64(),
        stream.next_f64(),
        stream.next_f64(),
    ];
    h.sort_by(|a, b| b.partial_cmp(a).expect("no NaN"));
    let hazards = persistence_core::HazardVector::new(h[0], h[1], h[2], h[3]).expect("sorted");
    let grid = if index.is_multiple_of(3) {
        Some(fitting_grid(num_agents))
    } else {
        None
    };
    SimConfig {
        num_agents,
        frac_teachers,
        college_attendance_pct,
        factor_specs,
        hazards,
        years: 4,
        seed: run_seed,
        grid,
    }
}

/// Smallest centered-college grid that seats `num_agents` in the college and
/// the whole deaf population outside it.
pub fn fitting_grid(num_agents: u32) -> GridSpec {
    let college_side = (f64::from(num_agents).sqrt().ceil() as u16).max(1);
    let mut side = college_side + 2;
    loop {
        let residential =
            usize::from(side) * usize::from(side) - usize::from(college_side) * usize::from(college_side);
        if residential >= num_agents as usize {
            break;
        }
        side += 2;
    }
    GridSpec::centered_college(side, side, college_side, college_side)
        .expect("constructed grid is valid")
}
