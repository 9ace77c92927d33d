//! Seeded simulation runs: population setup, year-1 enrollment and link
//! formation, per-year departure decisions, and final graduation.
//!
//! # Determinism
//!
//! Each agent owns an independent decision stream derived from
//! `(run seed, agent id)`, consumed on a fixed schedule: factor draws (only
//! for `Uniform01` specs, in canonical factor order), one enrollment draw,
//! two link draws, then one departure draw per enrolled year. An agent's
//! draw for a given decision therefore never depends on what other agents
//! did, which is what makes paired comparisons across factor levels (common
//! random numbers) behave monotonically. Grid placement consumes a separate
//! per-run stream, so configuring the optional grid never changes outcomes.

use serde::Serialize;

use crate::error::Error;
use crate::model::{
    composite_persistence_level, departure_probability, Agent, AgentStatus, Cell, FactorName,
    FactorSpec, FactorVector, HazardVector, MAX_YEARS,
};
use crate::rng::{domain, Stream};

/// One [`FactorSpec`] per factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorSpecs {
    pub goal: FactorSpec,
    pub academic_experience: FactorSpec,
    pub social_skill: FactorSpec,
    pub social_integration: FactorSpec,
}

impl FactorSpecs {
    pub fn all_fixed(v: f64) -> Self {
        FactorSpecs {
            goal: FactorSpec::Fixed(v),
            academic_experience: FactorSpec::Fixed(v),
            social_skill: FactorSpec::Fixed(v),
            social_integration: FactorSpec::Fixed(v),
        }
    }

    pub fn fixed(point: FactorVector) -> Self {
        FactorSpecs {
            goal: FactorSpec::Fixed(point.goal),
            academic_experience: FactorSpec::Fixed(point.academic_experience),
            social_skill: FactorSpec::Fixed(point.social_skill),
            social_integration: FactorSpec::Fixed(point.social_integration),
        }
    }

    /// Goal and social skill drawn per agent from U(0,1); the link-derived
    /// factors start from a 0.5 initial value.
    pub fn uniform_exogenous() -> Self {
        FactorSpecs {
            goal: FactorSpec::Uniform01,
            academic_experience: FactorSpec::Fixed(0.5),
            social_skill: FactorSpec::Uniform01,
            social_integration: FactorSpec::Fixed(0.5),
        }
    }

    pub fn get(&self, name: FactorName) -> FactorSpec {
        match name {
            FactorName::Goal => self.goal,
            FactorName::AcademicExperience => self.academic_experience,
            FactorName::SocialSkill => self.social_skill,
            FactorName::SocialIntegration => self.social_integration,
        }
    }

    pub fn set(&mut self, name: FactorName, spec: FactorSpec) {
        match name {
            FactorName::Goal => self.goal = spec,
            FactorName::AcademicExperience => self.academic_experience = spec,
            FactorName::SocialSkill => self.social_skill = spec,
            FactorName::SocialIntegration => self.social_integration = spec,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        for name in FactorName::ALL {
            self.get(name).validate()?;
        }
        Ok(())
    }
}

/// Axis-aligned cell rectangle, `x..x+width` by `y..y+height`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rect {
    pub x: u16,
    pub y: u16,
    pub width: u16,
    pub height: u16,
}

impl Rect {
    pub fn contains(&self, cell: Cell) -> bool {
        cell.x >= self.x
            && cell.x < self.x + self.width
            && cell.y >= self.y
            && cell.y < self.y + self.height
    }

    pub fn cell_count(&self) -> usize {
        usize::from(self.width) * usize::from(self.height)
    }
}

/// Optional world geometry for trace export: a college rectangle surrounded
/// by residential cells, one agent per cell. Dynamics-neutral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub width: u16,
    pub height: u16,
    pub college: Rect,
}

impl GridSpec {
    /// Grid with a centered college of the given size.
    pub fn centered_college(
        width: u16,
        height: u16,
        college_width: u16,
        college_height: u16,
    ) -> Result<Self, Error> {
        if college_width > width || college_height > height {
            return Err(Error::invalid(format!(
                "college {college_width}x{college_height} does not fit in grid {width}x{height}"
            )));
        }
        let spec = GridSpec {
            width,
            height,
            college: Rect {
                x: (width - college_width) / 2,
                y: (height - college_height) / 2,
                width: college_width,
                height: college_height,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let c = self.college;
        if c.width == 0 || c.height == 0 || self.width == 0 || self.height == 0 {
            return Err(Error::invalid("grid and college dimensions must be positive"));
        }
        if c.x + c.width > self.width || c.y + c.height > self.height {
            return Err(Error::invalid(format!(
                "college rect {c:?} extends beyond grid {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn college_cell_count(&self) -> usize {
        self.college.cell_count()
    }

    pub fn residential_cell_count(&self) -> usize {
        usize::from(self.width) * usize::from(self.height) - self.college.cell_count()
    }
}

impl Default for GridSpec {
    /// 33×33 world with a centered 13×13 college.
    fn default() -> Self {
        GridSpec::centered_college(33, 33, 13, 13).expect("default grid geometry is valid")
    }
}

/// Full parameterization of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub num_agents: u32,
    /// Fraction of agents that are teachers, in [0, 1).
    pub frac_teachers: f64,
    /// Probability (in percent) that a resident attends college in year 1.
    pub college_attendance_pct: f64,
    pub factor_specs: FactorSpecs,
    pub hazards: HazardVector,
    /// Number of simulated years; 4 in the standard scenario.
    pub years: u8,
    pub seed: u64,
    pub grid: Option<GridSpec>,
}

impl SimConfig {
    /// Reference scenario: 200 agents, 10% teachers, 87.2% attendance, all
    /// four factors fixed at 0.5, four years, fitted default hazards, and a
    /// 35×35 grid with a centered 15×15 college (large enough to seat every
    /// agent in the worst case).
    pub fn baseline(seed: u64) -> Self {
        SimConfig {
            num_agents: 200,
            frac_teachers: 0.1,
            college_attendance_pct: 87.2,
            factor_specs: FactorSpecs::all_fixed(0.5),
            hazards: HazardVector::default(),
            years: 4,
            seed,
            grid: Some(
                GridSpec::centered_college(35, 35, 15, 15).expect("baseline grid is valid"),
            ),
        }
    }

    pub fn num_teachers(&self) -> u32 {
        (f64::from(self.num_agents) * self.frac_teachers).floor() as u32
    }

    pub fn num_deaf_agents(&self) -> u32 {
        self.num_agents - self.num_teachers()
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.num_agents == 0 {
            return Err(Error::invalid("num_agents must be positive"));
        }
        if !(0.0..1.0).contains(&self.frac_teachers) {
            return Err(Error::invalid(format!(
                "frac_teachers {} outside [0, 1)",
                self.frac_teachers
            )));
        }
        if !(0.0..=100.0).contains(&self.college_attendance_pct) {
            return Err(Error::invalid(format!(
                "college_attendance_pct {} outside [0, 100]",
                self.college_attendance_pct
            )));
        }
        if self.years == 0 || self.years > MAX_YEARS {
            return Err(Error::invalid(format!(
                "years {} outside 1..={MAX_YEARS}",
                self.years
            )));
        }
        self.factor_specs.validate()?;
        self.hazards.validate()?;
        if let Some(grid) = &self.grid {
            grid.validate()?;
            // worst case: every resident enrolls while all teachers stay
            let college_needed = (self.num_agents) as usize;
            let college_have = grid.college_cell_count();
            if college_have < college_needed {
                return Err(Error::GridCapacity {
                    region: "college",
                    available: college_have,
                    required: college_needed,
                    deficit: college_needed - college_have,
                });
            }
            let residential_needed = self.num_deaf_agents() as usize;
            let residential_have = grid.residential_cell_count();
            if residential_have < residential_needed {
                return Err(Error::GridCapacity {
                    region: "residential",
                    available: residential_have,
                    required: residential_needed,
                    deficit: residential_needed - residential_have,
                });
            }
        }
        Ok(())
    }
}

/// Free-cell bookkeeping for the optional grid.
#[derive(Debug, Clone)]
struct Placement {
    grid: GridSpec,
    stream: Stream,
    free_college: Vec<Cell>,
    free_residential: Vec<Cell>,
}

impl Placement {
    fn new(grid: GridSpec, run_seed: u64) -> Self {
        let mut free_college = Vec::with_capacity(grid.college_cell_count());
        let mut free_residential = Vec::with_capacity(grid.residential_cell_count());
        for y in 0..grid.height {
            for x in 0..grid.width {
                let cell = Cell { x, y };
                if grid.college.contains(cell) {
                    free_college.push(cell);
                } else {
                    free_residential.push(cell);
                }
            }
        }
        Placement {
            grid,
            stream: Stream::derived(run_seed, domain::PLACEMENT, &[]),
            free_college,
            free_residential,
        }
    }

    fn pick(stream: &mut Stream, free: &mut Vec<Cell>) -> Cell {
        debug_assert!(!free.is_empty(), "capacity validated at setup");
        let idx = stream.next_index(free.len() as u32) as usize;
        free.swap_remove(idx)
    }

    fn vacate(&mut self, cell: Cell) {
        if self.grid.college.contains(cell) {
            self.free_college.push(cell);
        } else {
            self.free_residential.push(cell);
        }
    }

    fn move_to_college(&mut self, agent: &mut Agent) {
        if let Some(old) = agent.cell.take() {
            self.vacate(old);
        }
        agent.cell = Some(Self::pick(&mut self.stream, &mut self.free_college));
    }

    fn move_to_residential(&mut self, agent: &mut Agent) {
        if let Some(old) = agent.cell.take() {
            self.vacate(old);
        }
        agent.cell = Some(Self::pick(&mut self.stream, &mut self.free_residential));
    }
}

/// Mutable state of a run between operations.
#[derive(Debug, Clone)]
pub struct SimState {
    pub agents: Vec<Agent>,
    /// Last completed year; 0 before the first tick.
    pub current_year: u8,
    streams: Vec<Stream>,
    placement: Option<Placement>,
}

/// Per-year persistence/departure counts and final tallies for one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunResult {
    pub seed: u64,
    pub attended: u32,
    /// Students still enrolled at the end of years 1..=years.
    pub persisted_by_year: Vec<u32>,
    /// Departures during years 1..=years.
    pub departed_by_year: Vec<u32>,
    pub graduates: u32,
    pub quitters: u32,
    pub never_attended: u32,
}

/// One agent snapshot at a tick boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub run_seed: u64,
    pub year: u8,
    pub agent_id: u32,
    pub role: &'static str,
    pub status: AgentStatus,
    pub teacher_links: u8,
    pub student_links: u8,
    pub cell: Option<Cell>,
}

/// Create the initial population: teachers first (ids `0..num_teachers`),
/// residents after. Residents draw factor values per the factor specs; with
/// a grid configured, teachers are seated in the college and residents
/// outside, one agent per cell.
pub fn setup(config: &SimConfig) -> Result<SimState, Error> {
    config.validate()?;
    let num_teachers = config.num_teachers();
    let mut agents = Vec::with_capacity(config.num_agents as usize);
    let mut streams = Vec::with_capacity(config.num_agents as usize);
    let mut placement = config.grid.map(|g| Placement::new(g, config.seed));
    for id in 0..config.num_agents {
        let mut stream = Stream::derived(config.seed, domain::AGENT, &[u64::from(id)]);
        let mut agent = if id < num_teachers {
            Agent::teacher(id)
        } else {
            let specs = &config.factor_specs;
            let factors = FactorVector {
                goal: specs.goal.sample(&mut stream),
                academic_experience: specs.academic_experience.sample(&mut stream),
                social_skill: specs.social_skill.sample(&mut stream),
                social_integration: specs.social_integration.sample(&mut stream),
            };
            Agent::resident(id, factors)
        };
        if let Some(p) = placement.as_mut() {
            if agent.is_teacher() {
                p.move_to_college(&mut agent);
            } else {
                p.move_to_residential(&mut agent);
            }
        }
        agents.push(agent);
        streams.push(stream);
    }
    Ok(SimState {
        agents,
        current_year: 0,
        streams,
        placement,
    })
}

/// Year-1 attendance decisions: each resident independently becomes a
/// student with probability `college_attendance_pct / 100`, forming links
/// immediately on enrollment.
pub fn enroll(state: &mut SimState, config: &SimConfig) {
    assert_eq!(state.current_year, 0, "enroll must precede the first tick");
    let p_attend = config.college_attendance_pct / 100.0;
    for idx in 0..state.agents.len() {
        if state.agents[idx].status != AgentStatus::Resident {
            continue;
        }
        let u = state.streams[idx].next_f64();
        if u < p_attend {
            let agent = &mut state.agents[idx];
            agent.status = AgentStatus::Student;
            form_links(agent, &mut state.streams[idx]);
            if let Some(p) = state.placement.as_mut() {
                p.move_to_college(agent);
            }
        }
    }
}

/// Draw link counts for a newly enrolled student: uniform over 0..=3 teacher
/// links and 0..=8 student links. Counts are fixed for the rest of the run.
pub fn form_links(agent: &mut Agent, stream: &mut Stream) {
    agent.teacher_links = stream.next_index(4) as u8;
    agent.student_links = stream.next_index(9) as u8;
}

/// Advance one year: every enrolled student draws once and departs with
/// probability `hazard[year] * (1 - level)`. After the final year's
/// decisions, remaining students graduate and leave the college.
pub fn tick(state: &mut SimState, config: &SimConfig) {
    assert!(
        state.current_year < config.years,
        "tick called after the final year"
    );
    let year = state.current_year + 1;
    for idx in 0..state.agents.len() {
        if state.agents[idx].status != AgentStatus::Student {
            continue;
        }
        let u = state.streams[idx].next_f64();
        let level = composite_persistence_level(&state.agents[idx]);
        if u < departure_probability(level, year, &config.hazards) {
            let agent = &mut state.agents[idx];
            agent.status = AgentStatus::Quitter;
            agent.departed_in_year = Some(year);
            if let Some(p) = state.placement.as_mut() {
                p.move_to_residential(agent);
            }
        }
    }
    state.current_year = year;
    if year == config.years {
        for idx in 0..state.agents.len() {
            if state.agents[idx].status == AgentStatus::Student {
                let agent = &mut state.agents[idx];
                agent.status = AgentStatus::Graduate;
                if let Some(p) = state.placement.as_mut() {
                    p.move_to_residential(agent);
                }
            }
        }
    }
}

impl SimState {
    /// Tally a completed run.
    pub fn result(&self, config: &SimConfig) -> RunResult {
        debug_assert_eq!(self.current_year, config.years, "run not complete");
        let years = usize::from(config.years);
        let mut departed_by_year = vec![0u32; years];
        let mut graduates = 0;
        let mut quitters = 0;
        let mut never_attended = 0;
        for agent in &self.agents {
            match agent.status {
                AgentStatus::Teacher => {}
                AgentStatus::Resident => never_attended += 1,
                AgentStatus::Graduate => graduates += 1,
                AgentStatus::Quitter => {
                    quitters += 1;
                    let y = agent.departed_in_year.expect("quitters record their year");
                    departed_by_year[usize::from(y) - 1] += 1;
                }
                AgentStatus::Student => unreachable!("students resolve by the final tick"),
            }
        }
        let attended = graduates + quitters;
        let mut persisted_by_year = Vec::with_capacity(years);
        let mut remaining = attended;
        for &d in &departed_by_year {
            remaining -= d;
            persisted_by_year.push(remaining);
        }
        RunResult {
            seed: config.seed,
            attended,
            persisted_by_year,
            departed_by_year,
            graduates,
            quitters,
            never_attended,
        }
    }
}

/// Execute a full seeded run.
pub fn run(config: &SimConfig) -> Result<RunResult, Error> {
    run_with_observer(config, |_| {})
}

/// Execute a full run, calling `observer` at every tick boundary: once after
/// setup (year 0, before enrollment) and once after each of the
/// `config.years` ticks.
pub fn run_with_observer(
    config: &SimConfig,
    mut observer: impl FnMut(&SimState),
) -> Result<RunResult, Error> {
    let mut state = setup(config)?;
    observer(&state);
    enroll(&mut state, config);
    for _ in 0..config.years {
        tick(&mut state, config);
        observer(&state);
    }
    Ok(state.result(config))
}

/// Execute a full run and capture one trace row per agent per tick boundary.
pub fn run_traced(config: &SimConfig) -> Result<(RunResult, Vec<TraceRow>), Error> {
    let mut rows = Vec::with_capacity(
        config.num_agents as usize * (usize::from(config.years) + 1),
    );
    let result = run_with_observer(config, |state| {
        for agent in &state.agents {
            rows.push(TraceRow {
                run_seed: config.seed,
                year: state.current_year,
                agent_id: agent.id,
                role: agent.role_str(),
                status: agent.status,
                teacher_links: agent.teacher_links,
                student_links: agent.student_links,
                cell: agent.cell,
            });
        }
    })?;
    Ok((result, rows))
}
