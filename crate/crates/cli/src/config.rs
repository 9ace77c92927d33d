//! Flat key/value configuration files with `[section]` headers.
//!
//! ```text
//! [population]
//! num_agents = 200
//! frac_teachers = 0.1
//!
//! [factors]
//! goal = 0.5          # or `uniform` for a per-agent U(0,1) draw
//! ```
//!
//! Unknown sections or keys are rejected so typos surface immediately.
//! Command-line flags override file values.

use std::collections::BTreeMap;

use persistence_core::engine::{FactorSpecs, GridSpec, SimConfig};
use persistence_core::experiments::{default_levels, CalibrationSpec, SweepSpec};
use persistence_core::model::{FactorName, FactorSpec};
use persistence_core::search::{Objective, SearchSpec};
use persistence_core::HazardVector;

const SECTIONS: &[(&str, &[&str])] = &[
    (
        "population",
        &["num_agents", "frac_teachers", "college_attendance_pct", "years"],
    ),
    (
        "factors",
        &["goal", "academic_experience", "social_skill", "social_integration"],
    ),
    ("hazards", &["h1", "h2", "h3", "h4"]),
    ("grid", &["width", "height", "college_width", "college_height"]),
    ("sweep", &["levels", "fixed_level", "repetitions"]),
    ("sensitivity", &["repetitions"]),
    (
        "calibrate",
        &["replicates", "grid_min", "grid_max", "grid_step"],
    ),
    (
        "search",
        &["grid_step", "fitness_replicates", "num_searches", "max_evaluations"],
    ),
];

/// Parsed configuration file.
#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<(String, String), String>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<FileConfig, String> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_string();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(format!(
                        "line {}: unknown section [{name}]; known sections: {}",
                        lineno + 1,
                        SECTIONS
                            .iter()
                            .map(|(s, _)| *s)
                            .collect::<Vec<_>>()
                            .join(", ")
                    ));
                }
                section = name;
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`, got `{line}`", lineno + 1))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if section.is_empty() {
                return Err(format!(
                    "line {}: key `{key}` appears before any [section]",
                    lineno + 1
                ));
            }
            let known = SECTIONS
                .iter()
                .find(|(s, _)| *s == section)
                .map(|(_, keys)| keys.contains(&key.as_str()))
                .unwrap_or(false);
            if !known {
                return Err(format!(
                    "line {}: unknown key `{key}` in [{section}]",
                    lineno + 1
                ));
            }
            values.insert((section.clone(), key), value);
        }
        Ok(FileConfig { values })
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .map(String::as_str)
    }

    fn parse_value<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, String> {
        match self.get(section, key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| format!("[{section}] {key}: cannot parse `{raw}`")),
        }
    }

    fn factor_spec(&self, key: &str) -> Result<FactorSpec, String> {
        match self.get("factors", key) {
            None => Ok(FactorSpec::Fixed(0.5)),
            Some("uniform") => Ok(FactorSpec::Uniform01),
            Some(raw) => raw
                .parse::<f64>()
                .map(FactorSpec::Fixed)
                .map_err(|_| format!("[factors] {key}: expected a number or `uniform`, got `{raw}`")),
        }
    }

    /// Assemble the simulation configuration, applying file values over the
    /// reference defaults.
    pub fn sim_config(&self, seed: u64) -> Result<SimConfig, String> {
        let factor_specs = FactorSpecs {
            goal: self.factor_spec("goal")?,
            academic_experience: self.factor_spec("academic_experience")?,
            social_skill: self.factor_spec("social_skill")?,
            social_integration: self.factor_spec("social_integration")?,
        };
        let hazards = {
            let given: Vec<Option<f64>> = ["h1", "h2", "h3", "h4"]
                .iter()
                .map(|k| self.parse_value::<f64>("hazards", k))
                .collect::<Result<_, _>>()?;
            if given.iter().all(Option::is_none) {
                HazardVector::default()
            } else {
                let h: Vec<f64> = given
                    .into_iter()
                    .collect::<Option<Vec<f64>>>()
                    .ok_or("[hazards] requires all of h1, h2, h3, h4")?;
                HazardVector::new(h[0], h[1], h[2], h[3]).map_err(|e| e.to_string())?
            }
        };
        let grid = {
            let dims: Vec<Option<u16>> = ["width", "height", "college_width", "college_height"]
                .iter()
                .map(|k| self.parse_value::<u16>("grid", k))
                .collect::<Result<_, _>>()?;
            if dims.iter().all(Option::is_none) {
                None
            } else {
                let d: Vec<u16> = dims.into_iter().collect::<Option<Vec<u16>>>().ok_or(
                    "[grid] requires all of width, height, college_width, college_height",
                )?;
                Some(GridSpec::centered_college(d[0], d[1], d[2], d[3]).map_err(|e| e.to_string())?)
            }
        };
        let config = SimConfig {
            num_agents: self.parse_value("population", "num_agents")?.unwrap_or(200),
            frac_teachers: self
                .parse_value("population", "frac_teachers")?
                .unwrap_or(0.1),
            college_attendance_pct: self
                .parse_value("population", "college_attendance_pct")?
                .unwrap_or(87.2),
            factor_specs,
            hazards,
            years: self.parse_value("population", "years")?.unwrap_or(4),
            seed,
            grid,
        };
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }

    pub fn sweep_spec(
        &self,
        factor: FactorName,
        seed: u64,
        reps_override: Option<u32>,
    ) -> Result<SweepSpec, String> {
        let mut spec = SweepSpec::new(factor, self.sim_config(seed)?, seed);
        if let Some(raw) = self.get("sweep", "levels") {
            let levels: Vec<f64> = raw
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| format!("[sweep] levels: cannot parse `{raw}`"))?;
            spec.levels = levels;
        } else {
            spec.levels = default_levels();
        }
        if let Some(v) = self.parse_value("sweep", "fixed_level")? {
            spec.fixed_level = v;
        }
        if let Some(v) = self.parse_value("sweep", "repetitions")? {
            spec.repetitions = v;
        }
        if let Some(v) = reps_override {
            spec.repetitions = v;
        }
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }

    pub fn sensitivity_repetitions(&self, reps_override: Option<u32>) -> Result<u32, String> {
        Ok(reps_override
            .or(self.parse_value("sensitivity", "repetitions")?)
            .unwrap_or(10))
    }

    pub fn calibration_spec(
        &self,
        seed: u64,
        reps_override: Option<u32>,
    ) -> Result<CalibrationSpec, String> {
        let mut spec = CalibrationSpec::new(self.sim_config(seed)?, seed);
        if let Some(v) = self.parse_value("calibrate", "replicates")? {
            spec.replicates = v;
        }
        if let Some(v) = reps_override {
            spec.replicates = v;
        }
        if let Some(v) = self.parse_value("calibrate", "grid_min")? {
            spec.grid_min = v;
        }
        if let Some(v) = self.parse_value("calibrate", "grid_max")? {
            spec.grid_max = v;
        }
        if let Some(v) = self.parse_value("calibrate", "grid_step")? {
            spec.grid_step = v;
        }
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }

    pub fn search_spec(
        &self,
        objective: Objective,
        seed: u64,
        reps_override: Option<u32>,
    ) -> Result<SearchSpec, String> {
        let mut spec = SearchSpec::new(objective, self.sim_config(seed)?, seed);
        if let Some(v) = self.parse_value("search", "grid_step")? {
            spec.grid_step = v;
        }
        if let Some(v) = self.parse_value("search", "fitness_replicates")? {
            spec.fitness_replicates = v;
        }
        if let Some(v) = reps_override {
            spec.fitness_replicates = v;
        }
        if let Some(v) = self.parse_value("search", "num_searches")? {
            spec.num_searches = v;
        }
        if let Some(v) = self.parse_value("search", "max_evaluations")? {
            spec.max_evaluations = v;
        }
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}
