//! Monte Carlo oracles for the engine and the experiment harnesses.

mod common;

use persistence_core::engine::{form_links, run, FactorSpecs, SimConfig};
use persistence_core::experiments::{
    calibrate, replicate_seed, sensitivity, sweep, sweep_raw, CalibrationSpec, SweepSpec,
};
use persistence_core::model::Agent;
use persistence_core::rng::Stream;
use persistence_core::{FactorName, FactorVector, HazardVector};

fn gridless_baseline(seed: u64) -> SimConfig {
    let mut config = SimConfig::baseline(seed);
    config.grid = None;
    config
}

#[test]
fn mean_attendance_matches_binomial_expectation() {
    // 180 residents at 87.2% -> expected 156.96 attendees
    let mut config = gridless_baseline(0);
    let mut total = 0.0;
    let seeds = 1000u64;
    for seed in 0..seeds {
        config.seed = seed;
        total += f64::from(run(&config).expect("run succeeds").attended);
    }
    let mean = total / seeds as f64;
    assert!(
        (mean - 156.96).abs() <= 1.0,
        "mean attendance {mean} strays from 156.96"
    );
}

#[test]
fn link_draws_match_discrete_uniform_means() {
    let mut teacher_total = 0.0;
    let mut student_total = 0.0;
    let draws = 100_000u64;
    for i in 0..draws {
        let mut agent = Agent::resident(0, FactorVector::splat(0.5));
        let mut stream = Stream::derived(314, 90, &[i]);
        form_links(&mut agent, &mut stream);
        assert!(agent.teacher_links <= 3);
        assert!(agent.student_links <= 8);
        teacher_total += f64::from(agent.teacher_links);
        student_total += f64::from(agent.student_links);
    }
    let teacher_mean = teacher_total / draws as f64;
    let student_mean = student_total / draws as f64;
    assert!(
        (teacher_mean - 1.5).abs() <= 0.02,
        "teacher link mean {teacher_mean}"
    );
    assert!(
        (student_mean - 4.0).abs() <= 0.04,
        "student link mean {student_mean}"
    );
}

#[test]
fn first_year_departures_dominate_at_baseline() {
    let mut config = gridless_baseline(0);
    let reps = 300u32;
    let mut dep = [0.0f64; 4];
    for rep in 0..reps {
        config.seed = replicate_seed(1001, 90, 0, rep);
        let r = run(&config).expect("run succeeds");
        for (acc, d) in dep.iter_mut().zip(&r.departed_by_year) {
            *acc += f64::from(*d);
        }
    }
    for d in dep.iter_mut() {
        *d /= f64::from(reps);
    }
    assert!(
        dep[0] > dep[1] && dep[0] > dep[2] && dep[0] > dep[3],
        "year-1 departures {dep:?} must dominate"
    );
    assert!(
        dep[0] >= dep[1] && dep[1] >= dep[2] && dep[2] >= dep[3],
        "departures {dep:?} must not increase across years"
    );
}

#[test]
fn common_random_numbers_make_sweeps_monotone_per_replicate() {
    for factor in [FactorName::Goal, FactorName::AcademicExperience] {
        let mut spec = SweepSpec::new(factor, gridless_baseline(0), 313);
        spec.repetitions = 10;
        let grouped = sweep_raw(&spec).expect("sweep succeeds");
        for pair in grouped.windows(2) {
            let (_, lo) = &pair[0];
            let (_, hi) = &pair[1];
            for (a, b) in lo.iter().zip(hi.iter()) {
                assert!(
                    b.graduates >= a.graduates,
                    "{factor}: graduates fell from {} to {} within a paired replicate",
                    a.graduates,
                    b.graduates
                );
                assert!(b.quitters <= a.quitters);
            }
        }
    }
}

#[test]
fn full_level_sweep_keeps_departures_positive() {
    let mut spec = SweepSpec::new(FactorName::Goal, gridless_baseline(0), 17);
    spec.levels = vec![1.0];
    spec.repetitions = 20;
    let grouped = sweep_raw(&spec).expect("sweep succeeds");
    let results = &grouped[0].1;
    let mean_attended: f64 =
        results.iter().map(|r| f64::from(r.attended)).sum::<f64>() / results.len() as f64;
    let mean_graduates: f64 =
        results.iter().map(|r| f64::from(r.graduates)).sum::<f64>() / results.len() as f64;
    let mean_quitters: f64 =
        results.iter().map(|r| f64::from(r.quitters)).sum::<f64>() / results.len() as f64;
    assert!(mean_graduates < mean_attended);
    assert!(mean_quitters > 0.0, "departures never vanish entirely");
}

#[test]
fn sweep_table_has_expected_shape() {
    let mut spec = SweepSpec::new(FactorName::SocialIntegration, gridless_baseline(0), 23);
    spec.repetitions = 3;
    let table = sweep(&spec).expect("sweep succeeds");
    // 10 levels x (4 persisted-year rows + graduates + quitters)
    assert_eq!(table.rows.len(), 60);
    assert_eq!(table.levels().len(), 10);
    for row in &table.rows {
        let s = row.summary;
        assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
    }
    // the year-1 persisted series sits above the later years at every level
    for level in table.levels() {
        let by_year: Vec<f64> = (1..=4u8)
            .map(|year| {
                table
                    .rows
                    .iter()
                    .find(|r| {
                        r.level == level
                            && r.metric == persistence_core::experiments::Metric::Persisted
                            && r.year == Some(year)
                    })
                    .expect("row present")
                    .summary
                    .mean
            })
            .collect();
        for pair in by_year.windows(2) {
            assert!(
                pair[0] >= pair[1],
                "persisted means out of order at level {level}: {by_year:?}"
            );
        }
    }
}

#[test]
fn sensitivity_spread_comparison_is_recorded() {
    // which factor moves departures more under a +-10% nudge is an empirical
    // observation, not a gate; print it for the record
    let base = SimConfig::baseline(0);
    let mut spreads = Vec::new();
    for factor in [FactorName::AcademicExperience, FactorName::Goal] {
        let out = sensitivity(&base, factor, 0.5, 10, 55).expect("sensitivity succeeds");
        assert_eq!(out.table.rows.len(), 3);
        assert!(!out.clamped);
        let means: Vec<f64> = out.table.rows.iter().map(|r| r.summary.mean).collect();
        let spread = means[0] - means[2];
        assert!(
            means[0] >= means[2],
            "higher factor levels should not raise departures"
        );
        spreads.push((factor, spread));
    }
    println!(
        "sensitivity spread of mean departures at center 0.5: {} = {:.2}, {} = {:.2}",
        spreads[0].0, spreads[0].1, spreads[1].0, spreads[1].1
    );
}

#[test]
fn shipped_default_hazards_hit_the_rate_targets() {
    let mut spec = CalibrationSpec::new(gridless_baseline(0), 90210);
    spec.replicates = 200;
    // degenerate grid containing only the shipped default
    let d = HazardVector::default();
    assert_eq!((d.h1, d.h2, d.h3, d.h4), (0.75, 0.70, 0.65, 0.05));
    let mut config = spec.base_config.clone();
    config.factor_specs = FactorSpecs::fixed(spec.factor_point);
    let mut g_sum = 0.0;
    for rep in 0..spec.replicates {
        config.seed = replicate_seed(spec.master_seed, 5, 0, rep);
        let r = run(&config).expect("run succeeds");
        g_sum += f64::from(r.graduates) / f64::from(r.attended);
    }
    let g = g_sum / f64::from(spec.replicates);
    let residual = (2.0 * (g - 0.506857f64).powi(2)).sqrt();
    assert!(
        residual <= 0.03,
        "default hazards residual {residual} exceeds 0.03 (rate {g})"
    );
}

#[test]
#[ignore = "full 7315-candidate grid refit; run with --ignored (~1 min optimized)"]
fn full_grid_calibration_reproduces_the_shipped_default() {
    let spec = CalibrationSpec::new(SimConfig::baseline(0), 42);
    let outcome = calibrate(&spec).expect("calibration succeeds");
    assert_eq!(outcome.candidates_evaluated, 7315);
    assert_eq!(outcome.fitted, HazardVector::default());
    assert!(outcome.residual <= 0.03);
    assert!(outcome.feasible);
}

#[test]
fn empty_calibration_grid_reports_best_effort() {
    let mut spec = CalibrationSpec::new(gridless_baseline(0), 9);
    spec.grid_min = 0.9;
    spec.grid_max = 0.1;
    spec.replicates = 5;
    let outcome = calibrate(&spec).expect("calibration degrades gracefully");
    assert!(!outcome.feasible);
    assert_eq!(outcome.candidates_evaluated, 0);
    assert_eq!(outcome.fitted, spec.base_config.hazards);
    assert!(outcome.residual.is_finite());
}
