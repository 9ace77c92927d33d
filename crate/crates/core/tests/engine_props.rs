//! Property suite for the engine: state-machine legality, conservation,
//! determinism, and trace shape over randomized configurations.

mod common;

use persistence_core::engine::{run, run_traced, FactorSpecs, SimConfig};
use persistence_core::model::FactorSpec;
use persistence_core::HazardVector;
use proptest::prelude::*;

fn arb_factor_spec() -> impl Strategy<Value = FactorSpec> {
    prop_oneof![
        (0.0f64..=1.0).prop_map(FactorSpec::Fixed),
        Just(FactorSpec::Uniform01),
    ]
}

fn arb_config() -> impl Strategy<Value = SimConfig> {
    (
        1u32..=60,
        0.0f64..0.95,
        0.0f64..=100.0,
        [arb_factor_spec(), arb_factor_spec(), arb_factor_spec(), arb_factor_spec()],
        proptest::array::uniform4(0.0f64..=1.0),
        any::<u64>(),
        0u8..3,
    )
        .prop_map(
            |(num_agents, frac_teachers, pct, specs, mut h, seed, grid_sel)| {
                h.sort_by(|a, b| b.partial_cmp(a).expect("no NaN"));
                SimConfig {
                    num_agents,
                    frac_teachers,
                    college_attendance_pct: pct,
                    factor_specs: FactorSpecs {
                        goal: specs[0],
                        academic_experience: specs[1],
                        social_skill: specs[2],
                        social_integration: specs[3],
                    },
                    hazards: HazardVector::new(h[0], h[1], h[2], h[3]).expect("sorted"),
                    years: 4,
                    seed,
                    grid: (grid_sel == 0).then(|| common::fitting_grid(num_agents)),
                }
            },
        )
}

proptest! {
    #[test]
    fn runs_satisfy_state_machine_and_conservation(config in arb_config()) {
        common::check_run_invariants(&config);
    }

    #[test]
    fn runs_are_deterministic(config in arb_config()) {
        let (r1, t1) = run_traced(&config).expect("run succeeds");
        let (r2, t2) = run_traced(&config).expect("run succeeds");
        prop_assert_eq!(r1, r2);
        prop_assert_eq!(t1, t2);
    }

    #[test]
    fn grid_never_changes_outcomes(config in arb_config()) {
        let mut without = config.clone();
        without.grid = None;
        let mut with = config.clone();
        with.grid = Some(common::fitting_grid(config.num_agents));
        prop_assert_eq!(run(&with).expect("ok"), run(&without).expect("ok"));
    }

    #[test]
    fn trace_has_one_row_per_agent_per_boundary(config in arb_config()) {
        let (_, rows) = run_traced(&config).expect("run succeeds");
        let expected = config.num_agents as usize * (usize::from(config.years) + 1);
        prop_assert_eq!(rows.len(), expected);
        for boundary in 0..=config.years {
            let ids: Vec<u32> = rows
                .iter()
                .filter(|r| r.year == boundary)
                .map(|r| r.agent_id)
                .collect();
            prop_assert_eq!(ids.len() as u32, config.num_agents);
            prop_assert!(ids.windows(2).all(|w| w[0] < w[1]), "ids ascending");
        }
    }
}
