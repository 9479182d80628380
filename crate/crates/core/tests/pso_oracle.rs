//! Swarm results against exhaustive search on low-dimensional problems.

mod common;

use common::pso::{self, Setup};
use gridpeak::optimizer::{optimize_event, optimize_hour};
use gridpeak::SwarmConfig;
use proptest::prelude::*;

fn check_against_grid(name: &str, setup: &Setup, dim: usize) {
    let problem = setup.problem();
    assert_eq!(problem.dimension(), dim, "{name}");
    let (x_grid, grid_cost) = pso::grid_search(&problem);
    let out = optimize_hour(&problem, &SwarmConfig::default());
    assert!(out.feasible, "{name}: swarm found no feasible point");
    let cost = out.evaluation.cost.unwrap().total_cost_usd;
    let gap = (cost - grid_cost) / grid_cost;
    eprintln!("{name}: swarm {cost:.4} at {:?}, grid {grid_cost:.4} at {x_grid:?}", out.position);
    assert!(gap.abs() <= 0.02, "{name}: swarm {cost} vs grid {grid_cost}");
}

#[test]
fn one_dimensional_curtailment() {
    let s = pso::curtail_only();
    check_against_grid("curtailment", &s, 1);
    // the limit binds, so some curtailment is needed
    let out = optimize_hour(&s.problem(), &SwarmConfig::default());
    assert!(out.evaluation.chi.iter().any(|&x| x > 0.0));
}

#[test]
fn one_dimensional_setpoint() {
    check_against_grid("set-point", &pso::setpoint_only(), 1);
}

#[test]
fn two_dimensional_setpoint_and_curtailment() {
    check_against_grid("set-point and curtailment", &pso::setpoint_and_curtailment(), 2);
}

#[test]
fn schedules_are_bit_identical_for_a_seed() {
    let s = pso::setpoint_and_curtailment();
    let p = s.problem();
    let config = SwarmConfig { seed: 42, ..SwarmConfig::default() };
    let a = optimize_hour(&p, &config);
    let b = optimize_hour(&p, &config);
    let seq = optimize_hour(&p, &SwarmConfig { parallel: false, ..config.clone() });
    for other in [&b, &seq] {
        assert_eq!(a.position, other.position);
        assert_eq!(a.trace, other.trace);
        assert_eq!(a.evaluation, other.evaluation);
    }
    let other_seed = optimize_hour(&p, &SwarmConfig { seed: 43, ..config });
    assert_ne!(a.trace, other_seed.trace);

    let event = optimize_event(&s.grid, &s.loads, None, &s.event, &SwarmConfig::default()).unwrap();
    let again = optimize_event(&s.grid, &s.loads, None, &s.event, &SwarmConfig::default()).unwrap();
    assert_eq!(event, again);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn global_best_never_worsens(seed in any::<u64>(), which in 0usize..3, particles in 2usize..12) {
        let s = [pso::curtail_only, pso::setpoint_only, pso::setpoint_and_curtailment][which]();
        let config = SwarmConfig {
            seed,
            particle_count: particles,
            max_iterations: 30,
            ..SwarmConfig::default()
        };
        let out = optimize_hour(&s.problem(), &config);
        prop_assert_eq!(out.trace.len(), 31);
        prop_assert!(out.trace.windows(2).all(|w| w[1] <= w[0]), "{:?}", out.trace);
        prop_assert!(s.problem().decision_box().contains(&out.position));
    }
}
