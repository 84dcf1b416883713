mod common;

use common::*;
use rand::SeedableRng;
use sra_core::contract::GenOptions;
use sra_core::model::*;
use sra_core::oracles::*;
use sra_core::sim::{satisfies_constraints, SimRng};

fn quick(gen: GenOptions) -> ContractOracleOptions {
    ContractOracleOptions { samples: 200, configs: 4, gen, ..ContractOracleOptions::default() }
}

#[test]
fn contracts_are_sound_and_precise_on_the_corpus() {
    for name in ["robot.sra", "robot-single.sra", "robot-mutant.sra"] {
        let r = contract_vs_simulator(&model(name), &quick(GenOptions::default())).unwrap();
        assert!(r.all_sound() && r.all_precise(), "{name}\n{}", r.to_text());
    }
    let r = contract_vs_simulator(&effect_test_model(), &quick(GenOptions::default())).unwrap();
    assert!(r.all_sound() && r.all_precise(), "{}", r.to_text());
}

#[test]
fn oracle_detects_generator_faults() {
    let m = robot();
    let r = contract_vs_simulator(&m, &quick(GenOptions { drop_unchanged: true, ..GenOptions::default() })).unwrap();
    assert!(r.all_sound());
    assert!(!r.all_precise(), "{}", r.to_text());
    let r = contract_vs_simulator(&m, &quick(GenOptions { drop_event_reset: true, ..GenOptions::default() })).unwrap();
    assert!(!r.all_precise(), "{}", r.to_text());
    assert!(!r.failures.is_empty());
}

#[test]
fn effect_maps_match_execution() {
    let m = robot();
    let r = effect_oracle(&[&m, &model("robot-single.sra")], 40, 4, 30, 1).unwrap();
    assert!(r.mismatches.is_empty(), "{}", r.to_text());
    assert!(r.effects >= 40);
}

#[test]
fn random_configs_satisfy_constraints() {
    let mut rng = SimRng::seed_from_u64(9);
    for name in ["robot.sra", "robot-single.sra"] {
        let m = model(name);
        for _ in 0..20 {
            let cfg = random_config(&m, &ConfigGen::default(), &mut rng).unwrap();
            assert!(satisfies_constraints(&m, &cfg));
            for c in ["Controller", "Sensor"] {
                let n = cfg.universe(c).len();
                assert!((1..=4).contains(&n), "{c}: {n}");
            }
        }
    }
}

#[test]
fn unsatisfiable_constraints_fail_loudly() {
    let src = read("robot.sra").replace("|c.leftSensors| >= 1", "|c.leftSensors| >= 1 && |c.leftSensors| == 0");
    let m = sra_core::frontend::parse_model("r.sra", &src).unwrap().model;
    let gen = ConfigGen { retries: 50, ..ConfigGen::default() };
    let err = random_config(&m, &gen, &mut SimRng::seed_from_u64(0)).unwrap_err();
    assert_eq!(err, OracleError::NoConfiguration { retries: 50 });
}

#[test]
fn bounded_check_on_the_scenario_configuration() {
    let m = robot();
    let cfg = robot_config(&m);
    let (inv, prop) = (formula(&m, "robot.srainv"), formula(&m, "prop.srainv"));
    let r = bounded_reachability_check(&m, &cfg, &inv, &prop, ReachOptions { cycles: 2, ..ReachOptions::default() }).unwrap();
    assert!(r.violation.is_none(), "{:?}", r.violation);
    assert!(!r.truncated && r.states > 10);
}

#[test]
fn bounded_check_finds_the_mutant_bug() {
    let m = model("robot-mutant.sra");
    let cfg = robot_config(&m);
    let (inv, prop) = (formula(&m, "robot.srainv"), formula(&m, "prop.srainv"));
    let r = bounded_reachability_check(&m, &cfg, &inv, &prop, ReachOptions { cycles: 1, ..ReachOptions::default() }).unwrap();
    let v = r.violation.expect("mutant violates the invariant");
    assert!(matches!(v.kind, ViolationKind::Invariant | ViolationKind::Property));
    assert_eq!(v.trace.first().unwrap().label, "init");
    // Checking the property alone still finds it.
    let r = bounded_reachability_check(&m, &cfg, &Expr::tt(), &prop, ReachOptions { cycles: 1, ..ReachOptions::default() }).unwrap();
    assert_eq!(r.violation.map(|v| v.kind), Some(ViolationKind::Property));
}

#[test]
fn bounded_check_caps() {
    let m = robot();
    let mut cfg = Configuration::default();
    for i in 0..9 {
        cfg.add_instance(&format!("s{i}"), "Sensor");
    }
    let err = bounded_reachability_check(&m, &cfg, &Expr::tt(), &Expr::tt(), ReachOptions::default()).unwrap_err();
    assert!(matches!(err, OracleError::TooManyInstances { instances: 9, .. }));
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let m = robot();
    let cfg = robot_config(&m);
    let seeds: Vec<u64> = (0..5).collect();
    assert!(trace_agreement(&m, &m, &cfg, &seeds, 3).unwrap().iter().all(|c| c.identical));
    let differ = trace_agreement(&m, &model("robot-mutant.sra"), &cfg, &seeds, 3).unwrap();
    assert!(differ.iter().any(|c| !c.identical));
}
