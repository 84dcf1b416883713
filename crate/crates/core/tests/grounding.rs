mod common;

use std::collections::BTreeSet;

use common::*;
use rand::SeedableRng;
use sra_core::frontend::{parse_model, print_expr, print_model};
use sra_core::grounding::*;
use sra_core::model::*;
use sra_core::oracles::{random_state, trace_agreement};
use sra_core::pipeline::ground;
use sra_core::sim::{Env, SimRng};
use sra_core::vcgen::{discharge, report, SolverConfig, TaskKind, Verdict, VcVerdict};

fn single() -> Model {
    model("robot-single.sra")
}

/// robot-single with the unit bound relaxed to at most one.
fn single_nullable() -> Model {
    let src = read("robot-single.sra").replace("|c.leftSensors| == 1", "|c.leftSensors| <= 1");
    parse_model("nullable.sra", &src).unwrap().model
}

#[test]
fn plans() {
    assert!(plan(&robot()).is_empty());
    let p = plan(&single());
    assert_eq!(p.entries.len(), 1);
    let e = &p.entries[0];
    assert_eq!((e.class.as_str(), e.set.as_str(), e.field.as_str(), e.nullable), ("Controller", "leftSensors", "leftSensor", false));
    assert!(plan(&single_nullable()).entries[0].nullable);
}

#[test]
fn larger_bounds_are_not_planned() {
    let src = read("robot-single.sra").replace("|c.leftSensors| == 1", "|c.leftSensors| <= 2");
    let m = parse_model("two.sra", &src).unwrap().model;
    assert!(plan(&m).is_empty());
}

#[test]
fn restrict_rejects_unknown_sets() {
    let m = single();
    let p = plan(&m);
    assert_eq!(p.restrict(&m, &["Controller.leftSensors".into()]).unwrap(), p);
    assert!(p.restrict(&m, &["Controller.rightSensors".into()]).is_err());
}

#[test]
fn formula_rewrites() {
    let m = single();
    let f = local(&m, "Controller", "exists s in leftSensors : s.obstacle");
    let g = ground_formula(&plan(&m), &f);
    assert_eq!(print_expr(&g), "leftSensor.obstacle");

    let m = single_nullable();
    let f = local(&m, "Controller", "exists s in leftSensors : s.obstacle");
    let g = print_expr(&ground_formula(&plan(&m), &f));
    assert!(g.contains("leftSensor != null") && g.contains("leftSensor.obstacle"), "{g}");
    let f = local(&m, "Controller", "forall s in leftSensors : s.obstacle");
    let g = print_expr(&ground_formula(&plan(&m), &f));
    assert!(g.contains("leftSensor != null ==>"), "{g}");

    let untouched = local(&m, "Controller", "exists s in rightSensors : s.obstacle");
    assert_eq!(ground_formula(&plan(&m), &untouched), untouched);
}

/// Original and grounded formulas agree on every 0- or 1-element
/// interpretation of the grounded set.
#[test]
fn rewrites_preserve_meaning_on_unit_structures() {
    let m = single_nullable();
    let p = plan(&m);
    let gm = ground_model(&m, &p, GroundOptions::default());
    let sources = [
        "exists s in leftSensors : s.obstacle",
        "forall s in leftSensors : s.location == Go",
        "|leftSensors| == 1",
        "leftSensors !! rightSensors",
        "forall s in allSensors : s in leftSensors || s in rightSensors",
        "exists s in leftSensors : exists t in rightSensors : s.obstacle == t.obstacle",
    ];
    let mut rng = SimRng::seed_from_u64(5);
    for src in sources {
        let f = local(&m, "Controller", src);
        let g = ground_formula(&p, &f);
        for left_size in [0, 1] {
            let mut cfg = Configuration::default();
            let c = cfg.add_instance("c", "Controller");
            let l = cfg.add_instance("l", "Sensor");
            let r = cfg.add_instance("r", "Sensor");
            let left: BTreeSet<ObjId> = if left_size == 1 { [l].into() } else { BTreeSet::new() };
            cfg.sets.insert((c, "leftSensors".into()), left.clone());
            cfg.sets.insert((c, "rightSensors".into()), [r].into());
            cfg.sets.insert((c, "allSensors".into()), left.iter().copied().chain([r]).collect());
            for _ in 0..20 {
                let s = random_state(&m, &cfg, "Sense", &mut rng);
                let a = Env::new(&m, &cfg, &s).bind(SELF, Value::Obj(c)).eval_bool(&f).unwrap();
                let b = Env::new(&gm, &cfg, &s).bind(SELF, Value::Obj(c)).eval_bool(&g).unwrap();
                assert_eq!(a, b, "{src} with |leftSensors| = {left_size}");
            }
        }
    }
}

/// robot-single with the first quantified assignment ranging over the grounded set.
fn writes_left(bound: &str) -> Model {
    let src = read("robot-single.sra")
        .replace("|c.leftSensors| == 1", bound)
        .replacen("forall s in allSensors { s.processed := true; }", "forall s in leftSensors { s.processed := true; }", 1);
    parse_model("writes-left.sra", &src).unwrap().model
}

#[test]
fn statement_rewrites() {
    let m = writes_left("|c.leftSensors| == 1");
    let text = print_model(&ground_model(&m, &plan(&m), GroundOptions::default()));
    assert!(!text.contains("forall s in leftSensors"), "{text}");
    assert!(text.contains("leftSensor.processed := true"), "{text}");
    assert!(text.contains("ghost set leftSensors"), "the source set stays for specifications");

    let m = writes_left("|c.leftSensors| <= 1");
    let text = print_model(&ground_model(&m, &plan(&m), GroundOptions::default()));
    assert!(text.contains("if leftSensor != null"), "{text}");
}

#[test]
fn grounded_statements_run_alike() {
    for (bound, empty) in [("|c.leftSensors| == 1", false), ("|c.leftSensors| <= 1", false), ("|c.leftSensors| <= 1", true)] {
        let m = writes_left(bound);
        let gm = ground_model(&m, &plan(&m), GroundOptions::default());
        let mut cfg = Configuration::default();
        let c = cfg.add_instance("c", "Controller");
        let l = cfg.add_instance("l", "Sensor");
        let r = cfg.add_instance("r", "Sensor");
        let left: BTreeSet<ObjId> = if empty { BTreeSet::new() } else { [l].into() };
        cfg.sets.insert((c, "allSensors".into()), left.iter().copied().chain([r]).collect());
        cfg.sets.insert((c, "leftSensors".into()), left);
        cfg.sets.insert((c, "rightSensors".into()), [r].into());
        let seeds: Vec<u64> = (0..10).collect();
        for cmp in trace_agreement(&m, &gm, &cfg, &seeds, 3).unwrap() {
            assert!(cmp.identical, "{bound}, empty {empty}, seed {}: {:?}", cmp.seed, cmp.first_difference);
        }
    }
}

#[test]
fn empty_plan_leaves_model_identical() {
    let m = robot();
    assert_eq!(ground_model(&m, &plan(&m), GroundOptions::default()), m);
}

#[test]
fn grounded_runs_match() {
    let m = single();
    let gm = ground_model(&m, &plan(&m), GroundOptions::default());
    let cfg = sra_core::frontend::parse_configuration("robot.sracfg", &read("robot.sracfg"), &m).unwrap().config;
    let seeds: Vec<u64> = (0..20).collect();
    for cmp in trace_agreement(&m, &gm, &cfg, &seeds, 3).unwrap() {
        assert!(cmp.identical, "seed {}: {:?}", cmp.seed, cmp.first_difference);
    }
}

#[test]
fn lemmas_cover_specifications_and_discharge() {
    assert!(solver_available());
    let m = single();
    let inv = formula(&m, "robot.srainv");
    let prop = formula(&m, "prop.srainv");
    let g = ground(&m, &plan(&m), GroundOptions::default(), Some(&inv), Some(&prop), Some(&gprime(&m))).unwrap();
    assert!(g.lemmas.iter().all(|t| t.kind == TaskKind::GroundingLemma));
    let ids: Vec<&str> = g.lemmas.iter().map(|t| t.id.as_str()).collect();
    assert!(ids.iter().any(|i| i.contains("invariant")), "{ids:?}");
    assert!(ids.iter().any(|i| i.contains("property")), "{ids:?}");
    assert!(ids.iter().any(|i| i.contains("Act")), "{ids:?}");
    let rep = report(discharge(&g.model, &g.lemmas, &SolverConfig::default()));
    assert_eq!(rep.verdict, Verdict::Proven, "{}", rep.to_text());
    for r in &rep.results {
        assert!(r.wall_ms < 10_000, "{} took {} ms", r.id, r.wall_ms);
    }
}

#[test]
fn nullable_lemmas_discharge_and_dropped_guard_is_caught() {
    assert!(solver_available());
    let m = single_nullable();
    let prop = formula(&m, "prop.srainv");
    let good = ground(&m, &plan(&m), GroundOptions::default(), None, Some(&prop), None).unwrap();
    let rep = report(discharge(&good.model, &good.lemmas, &SolverConfig::default()));
    assert_eq!(rep.verdict, Verdict::Proven, "{}", rep.to_text());

    let bad = ground(&m, &plan(&m), GroundOptions { drop_null_guard: true }, None, Some(&prop), None).unwrap();
    let results = discharge(&bad.model, &bad.lemmas, &SolverConfig::default());
    assert!(results.iter().any(|r| matches!(r.verdict, VcVerdict::Invalid { .. })), "{}", report(results).to_text());
}
