//! Randomized invariants over the frontend, model utilities and simulator.

mod common;

use std::cell::RefCell;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use sra_core::frontend::{parse_configuration, parse_model, print_configuration, print_model};
use sra_core::model::*;
use sra_core::oracles::{effect_test_model, random_config, random_state, ConfigGen, EffectGen};
use sra_core::sim::{eval_constraints, exec_local, InputProvider, OrderPolicy, SimRng, Simulator, StepLabel};
use sra_core::vcgen::step_frame;

fn subterms(e: &Expr) -> Vec<Expr> {
    let out = RefCell::new(Vec::new());
    e.contains(&|x: &Expr| {
        out.borrow_mut().push(x.clone());
        false
    });
    out.into_inner()
}

fn corpus_models() -> Vec<Model> {
    vec![robot(), model("robot-single.sra"), model("robot-mutant.sra"), effect_test_model()]
}

fn some_config(m: &Model, rng: &mut SimRng) -> Configuration {
    random_config(m, &ConfigGen::default(), rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_effects_round_trip(seed in any::<u64>()) {
        let mut rng = SimRng::seed_from_u64(seed);
        let mut m = effect_test_model();
        m.classes[0].transitions[0].effect = EffectGen::new(&mut rng).stmt(4).flattened();
        let text = print_model(&m);
        let back = parse_model("rt.sra", &text).map_err(|d| TestCaseError::fail(format!("{d}\n{text}")))?.model;
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(print_model(&back), text);
    }

    #[test]
    fn free_symbols_are_monotone(seed in any::<u64>()) {
        let mut rng = SimRng::seed_from_u64(seed);
        let e = EffectGen::new(&mut rng).boolean(4);
        let all = free_symbols(&e);
        for sub in subterms(&e) {
            // Subterms under `old` carry the pre vintage in the whole formula.
            let part = free_symbols(&sub);
            for s in part {
                prop_assert!(all.iter().any(|a| a.symbol == s.symbol), "{:?} missing", s);
            }
        }
    }

    #[test]
    fn footprint_covers_every_change(seed in any::<u64>()) {
        let mut rng = SimRng::seed_from_u64(seed);
        let models = corpus_models();
        let m = models.choose(&mut rng).unwrap();
        let cfg = some_config(m, &mut rng);
        let phase = m.scheduler.phases.choose(&mut rng).unwrap().clone();
        let pre = random_state(m, &cfg, &phase, &mut rng);
        for o in cfg.ids() {
            let class = m.class_decl(cfg.class_of(o));
            let Ok((post, _)) = exec_local(m, &cfg, &pre, o, &phase, &mut rng) else { continue };
            let footprint = write_footprint(class, &phase);
            for x in cfg.ids() {
                for f in m.class_decl(cfg.class_of(x)).mutable_names() {
                    if pre.read(x, f) != post.read(x, f) {
                        prop_assert!(footprint.contains(&(cfg.class_of(x).to_string(), f.to_string())),
                            "{}.{} changed by {} in {}", cfg.class_of(x), f, class.name, phase);
                    }
                }
            }
        }
    }

    #[test]
    fn frames_admit_concrete_steps(seed in any::<u64>()) {
        let mut rng = SimRng::seed_from_u64(seed);
        let models = corpus_models();
        let m = models.choose(&mut rng).unwrap();
        let cfg = some_config(m, &mut rng);
        let phase = m.scheduler.phases.choose(&mut rng).unwrap().clone();
        let pre = random_state(m, &cfg, &phase, &mut rng);
        let o = *cfg.ids().collect::<Vec<_>>().choose(&mut rng).unwrap();
        let class = m.class_decl(cfg.class_of(o));
        if let Ok((mut post, _)) = exec_local(m, &cfg, &pre, o, &phase, &mut rng) {
            post.executed[o.0] = true;
            let d = Expr::var("d", &class.name);
            for (label, frame) in step_frame(m, class, &d, &phase) {
                let mut env = sra_core::sim::Env::new(m, &cfg, &post).with_pre(&pre).bind("d", Value::Obj(o));
                prop_assert_eq!(env.eval_bool(&frame).ok(), Some(true), "{}", label);
            }
        }
    }

    #[test]
    fn constraint_reports_agree(seed in any::<u64>()) {
        let mut rng = SimRng::seed_from_u64(seed);
        let m = robot();
        let mut cfg = some_config(&m, &mut rng);
        // Perturb one set so that some constraints may fail.
        if let Some(key) = cfg.sets.keys().cloned().collect::<Vec<_>>().choose(&mut rng) {
            let sensors = cfg.universe("Sensor");
            let set = cfg.sets.get_mut(key).unwrap();
            if let Some(s) = sensors.choose(&mut rng) {
                if !set.remove(s) { set.insert(*s); }
            }
        }
        let text = print_configuration(&m, &cfg);
        let parsed = parse_configuration("c.sracfg", &text, &m).map_err(|d| TestCaseError::fail(d.to_string()))?;
        prop_assert_eq!(&parsed.config, &cfg);
        let direct: Vec<(String, bool)> = eval_constraints(&m, &cfg).into_iter().map(|(n, r)| (n, r.unwrap())).collect();
        prop_assert_eq!(parsed.constraints, direct);
    }

    #[test]
    fn scheduler_discipline(seed in any::<u64>()) {
        let mut rng = SimRng::seed_from_u64(seed);
        let m = robot();
        let cfg = some_config(&m, &mut rng);
        let mut sim = Simulator::new(&m, &cfg, OrderPolicy::seeded(seed), InputProvider::random(seed), seed);
        let run = sim.run(2, &[]).unwrap();
        let inputs = |s: &GlobalState| -> Vec<Option<Value>> {
            cfg.ids().flat_map(|o| {
                m.class_decl(cfg.class_of(o)).fields.iter().filter(|f| f.input).map(move |f| (o, f.name.clone()))
            }).map(|(o, f)| s.read(o, &f)).collect()
        };
        let mut cycle_inputs = None;
        for step in &run.trace.entries {
            match &step.label {
                StepLabel::Init | StepLabel::PhaseChange { .. } => {
                    prop_assert!(step.state.executed.iter().all(|e| !e));
                }
                _ => {}
            }
            if matches!(step.label, StepLabel::Init | StepLabel::Reset) {
                cycle_inputs = Some(inputs(&step.state));
            } else {
                prop_assert_eq!(Some(inputs(&step.state)), cycle_inputs.clone());
            }
        }
    }

    #[test]
    fn write_disjoint_sweeps_ignore_order(seed in any::<u64>()) {
        // In Sense every sensor writes only itself and the controller stutters.
        let mut rng = SimRng::seed_from_u64(seed);
        let m = robot();
        let cfg = some_config(&m, &mut rng);
        let pre = random_state(&m, &cfg, "Sense", &mut rng);
        let sweep = |order: &[ObjId]| {
            let mut s = pre.clone();
            let mut r = SimRng::seed_from_u64(0);
            for &o in order {
                s = exec_local(&m, &cfg, &s, o, "Sense", &mut r).unwrap().0;
                s.executed[o.0] = true;
            }
            s
        };
        let mut order: Vec<ObjId> = cfg.ids().collect();
        let first = sweep(&order);
        order.shuffle(&mut rng);
        prop_assert_eq!(sweep(&order), first);
    }
}
