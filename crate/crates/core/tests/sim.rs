mod common;

use common::*;
use rand::SeedableRng;
use sra_core::model::*;
use sra_core::sim::*;

fn scenario(m: &Model, cfg: &Configuration) -> InputProvider {
    InputProvider::from_json(m, cfg, &read("scenario.json")).unwrap()
}

fn loc(s: &GlobalState, cfg: &Configuration, name: &str) -> String {
    match s.read(obj(cfg, name), "location") {
        Some(Value::Enum(v)) => v,
        other => panic!("{other:?}"),
    }
}

fn rng() -> SimRng {
    SimRng::seed_from_u64(0)
}

#[test]
fn initial_state_examples() {
    let m = robot();
    let cfg = robot_config(&m);
    let s = init_state(&m, &cfg, &mut scenario(&m, &cfg)).unwrap();
    assert_eq!(s.phase, "Sense");
    assert_eq!(loc(&s, &cfg, "c1"), "Idle");
    assert_eq!(
        s.read(obj(&cfg, "c1"), "direction"),
        Some(Value::Enum("Stop".into()))
    );
    for n in ["sL", "sR1", "sR2"] {
        assert_eq!(loc(&s, &cfg, n), "Ready");
        assert_eq!(s.read(obj(&cfg, n), "processed"), Some(Value::Bool(false)));
    }
    assert_eq!(s.read(obj(&cfg, "sL"), "obstacle"), Some(Value::Bool(true)));
    assert!(s.executed.iter().all(|e| !e));

    let clear = init_state(&m, &cfg, &mut InputProvider::defaults()).unwrap();
    for o in cfg.ids() {
        for (f, v) in &clear.fields[o.0] {
            if f != "obstacle" {
                assert_eq!(Some(v), s.fields[o.0].get(f));
            }
        }
    }
}

#[test]
fn uninitialized_variable_is_an_error() {
    let src = read("robot.sra").replace(
        "var direction : Direction = Stop",
        "var direction : Direction",
    );
    let m = sra_core::frontend::parse_model("t.sra", &src)
        .unwrap()
        .model;
    let cfg = robot_config(&m);
    assert!(matches!(
        init_state(&m, &cfg, &mut InputProvider::defaults()),
        Err(SimError::MissingInit { .. })
    ));
}

#[test]
fn local_exec_examples() {
    let m = robot();
    let cfg = robot_config(&m);
    let s = init_state(&m, &cfg, &mut scenario(&m, &cfg)).unwrap();
    let (n, t) = exec_local(&m, &cfg, &s, obj(&cfg, "sL"), "Sense", &mut rng()).unwrap();
    assert_eq!(t.map(|t| t.name.as_str()), Some("senseNoGo"));
    assert_eq!(loc(&n, &cfg, "sL"), "NoGo");

    let (n, t) = exec_local(&m, &cfg, &s, obj(&cfg, "c1"), "Sense", &mut rng()).unwrap();
    assert!(t.is_none());
    assert_eq!(n, s);

    let mut act = s.clone();
    act.phase = "Act".into();
    act.set(obj(&cfg, "sL"), "location", Value::Enum("NoGo".into()));
    act.set(obj(&cfg, "sR1"), "location", Value::Enum("Go".into()));
    act.set(obj(&cfg, "sR2"), "location", Value::Enum("Go".into()));
    let (n, t) = exec_local(&m, &cfg, &act, obj(&cfg, "sR1"), "Act", &mut rng()).unwrap();
    assert!(t.is_none());
    assert_eq!(n, act);

    let (n, t) = exec_local(&m, &cfg, &act, obj(&cfg, "c1"), "Act", &mut rng()).unwrap();
    assert_eq!(t.map(|t| t.name.as_str()), Some("actRight"));
    assert_eq!(loc(&n, &cfg, "c1"), "Moving");
    assert_eq!(
        n.read(obj(&cfg, "c1"), "direction"),
        Some(Value::Enum("Right".into()))
    );
    for x in ["sL", "sR1", "sR2"] {
        assert_eq!(n.read(obj(&cfg, x), "processed"), Some(Value::Bool(true)));
    }
}

#[test]
fn scheduler_guard_examples() {
    let m = robot();
    let cfg = robot_config(&m);
    let s = init_state(&m, &cfg, &mut InputProvider::defaults()).unwrap();
    let t = enabled_sched(&m, &cfg, &s).unwrap().unwrap();
    assert_eq!((t.from.as_str(), t.to.as_str()), ("Sense", "Sense"));

    let mut act = s.clone();
    act.phase = "Act".into();
    act.executed = vec![true; cfg.total()];
    act.set(obj(&cfg, "sL"), "processed", Value::Bool(true));
    let t = enabled_sched(&m, &cfg, &act).unwrap().unwrap();
    assert_eq!((t.from.as_str(), t.to.as_str()), ("Act", "Act"));

    act.set(obj(&cfg, "sL"), "processed", Value::Bool(false));
    let t = enabled_sched(&m, &cfg, &act).unwrap().unwrap();
    assert_eq!((t.from.as_str(), t.to.as_str()), ("Act", "Reset"));
}

#[test]
fn scenario_run_passes_the_monitor() {
    let m = robot();
    let cfg = robot_config(&m);
    let prop = Monitor {
        name: "prop".into(),
        formula: formula(&m, "prop.srainv"),
    };
    let order = OrderPolicy::parse("fixed:c1,sL,sR1,sR2").unwrap();
    let r = Simulator::new(&m, &cfg, order, scenario(&m, &cfg), 0)
        .run(1, &[prop])
        .unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let last = &r.trace.entries.last().unwrap().state;
    assert_eq!(last.phase, "End");
    assert_eq!(loc(last, &cfg, "c1"), "Idle");
    assert_eq!(
        last.read(obj(&cfg, "c1"), "direction"),
        Some(Value::Enum("Right".into()))
    );
    for x in ["sL", "sR1", "sR2"] {
        assert_eq!(loc(last, &cfg, x), "Ready");
    }
}

#[test]
fn mutant_violates_property_with_left_obstacle() {
    let m = model("robot-mutant.sra");
    let cfg = robot_config(&m);
    let prop = Monitor {
        name: "prop".into(),
        formula: formula(&m, "prop.srainv"),
    };
    // Left obstacle, right side blocked too: actRight is disabled and the weakened actLeft fires.
    let inputs = InputProvider::from_json(
        &m,
        &cfg,
        r#"[{"sL": {"obstacle": true}, "sR1": {"obstacle": true}, "sR2": {"obstacle": false}}]"#,
    )
    .unwrap();
    let r = Simulator::new(&m, &cfg, OrderPolicy::declaration(), inputs, 0)
        .run(1, &[prop])
        .unwrap();
    assert!(
        matches!(r.verdict, Verdict::Violation { ref monitor, .. } if monitor == "prop"),
        "{:?}",
        r.verdict
    );
}

#[test]
fn zero_cycles_is_init_only() {
    let m = robot();
    let cfg = robot_config(&m);
    let r = Simulator::new(
        &m,
        &cfg,
        OrderPolicy::seeded(1),
        InputProvider::random(1),
        1,
    )
    .run(0, &[])
    .unwrap();
    assert_eq!(r.trace.entries.len(), 1);
    assert_eq!(r.trace.entries[0].label, StepLabel::Init);
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn evaluator_examples() {
    let m = robot();
    let cfg = robot_config(&m);
    let s = init_state(&m, &cfg, &mut InputProvider::defaults()).unwrap();
    let g1 = &m.constraints[0].expr;
    assert_eq!(evaluate(&m, &cfg, &s, None, g1).unwrap(), Value::Bool(true));
    let card = local(&m, "Controller", "|rightSensors| == 2");
    let v = Env::new(&m, &cfg, &s)
        .bind(SELF, Value::Obj(obj(&cfg, "c1")))
        .eval(&card)
        .unwrap();
    assert_eq!(v, Value::Bool(true));
}

#[test]
fn property_holds_after_act_in_scenario() {
    let m = robot();
    let cfg = robot_config(&m);
    let prop = formula(&m, "prop.srainv");
    let order = OrderPolicy::parse("fixed:c1,sL,sR1,sR2").unwrap();
    let r = Simulator::new(&m, &cfg, order, scenario(&m, &cfg), 0)
        .run(1, &[])
        .unwrap();
    let after_act = r
        .trace
        .entries
        .iter()
        .find(|e| matches!(&e.label, StepLabel::SelfLoop { phase, .. } if phase == "Act"))
        .unwrap();
    assert_eq!(
        evaluate(&m, &cfg, &after_act.state, None, &prop).unwrap(),
        Value::Bool(true)
    );
}

#[test]
fn fixed_orders_must_be_permutations() {
    let m = robot();
    let cfg = robot_config(&m);
    assert!(OrderPolicy::parse("fixed:c1,sL")
        .unwrap()
        .validate(&cfg)
        .is_err());
    assert!(OrderPolicy::parse("fixed:c1,sL,sR1,sR2,sL")
        .unwrap()
        .validate(&cfg)
        .is_err());
    assert!(OrderPolicy::parse("fixed:sR2,sR1,sL,c1")
        .unwrap()
        .validate(&cfg)
        .is_ok());
    assert!(OrderPolicy::parse("bogus").is_err());
}

#[test]
fn trace_lines_are_json() {
    let m = robot();
    let cfg = robot_config(&m);
    let r = Simulator::new(
        &m,
        &cfg,
        OrderPolicy::seeded(3),
        InputProvider::random(3),
        3,
    )
    .run(2, &[])
    .unwrap();
    let text = r.trace.to_jsonl(&cfg);
    for (i, line) in text.lines().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["step"], i);
        assert!(v["state"]["c1"]["location"].is_string());
    }
}
