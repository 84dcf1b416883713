mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::process::{Command, Stdio};

use common::*;
use sra_core::contract::GenOptions;
use sra_core::frontend::{parse_model, LocalConditions};
use sra_core::model::*;
use sra_core::pipeline::{global_tasks, local_tasks, CARD_BOUND};
use sra_core::vcgen::sexp::parse_all;
use sra_core::vcgen::smt::{all_pred, immutable_fn, preamble};
use sra_core::vcgen::*;

fn robot_tasks(m: &Model, gp: &LocalConditions) -> Vec<VerificationTask> {
    global_tasks(
        m,
        &formula(m, "robot.srainv"),
        &formula(m, "prop.srainv"),
        gp,
        GenOptions::default(),
    )
    .unwrap()
}

fn z3(script: &str) -> String {
    let cfg = SolverConfig::default();
    let mut child = Command::new(&cfg.command[0])
        .args(&cfg.command[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .expect("solver not runnable");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(script.as_bytes())
        .unwrap();
    String::from_utf8(child.wait_with_output().unwrap().stdout)
        .unwrap()
        .trim()
        .to_string()
}

fn by_id(results: &[VcResult]) -> BTreeMap<&str, &VcVerdict> {
    results
        .iter()
        .map(|r| (r.id.as_str(), &r.verdict))
        .collect()
}

#[test]
fn preamble_declares_signature_and_constraints() {
    let m = robot();
    let p = preamble(&m, CARD_BOUND).unwrap();
    assert!(p.contains("(declare-sort Controller 0)") && p.contains("(declare-sort Sensor 0)"));
    for set in ["leftSensors", "rightSensors", "allSensors"] {
        assert!(
            p.contains(&format!(
                "(declare-fun {} (Controller Sensor) Bool)",
                immutable_fn("Controller", set)
            )),
            "{set}"
        );
    }
    assert!(p.contains(&format!(
        "(declare-fun {} (Sensor) Bool)",
        all_pred("Sensor")
    )));
    for g in 1..=5 {
        assert!(p.contains(&format!("; Gamma{g}\n(assert ")), "Gamma{g}");
    }
    assert!(parse_all(&p).is_ok());
}

#[test]
fn no_constraints_gives_no_axioms() {
    let src = read("robot.sra");
    let cut = src.find("constraints {").unwrap();
    let m = parse_model("r.sra", &src[..cut]).unwrap().model;
    assert!(!preamble(&m, CARD_BOUND).unwrap().contains("; Gamma"));
}

#[test]
fn cardinality_expands_to_witnesses() {
    assert!(solver_available());
    let m = robot();
    let p = preamble(&m, CARD_BOUND).unwrap();
    let left = immutable_fn("Controller", "leftSensors");
    let ctl = all_pred("Controller");
    // Some controller with no left sensor contradicts the axioms.
    let q = format!("{p}(assert (exists ((c Controller)) (and ({ctl} c) (forall ((s Sensor)) (not ({left} c s))))))\n(check-sat)\n");
    assert_eq!(z3(&q), "unsat");
    // One left sensor each is consistent.
    let q = format!("{p}(check-sat)\n");
    assert_eq!(z3(&q), "sat");
}

#[test]
fn cardinality_bound_is_enforced() {
    let src = read("robot.sra").replace("|c.leftSensors| >= 1", "|c.leftSensors| >= 9");
    let m = parse_model("r.sra", &src).unwrap().model;
    assert!(matches!(
        preamble(&m, CARD_BOUND),
        Err(VcError::CardinalityBound { k: 9, .. })
    ));
}

#[test]
fn task_inventory() {
    let m = robot();
    let tasks = robot_tasks(&m, &gprime(&m));
    let count = |k: TaskKind| tasks.iter().filter(|t| t.kind == k).count();
    // Three self-loop phases, two classes.
    assert_eq!(count(TaskKind::Establishment), 6);
    assert_eq!(count(TaskKind::Stability), 12);
    assert_eq!(count(TaskKind::SelfLoopPreservation), 6);
    assert_eq!(count(TaskKind::PhaseNonFinal), 2);
    assert_eq!(count(TaskKind::PhaseFinal), 1);
    assert_eq!(count(TaskKind::Reset), 1);
    assert_eq!(count(TaskKind::Init), 1);
    assert_eq!(count(TaskKind::PropertyImplication), 1);
    assert_eq!(tasks.len(), 30);
    let ids: std::collections::BTreeSet<_> = tasks.iter().map(|t| t.id.clone()).collect();
    assert_eq!(ids.len(), tasks.len());
    assert!(ids.contains("stability_Sensor-Controller_Act"));
}

#[test]
fn smt_asserts_exactly_the_negated_obligation() {
    let m = robot();
    for t in robot_tasks(&m, &gprime(&m)) {
        let obligation = &t.smt[t.smt.find("; obligation").unwrap()..];
        assert_eq!(obligation.matches("(assert ").count(), 1, "{}", t.id);
        assert!(obligation.contains("(assert (not "), "{}", t.id);
        assert!(obligation.trim_end().ends_with("(check-sat)"));
        assert!(parse_all(&t.smt).is_ok(), "{}", t.id);
    }
}

#[test]
fn establishment_with_default_condition() {
    assert!(solver_available());
    let m = robot();
    let tasks = robot_tasks(&m, &LocalConditions::default());
    let sense = tasks
        .iter()
        .find(|t| t.id == "establishment_Sensor_Sense")
        .unwrap();
    let text = sense.render();
    assert!(text.contains("executed"), "{text}");
    let r = discharge(&m, std::slice::from_ref(sense), &SolverConfig::default());
    assert_eq!(r[0].verdict, VcVerdict::Valid);
}

#[test]
fn reset_task_shape() {
    let m = robot();
    let tasks = robot_tasks(&m, &gprime(&m));
    let reset = tasks.iter().find(|t| t.kind == TaskKind::Reset).unwrap();
    let labels: Vec<&str> = reset.hypotheses.iter().map(|(l, _)| l.as_str()).collect();
    assert!(labels.iter().any(|l| l.contains("input")), "{labels:?}");
    let text = reset.render();
    assert!(text.contains("old("), "{text}");
    assert!(
        !text.contains("obstacle == old"),
        "inputs are free across a reset:\n{text}"
    );
}

#[test]
fn property_implied_by_conjunct() {
    assert!(solver_available());
    let m = robot();
    let prop = formula(&m, "prop.srainv");
    let inv = Expr::and(formula(&m, "robot.srainv"), prop.clone());
    let tasks = global_tasks(&m, &inv, &prop, &gprime(&m), GenOptions::default()).unwrap();
    let t = tasks
        .iter()
        .find(|t| t.kind == TaskKind::PropertyImplication)
        .unwrap();
    assert_eq!(
        discharge(&m, std::slice::from_ref(t), &SolverConfig::default())[0].verdict,
        VcVerdict::Valid
    );
}

#[test]
fn robot_pipeline_is_proven() {
    assert!(solver_available());
    let m = robot();
    let tasks = robot_tasks(&m, &gprime(&m));
    let rep = report(discharge(&m, &tasks, &SolverConfig::default()));
    assert_eq!(rep.verdict, Verdict::Proven, "{}", rep.to_text());
}

#[test]
fn mutant_is_refuted_with_counter_model() {
    assert!(solver_available());
    let m = model("robot-mutant.sra");
    let tasks = robot_tasks(&m, &gprime(&m));
    let results = discharge(&m, &tasks, &SolverConfig::default());
    let v = by_id(&results);
    assert!(
        matches!(
            v["self-loop_Controller_Act"],
            VcVerdict::Invalid { model: Some(_) }
        ),
        "{:?}",
        v["self-loop_Controller_Act"]
    );
    let rep = report(results);
    assert_eq!(rep.verdict, Verdict::RefutedObligation);
    assert_eq!(rep.verdict.exit_code(), 1);
}

#[test]
fn local_contracts_are_valid() {
    assert!(solver_available());
    for name in ["robot.sra", "robot-single.sra"] {
        let m = model(name);
        let tasks = local_tasks(&m, GenOptions::default()).unwrap();
        assert!(tasks.iter().any(|t| t.id.contains("Sensor_Sense")));
        assert!(tasks.iter().any(|t| t.id.contains("Controller_Act")));
        let rep = report(discharge(&m, &tasks, &SolverConfig::default()));
        assert_eq!(rep.verdict, Verdict::Proven, "{name}:\n{}", rep.to_text());
    }
}

#[test]
fn dropping_event_reset_is_caught() {
    assert!(solver_available());
    let m = robot();
    let opts = GenOptions {
        drop_event_reset: true,
        ..GenOptions::default()
    };
    let tasks = local_tasks(&m, opts).unwrap();
    let results = discharge(&m, &tasks, &SolverConfig::default());
    let invalid: Vec<_> = results
        .iter()
        .filter(|r| matches!(r.verdict, VcVerdict::Invalid { model: Some(_) }))
        .collect();
    assert!(!invalid.is_empty(), "{}", report(results.clone()).to_text());
}

#[test]
fn tautology_is_valid() {
    assert!(solver_available());
    let m = robot();
    let processed = Expr::field(inst("s", "Sensor"), "Sensor", "processed");
    let mut t = VerificationTask::new(TaskKind::LocalContract, "Sensor", "none")
        .with_const("s", "Sensor")
        .goal(Expr::or(processed.clone(), Expr::not(processed)));
    t.encode(&m, CARD_BOUND).unwrap();
    assert_eq!(
        discharge_one(&m, &t, &SolverConfig::default()).verdict,
        VcVerdict::Valid
    );
}

#[test]
fn broken_solver_is_unknown() {
    let m = robot();
    let mut t = VerificationTask::new(TaskKind::LocalContract, "Sensor", "none");
    t.encode(&m, CARD_BOUND).unwrap();
    let r = discharge_one(&m, &t, &SolverConfig::with_command("false"));
    assert!(
        matches!(r.verdict, VcVerdict::Unknown { .. }),
        "{:?}",
        r.verdict
    );
    let r = discharge_one(&m, &t, &SolverConfig::with_command("/nonexistent/solver"));
    assert!(matches!(r.verdict, VcVerdict::Unknown { .. }));
}

fn result(id: &str, verdict: VcVerdict) -> VcResult {
    VcResult {
        id: id.into(),
        kind: TaskKind::Init,
        verdict,
        wall_ms: 1,
        steps: None,
        solver: "test".into(),
    }
}

#[test]
fn report_verdicts() {
    assert_eq!(
        report(vec![result("a", VcVerdict::Valid)]).verdict,
        Verdict::Proven
    );
    let r = report(vec![
        result("a", VcVerdict::Valid),
        result("b", VcVerdict::Timeout),
    ]);
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert_eq!(r.verdict.exit_code(), 3);
    assert!(r.to_text().contains("b"));
    let r = report(vec![
        result("a", VcVerdict::Timeout),
        result("b", VcVerdict::Invalid { model: None }),
    ]);
    assert_eq!(r.verdict, Verdict::RefutedObligation);
    assert_eq!(r.verdict.label(), "Refuted-obligation");
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["verdict"], "refuted-obligation");
    assert_eq!(r.counts(), (0, 1, 0, 1));
}
