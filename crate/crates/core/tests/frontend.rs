mod common;

use common::*;
use sra_core::frontend::*;
use sra_core::model::*;

fn expected_codes(src: &str) -> Vec<&str> {
    src.lines()
        .find_map(|l| l.strip_prefix("// expect: "))
        .expect("mutant declares its expected codes")
        .split_whitespace()
        .collect()
}

fn codes(src: &str) -> Vec<&'static str> {
    match parse_model("t.sra", src) {
        Ok(_) => vec![],
        Err(d) => d.codes().iter().map(|c| c.as_str()).collect(),
    }
}

#[test]
fn mutants_rejected_with_expected_codes() {
    let mut n = 0;
    for entry in std::fs::read_dir(corpus("mutants")).unwrap() {
        let path = entry.unwrap().path();
        let src = std::fs::read_to_string(&path).unwrap();
        let want = expected_codes(&src);
        let err = parse_model(&path.display().to_string(), &src)
            .err()
            .unwrap_or_else(|| panic!("{} accepted", path.display()));
        assert!(
            err.0.iter().all(|d| d.span.line >= 1),
            "every diagnostic has a span"
        );
        let got: Vec<&str> = err.codes().iter().map(|c| c.as_str()).collect();
        assert_eq!(got, want, "{}", path.display());
        n += 1;
    }
    assert!(n >= 10);
}

#[test]
fn corpus_models_round_trip() {
    for name in ["robot.sra", "robot-single.sra", "robot-mutant.sra"] {
        let m = model(name);
        let printed = print_model(&m);
        let again = parse_model("printed.sra", &printed)
            .unwrap_or_else(|d| panic!("{name} reprint:\n{d}\n{printed}"))
            .model;
        assert_eq!(again, m, "{name}");
        assert_eq!(print_model(&again), printed, "{name}");
        assert!(check_model(&m, None).is_ok());
    }
}

#[test]
fn effect_test_model_round_trips() {
    let m = sra_core::oracles::effect_test_model();
    let again = parse_model("e.sra", &print_model(&m)).unwrap().model;
    assert_eq!(again, m);
}

#[test]
fn robot_shape() {
    let m = robot();
    let classes: Vec<&str> = m.classes.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(classes, ["Sensor", "Controller"]);
    assert_eq!(m.scheduler.phases, ["Sense", "Act", "Reset", "End"]);
    assert_eq!(m.scheduler.transitions.len(), 6);
    assert_eq!(m.scheduler.initial, "Sense");
    assert_eq!(m.scheduler.final_phase, "End");
    assert_eq!(m.constraints.len(), 5);
}

#[test]
fn empty_file_has_no_classes() {
    let err = parse_model("empty.sra", "").unwrap_err();
    assert!(err.has(Code::NoClasses));
    assert!(err
        .0
        .iter()
        .any(|d| d.message.contains("no class declarations")));
}

const TINY: &str = r#"
enum L { A, B }
class K {
  var location : L = A
  input obstacle : Bool
  event processed : Event
  EFFECT
}
scheduler {
  phases { P, F }
  initial P;
  final F;
  trans P -> P when forall x in All : !x.executed;
  trans P -> F when forall x in All : x.executed;
}
"#;

fn tiny(effect_line: &str) -> String {
    TINY.replace("EFFECT", effect_line)
}

#[test]
fn restriction_examples() {
    assert_eq!(
        codes(&tiny("transition t = (A, true, B, { }, P)")),
        Vec::<&str>::new()
    );
    assert_eq!(
        codes(&tiny("transition t = (A, true, B, { location := B; }, P)")),
        ["E005"]
    );
    assert_eq!(
        codes(&tiny(
            "transition t = (A, true, B, { obstacle := false; }, P)"
        )),
        ["E006"]
    );
    assert_eq!(
        codes(&tiny(
            "transition t = (A, true, B, { processed := false; }, P)"
        )),
        ["E007"]
    );
    assert_eq!(
        codes(&tiny(
            "transition t = (A, true, B, { processed := true; }, P)"
        )),
        Vec::<&str>::new()
    );
}

#[test]
fn all_errors_are_reported_together() {
    let src = tiny(
        "transition t = (A, true, B, { location := B; obstacle := true; processed := false; }, P)",
    );
    let got = codes(&src);
    for c in ["E005", "E006", "E007"] {
        assert!(got.contains(&c), "{got:?}");
    }
}

#[test]
fn missing_initial_value_is_a_warning() {
    let src = tiny("var x : Int\n  transition t = (A, true, B, { }, P)");
    let pm = parse_model("t.sra", &src).unwrap();
    assert!(pm.warnings.iter().any(|w| w.code == Code::MissingInit));
}

#[test]
fn property_parses_and_mentions_expected_symbols() {
    let m = robot();
    let prop = formula(&m, "prop.srainv");
    let syms: Vec<String> = free_symbols(&prop)
        .into_iter()
        .map(|s| s.symbol.to_string())
        .collect();
    for s in [
        "All_Controller",
        "Controller.leftSensors",
        "Sensor.obstacle",
        "Controller.direction",
    ] {
        assert!(syms.contains(&s.to_string()), "{syms:?}");
    }
    assert_eq!(parse_invariant("t", "true", &m).unwrap(), Expr::tt());
    let err = parse_invariant("t", "old(phase == Sense) == (phase == Sense)", &m).unwrap_err();
    assert!(err.has(Code::OldInSource));
}

#[test]
fn invariant_rejects_unknown_and_ill_typed() {
    let m = robot();
    assert!(
        parse_invariant("t", "forall c in All_Controller : c.speed == 1", &m)
            .unwrap_err()
            .has(Code::UnknownName)
    );
    assert!(
        parse_invariant("t", "forall c in All_Controller : c.direction == 1", &m)
            .unwrap_err()
            .has(Code::TypeMismatch)
    );
}

#[test]
fn configuration_examples() {
    let m = robot();
    let good = parse_configuration("c", &read("robot.sracfg"), &m).unwrap();
    assert!(good.satisfies_all());
    assert_eq!(good.config.total(), 4);

    let empty_left =
        read("robot.sracfg").replace("c1.leftSensors = { sL };", "c1.leftSensors = { };");
    let p = parse_configuration("c", &empty_left, &m).unwrap();
    let failed: Vec<&str> = p
        .constraints
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| n.as_str())
        .collect();
    assert!(failed.contains(&"Gamma3"), "{failed:?}");

    let overlap = read("robot.sracfg").replace(
        "c1.rightSensors = { sR1, sR2 };",
        "c1.rightSensors = { sL, sR1, sR2 };",
    );
    let p = parse_configuration("c", &overlap, &m).unwrap();
    assert!(p.constraints.iter().any(|(n, ok)| n == "Gamma1" && !ok));
}

#[test]
fn configuration_errors() {
    let m = robot();
    let base = read("robot.sracfg");
    let unknown_class = format!("{base}\ninstances Motor {{ m1 }}\n");
    assert!(parse_configuration("c", &unknown_class, &m)
        .unwrap_err()
        .has(Code::UnknownName));
    let twice = base.replace(
        "instances Sensor { sL, sR1, sR2 }",
        "instances Sensor { sL, sR1, sR2, sL }",
    );
    assert!(parse_configuration("c", &twice, &m).is_err());
    let wrong_class = base.replace("c1.leftSensors = { sL };", "c1.leftSensors = { c1 };");
    assert!(parse_configuration("c", &wrong_class, &m)
        .unwrap_err()
        .has(Code::TypeMismatch));
}

#[test]
fn configuration_round_trips() {
    let m = robot();
    let cfg = robot_config(&m);
    let printed = print_configuration(&m, &cfg);
    let again = parse_configuration("c", &printed, &m).unwrap().config;
    assert_eq!(again, cfg);
}

#[test]
fn constraint_evaluation_matches_simulator() {
    let m = robot();
    let p = parse_configuration("c", &read("robot.sracfg"), &m).unwrap();
    let sim: Vec<(String, bool)> = sra_core::sim::eval_constraints(&m, &p.config)
        .into_iter()
        .map(|(n, r)| (n, r.unwrap()))
        .collect();
    assert_eq!(sim, p.constraints);
}
