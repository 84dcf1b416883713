mod common;

use std::collections::BTreeSet;

use common::*;
use sra_core::model::*;

fn names(e: &Expr) -> BTreeSet<String> {
    free_symbols(e)
        .into_iter()
        .map(|s| s.symbol.to_string())
        .collect()
}

fn pairs(items: &[(&str, &str)]) -> BTreeSet<(String, String)> {
    items
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

#[test]
fn free_symbols_examples() {
    let m = robot();
    assert!(free_symbols(&Expr::tt()).is_empty());
    let sensor = m.class("Sensor").unwrap();
    let no_go = sensor
        .transitions
        .iter()
        .find(|t| t.name == "senseNoGo")
        .unwrap();
    assert_eq!(
        names(&no_go.guard),
        BTreeSet::from(["Sensor.obstacle".to_string()])
    );
    let e = local(
        &m,
        "Controller",
        "forall s in rightSensors : s.location == Go",
    );
    assert_eq!(
        names(&e),
        BTreeSet::from([
            "Controller.rightSensors".to_string(),
            "Sensor.location".to_string()
        ])
    );
}

#[test]
fn free_symbols_tags_vintage() {
    let e = Expr::and(
        Expr::old(Expr::self_field("Sensor", "obstacle")),
        Expr::self_field("Sensor", "processed"),
    );
    let syms = free_symbols(&e);
    assert!(syms
        .iter()
        .any(|s| s.symbol.to_string() == "Sensor.obstacle" && s.vintage == Vintage::Pre));
    assert!(syms
        .iter()
        .any(|s| s.symbol.to_string() == "Sensor.processed" && s.vintage == Vintage::Post));
}

#[test]
fn write_footprint_examples() {
    let m = robot();
    let sensor = m.class("Sensor").unwrap();
    let ctrl = m.class("Controller").unwrap();
    assert_eq!(
        write_footprint(sensor, "Sense"),
        pairs(&[("Sensor", "location"), ("Sensor", "executed")])
    );
    assert_eq!(
        write_footprint(ctrl, "Act"),
        pairs(&[
            ("Controller", "location"),
            ("Controller", "direction"),
            ("Controller", "executed"),
            ("Sensor", "processed"),
        ])
    );
    assert_eq!(
        write_footprint(ctrl, "Sense"),
        pairs(&[("Controller", "executed")])
    );
    // Guard events are consumed by the sensor in Act.
    assert!(
        write_footprint(sensor, "Act").contains(&("Sensor".to_string(), "processed".to_string()))
    );
}

#[test]
fn timer_domain() {
    assert_eq!(TimerValue::from_count(3).tick(), TimerValue::Active(2));
    assert_eq!(TimerValue::Active(1).tick(), TimerValue::Inactive);
    assert_eq!(TimerValue::Inactive.tick(), TimerValue::Inactive);
    assert_eq!(TimerValue::from_count(0), TimerValue::Inactive);
}

#[test]
fn robot_configuration_sets_are_well_classed() {
    let m = robot();
    let cfg = robot_config(&m);
    for ((o, f), s) in &cfg.sets {
        let elem = &m.class(cfg.class_of(*o)).unwrap().set(f).unwrap().elem;
        assert!(s.iter().all(|x| cfg.class_of(*x) == elem));
    }
}
