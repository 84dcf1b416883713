#![allow(dead_code)]

use std::path::{Path, PathBuf};

use sra_core::frontend::*;
use sra_core::model::*;

pub fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name)
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(corpus(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn model(name: &str) -> Model {
    parse_model(name, &read(name))
        .unwrap_or_else(|d| panic!("{name}:\n{d}"))
        .model
}

pub fn robot() -> Model {
    model("robot.sra")
}

pub fn robot_config(m: &Model) -> Configuration {
    parse_configuration("robot.sracfg", &read("robot.sracfg"), m)
        .unwrap()
        .config
}

pub fn formula(m: &Model, name: &str) -> Expr {
    parse_invariant(name, &read(name), m).unwrap_or_else(|d| panic!("{name}:\n{d}"))
}

pub fn local(m: &Model, class: &str, src: &str) -> Expr {
    parse_local_formula("<test>", src, m, class).unwrap_or_else(|d| panic!("{src}:\n{d}"))
}

pub fn gprime(m: &Model) -> LocalConditions {
    parse_gprime("robot.gprime", &read("robot.gprime"), m).unwrap()
}

pub fn obj(cfg: &Configuration, name: &str) -> ObjId {
    cfg.lookup(name)
        .unwrap_or_else(|| panic!("no instance {name}"))
}

/// Whether a solver is reachable; tests needing one fail loudly otherwise.
pub fn solver_available() -> bool {
    let cfg = sra_core::vcgen::SolverConfig::default();
    std::process::Command::new(&cfg.command[0])
        .arg("-version")
        .output()
        .is_ok()
}
