use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/corpus")
        .join(name)
        .display()
        .to_string()
}

/// Runs `sra` in a scratch working directory so stray writes are visible.
fn sra(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sra")).current_dir(cwd).args(args).output().expect("sra runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn entries(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn help_explains_the_configuration_asymmetry() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sra(tmp.path(), &["--help"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("requires --config") && text.contains("takes no"), "{text}");
    assert!(text.contains("SRA_SMT_CMD"));
    let o = sra(tmp.path(), &["verify-global", "--help"]);
    assert!(stdout(&o).contains("takes no configuration"));
}

#[test]
fn check_accepts_the_corpus_and_rejects_mutants() {
    let tmp = tempfile::tempdir().unwrap();
    let robot = corpus("robot.sra");
    let cfg = corpus("robot.sracfg");
    let inv = corpus("robot.srainv");
    let o = sra(tmp.path(), &["check", &robot, "--config", &cfg, "--formula", &inv]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let o = sra(tmp.path(), &["--json", "check", &corpus("mutants/location-assigned.sra")]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.to_string().contains("E005"), "{v}");

    let o = sra(tmp.path(), &["check", "/nonexistent.sra"]);
    assert_eq!(code(&o), 2);
    assert!(entries(tmp.path()).is_empty());
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let robot = corpus("robot.sra");
    assert_eq!(code(&sra(tmp.path(), &["simulate", &robot])), 2, "simulate needs --config");
    let o = sra(
        tmp.path(),
        &["verify-global", &robot, "--invariant", &corpus("robot.srainv"), "--property", &corpus("prop.srainv"), "--config", &corpus("robot.sracfg")],
    );
    assert_eq!(code(&o), 2);
    assert_eq!(code(&sra(tmp.path(), &["frobnicate"])), 2);
    let o = sra(tmp.path(), &["simulate", &robot, "--config", &corpus("robot.sracfg"), "--order", "fixed:c1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn simulate_writes_a_jsonl_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("runs/trace.jsonl");
    let o = sra(
        tmp.path(),
        &[
            "simulate",
            &corpus("robot.sra"),
            "--config",
            &corpus("robot.sracfg"),
            "--inputs",
            &corpus("scenario.json"),
            "--order",
            "fixed:c1,sL,sR1,sR2",
            "--monitor",
            &corpus("prop.srainv"),
            "--out",
            out.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let last: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["phase"], "End");
    assert_eq!(last["state"]["c1"]["direction"], "Right");
    assert_eq!(entries(tmp.path()), vec![tmp.path().join("runs")]);
}

#[test]
fn simulate_reports_monitor_violations() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sra(
        tmp.path(),
        &["--json", "simulate", &corpus("robot-mutant.sra"), "--config", &corpus("robot.sracfg"), "--cycles", "3", "--monitor", &corpus("prop.srainv")],
    );
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["verdict"].to_string().contains("violation"), "{}", v["verdict"]);
}

#[test]
fn contracts_are_printed() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sra(tmp.path(), &["contracts", &corpus("robot.sra"), "--class", "Sensor"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("Sensor") && !text.contains("contract Controller"), "{text}");
}

#[test]
fn verify_global_proves_the_robot() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("vc");
    let o = sra(
        tmp.path(),
        &[
            "verify-global",
            &corpus("robot.sra"),
            "--invariant",
            &corpus("robot.srainv"),
            "--property",
            &corpus("prop.srainv"),
            "--gprime",
            &corpus("robot.gprime"),
            "--config",
            "none",
            "--out",
            out.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let files = entries(&out);
    assert_eq!(files.iter().filter(|p| p.extension().is_some_and(|e| e == "smt2")).count(), 30);
    assert!(out.join("report.txt").exists() && out.join("report.json").exists());
    assert!(out.join("reset_global_End-Sense.smt2").exists());
    assert_eq!(entries(tmp.path()), vec![out]);
}

#[test]
fn verify_global_refutes_the_mutant() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sra(
        tmp.path(),
        &[
            "--json",
            "verify-global",
            &corpus("robot-mutant.sra"),
            "--invariant",
            &corpus("robot.srainv"),
            "--property",
            &corpus("prop.srainv"),
            "--gprime",
            &corpus("robot.gprime"),
        ],
    );
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "refuted-obligation");
}

#[test]
fn unreachable_solver_is_inconclusive() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sra(tmp.path(), &["verify-local", &corpus("robot.sra"), "--solver", "/nonexistent/solver"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn ground_writes_model_plan_and_lemmas() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("g");
    let o = sra(
        tmp.path(),
        &["ground", &corpus("robot-single.sra"), "--property", &corpus("prop.srainv"), "--discharge", "--out", out.to_str().unwrap()],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let grounded = std::fs::read_to_string(out.join("grounded.sra")).unwrap();
    assert!(grounded.contains("grounded leftSensor"));
    let plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("plan.json")).unwrap()).unwrap();
    assert_eq!(plan["entries"][0]["field"], "leftSensor");
    assert!(entries(&out.join("lemmas")).iter().any(|p| p.extension().is_some_and(|e| e == "smt2")));

    // The grounded model is itself a valid input.
    let o = sra(tmp.path(), &["check", out.join("grounded.sra").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oracles_run_from_the_command_line() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sra(tmp.path(), &["--json", "oracle", "contracts", &corpus("robot.sra"), "--samples", "100"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(serde_json::from_str::<serde_json::Value>(&stdout(&o)).is_ok());
    let o = sra(tmp.path(), &["oracle", "effects", &corpus("robot.sra"), "--samples", "20", "--effects", "20"]);
    assert_eq!(code(&o), 0);
    let o = sra(
        tmp.path(),
        &[
            "oracle",
            "reach",
            &corpus("robot-mutant.sra"),
            "--configs",
            "3",
            "--cycles",
            "1",
            "--invariant",
            &corpus("robot.srainv"),
            "--property",
            &corpus("prop.srainv"),
        ],
    );
    assert_eq!(code(&o), 1);
    let o = sra(tmp.path(), &["oracle", "grounding", &corpus("robot-single.sra"), "--configs", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(entries(tmp.path()).is_empty());
}
