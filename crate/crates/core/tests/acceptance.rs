//! Acceptance run: every criterion at its stated tolerance, one line each.
//! Built with `harness = false`; exits non-zero when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use rand::SeedableRng;
use sra_core::contract::GenOptions;
use sra_core::frontend::*;
use sra_core::grounding::{ground_model, plan, GroundOptions};
use sra_core::model::*;
use sra_core::oracles::*;
use sra_core::pipeline::{ground, global_tasks};
use sra_core::sim::{InputProvider, Monitor, OrderPolicy, SimRng, Simulator, StepLabel, TraceEntry, Verdict};
use sra_core::vcgen::{discharge, report, SolverConfig, VcVerdict, Verdict as VcReportVerdict};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, || format!("{what} took {elapsed:.2?}, limit {limit:?}"))
}

fn enum_at(s: &GlobalState, cfg: &Configuration, inst: &str, field: &str) -> String {
    match s.read(obj(cfg, inst), field) {
        Some(Value::Enum(v)) => v,
        other => format!("{other:?}"),
    }
}

fn bool_at(s: &GlobalState, cfg: &Configuration, inst: &str, field: &str) -> Option<bool> {
    s.read(obj(cfg, inst), field).and_then(|v| v.as_bool())
}

const SENSORS: [&str; 3] = ["sL", "sR1", "sR2"];

fn sweeps<'t>(entries: &'t [TraceEntry], phase: &str) -> Vec<&'t TraceEntry> {
    entries.iter().filter(|e| matches!(&e.label, StepLabel::SelfLoop { phase: p, .. } if p == phase)).collect()
}

fn scenario_run(order: &str) -> Result<(Model, Configuration, Vec<TraceEntry>), String> {
    let m = robot();
    let cfg = robot_config(&m);
    let inputs = InputProvider::from_json(&m, &cfg, &read("scenario.json")).map_err(|e| e.to_string())?;
    let order = OrderPolicy::parse(order).map_err(|e| e.to_string())?;
    let prop = Monitor { name: "prop".into(), formula: formula(&m, "prop.srainv") };
    let r = Simulator::new(&m, &cfg, order, inputs, 0).run(1, &[prop]).map_err(|e| e.to_string())?;
    ensure(r.verdict == Verdict::Pass, || format!("monitor verdict {:?}", r.verdict))?;
    Ok((m, cfg, r.trace.entries))
}

fn scenario_fidelity() -> Outcome {
    let t = Instant::now();
    let (_, cfg, entries) = scenario_run("fixed:c1,sL,sR1,sR2")?;
    let sense = sweeps(&entries, "Sense");
    let s = &sense.first().ok_or("no Sense sweep")?.state;
    let locs: Vec<String> = SENSORS.iter().map(|x| enum_at(s, &cfg, x, "location")).collect();
    ensure(locs == ["NoGo", "Go", "Go"], || format!("sensors after Sense: {locs:?}"))?;

    let act = sweeps(&entries, "Act");
    let s = &act.first().ok_or("no Act sweep")?.state;
    ensure(enum_at(s, &cfg, "c1", "location") == "Moving", || "controller not Moving after Act".into())?;
    ensure(enum_at(s, &cfg, "c1", "direction") == "Right", || "direction not Right after Act".into())?;
    for x in SENSORS {
        ensure(bool_at(s, &cfg, x, "processed") == Some(false), || format!("{x}.processed not consumed after Act"))?;
    }
    ensure(act.len() == 1, || format!("{} Act sweeps", act.len()))?;

    let reset = sweeps(&entries, "Reset");
    let s = &reset.first().ok_or("no Reset sweep")?.state;
    for x in SENSORS {
        ensure(enum_at(s, &cfg, x, "location") == "Ready", || format!("{x} not Ready after Reset"))?;
    }
    let end = &entries.last().ok_or("empty trace")?.state;
    ensure(end.phase == "End", || format!("run ends in {}", end.phase))?;
    ensure(enum_at(end, &cfg, "c1", "location") == "Idle", || "controller not Idle at End".into())?;
    ensure(enum_at(end, &cfg, "c1", "direction") == "Right", || "direction not Right at End".into())?;
    let el = t.elapsed();
    within(el, Duration::from_secs(1), "scenario")?;
    Ok(format!("all scenario facts match, {el:.2?}"))
}

fn parameterized_proof() -> Outcome {
    if !solver_available() {
        return Err("no SMT solver available".into());
    }
    let t = Instant::now();
    let m = robot();
    let tasks = global_tasks(&m, &formula(&m, "robot.srainv"), &formula(&m, "prop.srainv"), &gprime(&m), GenOptions::default())
        .map_err(|e| e.to_string())?;
    let results = discharge(&m, &tasks, &SolverConfig::default());
    let slowest = results.iter().map(|r| r.wall_ms).max().unwrap_or(0);
    let rep = report(results);
    ensure(rep.verdict == VcReportVerdict::Proven, || format!("verdict {}:\n{}", rep.verdict.label(), rep.to_text()))?;
    ensure(slowest < 60_000, || format!("slowest task {slowest} ms"))?;
    let el = t.elapsed();
    within(el, Duration::from_secs(600), "pipeline")?;
    Ok(format!("{} tasks Valid, slowest {slowest} ms, total {el:.2?}", rep.results.len()))
}

fn agreement() -> Outcome {
    let t = Instant::now();
    let m = robot();
    let (inv, prop) = (formula(&m, "robot.srainv"), formula(&m, "prop.srainv"));
    let mut rng = SimRng::seed_from_u64(2024);
    let mut states = 0;
    let configs = 20;
    for i in 0..configs {
        let cfg = random_config(&m, &ConfigGen::default(), &mut rng).map_err(|e| e.to_string())?;
        let r = bounded_reachability_check(&m, &cfg, &inv, &prop, ReachOptions::default()).map_err(|e| e.to_string())?;
        ensure(!r.truncated, || format!("config {i} truncated"))?;
        if let Some(v) = r.violation {
            return Err(format!("config {i}: {:?} {}", v.kind, v.detail));
        }
        states += r.states;
    }

    let mm = model("robot-mutant.sra");
    let cfg = robot_config(&mm);
    let monitor = Monitor { name: "prop".into(), formula: prop.clone() };
    let sim_found = (0..50u64).find(|&seed| {
        let mut sim = Simulator::new(&mm, &cfg, OrderPolicy::seeded(seed), InputProvider::random(seed), seed);
        matches!(sim.run(3, std::slice::from_ref(&monitor)), Ok(r) if matches!(r.verdict, Verdict::Violation { .. }))
    });
    let seed = sim_found.ok_or("simulator found no violation of the mutant in 50 seeds")?;
    if !solver_available() {
        return Err("no SMT solver available".into());
    }
    let tasks = global_tasks(&mm, &inv, &prop, &gprime(&mm), GenOptions::default()).map_err(|e| e.to_string())?;
    let invalid: Vec<String> = discharge(&mm, &tasks, &SolverConfig::default())
        .into_iter()
        .filter(|r| matches!(r.verdict, VcVerdict::Invalid { .. }))
        .map(|r| r.id)
        .collect();
    ensure(!invalid.is_empty(), || "no entailment task of the mutant is Invalid".into())?;
    Ok(format!(
        "{configs} configs, {states} states, no violation; mutant violates on seed {seed}, invalid: {}; {:.2?}",
        invalid.join(","),
        t.elapsed()
    ))
}

fn contract_oracle() -> Outcome {
    let t = Instant::now();
    let single = model("robot-single.sra");
    let grounded = ground_model(&single, &plan(&single), GroundOptions::default());
    let models = [
        ("robot", robot()),
        ("robot-single", single),
        ("robot-mutant", model("robot-mutant.sra")),
        ("robot-single grounded", grounded),
    ];
    let mut checks = 0;
    for (name, m) in &models {
        let r = contract_vs_simulator(m, &ContractOracleOptions { samples: 1000, ..ContractOracleOptions::default() })
            .map_err(|e| format!("{name}: {e}"))?;
        ensure(r.soundness_rate() == 1.0 && r.precision_rate() == 1.0 && r.all_sound() && r.all_precise(), || {
            format!("{name}:\n{}", r.to_text())
        })?;
        checks += r.checks.len();
    }
    let el = t.elapsed();
    within(el, Duration::from_secs(30), "contract oracle")?;
    Ok(format!("{} models, {checks} class/contract checks at 1000 samples, 100% sound and precise, {el:.2?}", models.len()))
}

fn effect_transformation() -> Outcome {
    let t = Instant::now();
    let models = [robot(), model("robot-single.sra"), model("robot-mutant.sra")];
    let refs: Vec<&Model> = models.iter().collect();
    let r = effect_oracle(&refs, 200, 4, 100, 11).map_err(|e| e.to_string())?;
    ensure(r.mismatches.is_empty(), || r.to_text())?;
    let corpus_effects: usize = models.iter().flat_map(|m| &m.classes).map(|c| c.transitions.len()).sum();
    ensure(r.effects >= corpus_effects + 200, || format!("only {} effects checked", r.effects))?;
    Ok(format!("{} effects x 100 samples, {} skipped, 0 mismatches, {:.2?}", r.effects, r.skipped, t.elapsed()))
}

fn grounding_equivalence() -> Outcome {
    let t = Instant::now();
    let m = model("robot-single.sra");
    let p = plan(&m);
    ensure(!p.is_empty(), || "empty grounding plan".into())?;
    let inv = formula(&m, "robot.srainv");
    let prop = formula(&m, "prop.srainv");
    let g = ground(&m, &p, GroundOptions::default(), Some(&inv), Some(&prop), Some(&gprime(&m))).map_err(|e| e.to_string())?;
    let cfg = robot_config(&m);
    let seeds: Vec<u64> = (0..20).collect();
    let cmp = trace_agreement(&m, &g.model, &cfg, &seeds, 3).map_err(|e| e.to_string())?;
    if let Some(c) = cmp.iter().find(|c| !c.identical) {
        return Err(format!("seed {} differs at line {:?}", c.seed, c.first_difference));
    }
    if !solver_available() {
        return Err("no SMT solver available".into());
    }
    let results = discharge(&g.model, &g.lemmas, &SolverConfig::default());
    for r in &results {
        ensure(r.verdict == VcVerdict::Valid, || format!("lemma {} is {}", r.id, r.verdict.label()))?;
        ensure(r.wall_ms < 10_000, || format!("lemma {} took {} ms", r.id, r.wall_ms))?;
    }
    let slowest = results.iter().map(|r| r.wall_ms).max().unwrap_or(0);
    Ok(format!("20/20 seeds identical, {} lemmas Valid, slowest {slowest} ms, {:.2?}", results.len(), t.elapsed()))
}

fn frontend_robustness() -> Outcome {
    let mut mutants = 0;
    let mut paths: Vec<_> = std::fs::read_dir(corpus("mutants")).map_err(|e| e.to_string())?.map(|e| e.unwrap().path()).collect();
    paths.sort();
    for path in paths {
        let src = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let want: Vec<&str> = src
            .lines()
            .find_map(|l| l.strip_prefix("// expect: "))
            .ok_or_else(|| format!("{} has no expect line", path.display()))?
            .split_whitespace()
            .collect();
        let got: Vec<&str> = match parse_model("mutant.sra", &src) {
            Ok(_) => vec![],
            Err(d) => d.codes().iter().map(|c| c.as_str()).collect(),
        };
        ensure(got == want, || format!("{}: expected {want:?}, got {got:?}", path.display()))?;
        mutants += 1;
    }
    ensure(mutants >= 10, || format!("only {mutants} mutants"))?;

    let mut files = 0;
    for name in ["robot.sra", "robot-single.sra", "robot-mutant.sra"] {
        let m = model(name);
        let printed = print_model(&m);
        let again = parse_model(name, &printed).map_err(|d| format!("{name}: {d}"))?.model;
        ensure(again == m && print_model(&again) == printed, || format!("{name} does not round-trip"))?;
        for f in ["robot.srainv", "prop.srainv"] {
            let e = formula(&m, f);
            let back = parse_invariant(f, &print_expr(&e), &m).map_err(|d| format!("{f}: {d}"))?;
            ensure(back == e, || format!("{f} does not round-trip over {name}"))?;
        }
        let cfg = robot_config(&m);
        let back = parse_configuration("c.sracfg", &print_configuration(&m, &cfg), &m).map_err(|d| d.to_string())?;
        ensure(back.config == cfg, || format!("robot.sracfg does not round-trip over {name}"))?;
        files += 1;
    }
    Ok(format!("{mutants} mutants rejected with expected codes, {files} models with specs and configuration round-trip"))
}

fn order_sensitivity() -> Outcome {
    let (_, cfg, entries) = scenario_run("fixed:c1,sL,sR1,sR2;Act=sL,sR1,sR2,c1")?;
    let act = sweeps(&entries, "Act");
    ensure(act.len() == 2, || format!("{} Act sweeps, expected 2", act.len()))?;
    let StepLabel::SelfLoop { fired, .. } = &act[0].label else { unreachable!() };
    for (inst, t) in fired {
        if SENSORS.contains(&inst.as_str()) {
            ensure(t.is_none(), || format!("{inst} fired {t:?} in the first Act sweep"))?;
        }
    }
    let first = &act[0].state;
    for x in SENSORS {
        ensure(bool_at(first, &cfg, x, "processed") == Some(true), || format!("{x}.processed not pending after the first Act sweep"))?;
    }
    let second = &act[1].state;
    for x in SENSORS {
        ensure(bool_at(second, &cfg, x, "processed") == Some(false), || format!("{x}.processed not consumed in the second Act sweep"))?;
    }
    let i = entries.iter().position(|e| std::ptr::eq(e, act[1])).unwrap();
    let next = &entries[i + 1].label;
    ensure(matches!(next, StepLabel::PhaseChange { from, to } if from == "Act" && to == "Reset"), || {
        format!("after the extra Act sweep: {next:?}")
    })?;
    Ok("sensors stutter, events persist, one extra Act sweep, then Act -> Reset".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("scenario fidelity", scenario_fidelity),
        ("parameterized proof", parameterized_proof),
        ("proof/exploration agreement", agreement),
        ("contract oracle", contract_oracle),
        ("effect transformation oracle", effect_transformation),
        ("grounding equivalence", grounding_equivalence),
        ("frontend robustness", frontend_robustness),
        ("order sensitivity", order_sensitivity),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || *f == n.to_string()) {
            continue;
        }
        match std::panic::catch_unwind(run) {
            Ok(Ok(detail)) => println!("criterion {n} {name}: PASS ({detail})"),
            Ok(Err(why)) => {
                failed += 1;
                println!("criterion {n} {name}: FAIL ({why})");
            }
            Err(_) => {
                failed += 1;
                println!("criterion {n} {name}: FAIL (panicked)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
