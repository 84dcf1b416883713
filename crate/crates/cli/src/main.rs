use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use sra_core::contract::{all_contracts, Contract};
use sra_core::frontend::{
    parse_configuration, parse_gprime, parse_invariant, parse_model, print_expr, print_model, Diagnostic, Diagnostics,
    LocalConditions, ParsedModel,
};
use sra_core::grounding::{plan, GroundOptions};
use sra_core::model::{Configuration, Expr, Model};
use sra_core::oracles::{
    bounded_reachability_check, contract_vs_simulator, effect_oracle, random_config, trace_agreement, ConfigGen,
    ContractOracleOptions, ReachOptions,
};
use sra_core::pipeline::{global_tasks, ground, local_tasks};
use sra_core::sim::{InputProvider, Monitor, OrderPolicy, SimRng, Simulator, Verdict as SimVerdict};
use sra_core::vcgen::{discharge, report, Report, SolverConfig, VerificationTask};

const EXIT_OK: u8 = 0;
const EXIT_VIOLATION: u8 = 1;
const EXIT_ERROR: u8 = 2;

const AFTER_HELP: &str = "\
Configurations: `simulate` runs one concrete configuration and therefore \
requires --config. `verify-global` proves the invariant for every \
configuration satisfying the model's constraints at once, so it takes no \
configuration (only `--config none` is accepted).

Exit codes: 0 success or Proven, 1 violation or invalid obligation, \
2 usage or internal error, 3 inconclusive (solver timeout or unknown).

The solver command defaults to `z3 -in` and can be set with SRA_SMT_CMD or --solver.";

#[derive(Parser)]
#[command(name = "sra", version, about = "Model, simulate and verify scheduler-restricted asynchronous systems", after_help = AFTER_HELP)]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolverArgs {
    /// Parallel solver processes (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Per-task timeout in seconds.
    #[arg(long, default_value_t = 60)]
    timeout: u64,
    /// Solver command line; overrides SRA_SMT_CMD.
    #[arg(long)]
    solver: Option<String>,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let mut cfg = match &self.solver {
            Some(cmd) => SolverConfig::with_command(cmd),
            None => SolverConfig::default(),
        };
        cfg.timeout = Duration::from_secs(self.timeout);
        if let Some(j) = self.jobs {
            cfg.jobs = j.max(1);
        }
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and type-check a model, optionally a configuration and formulas against it.
    Check {
        model: PathBuf,
        /// Also check a configuration and evaluate the constraints on it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also check global formula files.
        #[arg(long = "formula")]
        formulas: Vec<PathBuf>,
    },
    /// Run a model on one concrete configuration (required) and print the trace.
    Simulate {
        model: PathBuf,
        /// Configuration file; simulation always needs a concrete configuration.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        cycles: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `seeded:N`, `declaration`, `fixed:a,b,c` or `fixed:Phase=a,b;Other=b,a` (default: seeded by --seed).
        #[arg(long)]
        order: Option<String>,
        /// JSON input script, one object per cycle (default: random inputs seeded by --seed).
        #[arg(long)]
        inputs: Option<PathBuf>,
        /// Formula files checked at every final-phase state.
        #[arg(long = "monitor")]
        monitors: Vec<PathBuf>,
        /// Run even if the configuration violates a constraint.
        #[arg(long)]
        ignore_constraints: bool,
        /// Write the trace here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the generated init, exec and tick contracts.
    Contracts {
        model: PathBuf,
        /// Only contracts of this class.
        #[arg(long)]
        class: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ground unit set fields and emit the grounded model and equivalence lemmas.
    Ground {
        model: PathBuf,
        /// Restrict grounding to these `Class.set` fields (default: every groundable set).
        #[arg(long = "set")]
        sets: Vec<String>,
        #[arg(long)]
        invariant: Option<PathBuf>,
        #[arg(long)]
        property: Option<PathBuf>,
        #[arg(long)]
        gprime: Option<PathBuf>,
        /// Also discharge the lemmas.
        #[arg(long)]
        discharge: bool,
        /// Directory receiving `grounded.sra`, `plan.json` and one `.smt2` per lemma.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check every transition against its generated contract.
    VerifyLocal {
        model: PathBuf,
        /// Directory receiving one `.smt2` file per task and the report.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Prove invariant and property for all configurations; takes no configuration.
    VerifyGlobal {
        model: PathBuf,
        #[arg(long)]
        invariant: PathBuf,
        #[arg(long)]
        property: PathBuf,
        /// Local conditions per phase (default: `!executed`).
        #[arg(long)]
        gprime: Option<PathBuf>,
        /// Must be `none`: the result covers every configuration.
        #[arg(long, value_name = "none")]
        config: Option<String>,
        /// Ground unit sets first and verify the grounded model plus the equivalence lemmas.
        #[arg(long)]
        ground: bool,
        /// Also check transitions against their contracts.
        #[arg(long)]
        with_local: bool,
        /// Directory receiving one `.smt2` file per task and the report.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run a differential-testing harness.
    Oracle {
        #[arg(value_enum)]
        harness: Harness,
        model: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random configurations (reach, grounding).
        #[arg(long, default_value_t = 20)]
        configs: usize,
        #[arg(long, default_value_t = 3)]
        cycles: usize,
        /// Largest number of instances per class in random configurations.
        #[arg(long, default_value_t = 4)]
        max_instances: usize,
        /// Random effects (effects).
        #[arg(long, default_value_t = 200)]
        effects: usize,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Invariant checked by `reach`.
        #[arg(long)]
        invariant: Option<PathBuf>,
        /// Property checked by `reach`.
        #[arg(long)]
        property: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Harness {
    /// Contracts against concrete local steps.
    Contracts,
    /// Symbolic maps of effects against concrete execution.
    Effects,
    /// Bounded exhaustive reachability on random configurations.
    Reach,
    /// Original against grounded traces.
    Grounding,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Diagnostics(Diagnostics),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Internal(String),
}

impl From<Diagnostics> for CliError {
    fn from(d: Diagnostics) -> Self {
        CliError::Diagnostics(d)
    }
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

type CliResult = Result<u8, CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_model(path: &Path) -> Result<ParsedModel, CliError> {
    Ok(parse_model(&path.display().to_string(), &read(path)?)?)
}

fn load_formula(path: &Path, model: &Model) -> Result<Expr, CliError> {
    Ok(parse_invariant(&path.display().to_string(), &read(path)?, model)?)
}

fn load_gprime(path: Option<&PathBuf>, model: &Model) -> Result<LocalConditions, CliError> {
    match path {
        Some(p) => Ok(parse_gprime(&p.display().to_string(), &read(p)?, model)?),
        None => Ok(LocalConditions::default()),
    }
}

fn load_config(path: &Path, model: &Model, ignore_constraints: bool) -> Result<Configuration, CliError> {
    let parsed = parse_configuration(&path.display().to_string(), &read(path)?, model)?;
    let failed: Vec<&str> = parsed.constraints.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.as_str()).collect();
    if !failed.is_empty() && !ignore_constraints {
        return Err(CliError::Usage(format!(
            "{}: configuration violates constraint(s) {}",
            path.display(),
            failed.join(", ")
        )));
    }
    Ok(parsed.config)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

/// Prints `text`, or `value` under --json, to --out or standard output.
fn emit(json_mode: bool, out: Option<&Path>, text: &str, value: &Json) -> Result<(), CliError> {
    let body = if json_mode { format!("{}\n", serde_json::to_string_pretty(value).expect("json")) } else { text.to_string() };
    match out {
        Some(p) => write(p, &body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn diag_json(d: &[Diagnostic]) -> Json {
    serde_json::to_value(d).expect("diagnostics serialize")
}

fn cmd_check(cli: &Cli, model: &Path, config: Option<&Path>, formulas: &[PathBuf]) -> CliResult {
    let pm = match load_model(model) {
        Ok(pm) => pm,
        Err(CliError::Diagnostics(d)) => {
            if cli.json {
                println!("{}", json!({"ok": false, "diagnostics": diag_json(&d.0)}));
            } else {
                eprintln!("{d}");
            }
            return Ok(EXIT_VIOLATION);
        }
        Err(e) => return Err(e),
    };
    let m = &pm.model;
    for f in formulas {
        load_formula(f, m)?;
    }
    let mut constraints = Vec::new();
    if let Some(c) = config {
        let parsed = parse_configuration(&c.display().to_string(), &read(c)?, m)?;
        constraints = parsed.constraints;
    }
    let ok = constraints.iter().all(|(_, b)| *b);
    if cli.json {
        let cs: Vec<Json> = constraints.iter().map(|(n, b)| json!({"name": n, "holds": b})).collect();
        println!(
            "{}",
            json!({"ok": ok, "classes": m.classes.len(), "phases": m.scheduler.phases.len(),
                   "warnings": diag_json(&pm.warnings), "constraints": cs})
        );
    } else {
        for w in &pm.warnings {
            eprintln!("{w}");
        }
        for (n, b) in &constraints {
            println!("constraint {n}: {}", if *b { "holds" } else { "violated" });
        }
        println!(
            "{}: {} classes, {} phases, {} scheduler transitions{}",
            model.display(),
            m.classes.len(),
            m.scheduler.phases.len(),
            m.scheduler.transitions.len(),
            if ok { "" } else { "; configuration violates the constraints" }
        );
    }
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    cli: &Cli,
    model: &Path,
    config: &Path,
    cycles: usize,
    seed: u64,
    order: Option<&str>,
    inputs: Option<&Path>,
    monitors: &[PathBuf],
    ignore_constraints: bool,
    out: Option<&Path>,
) -> CliResult {
    let pm = load_model(model)?;
    let m = &pm.model;
    let cfg = load_config(config, m, ignore_constraints)?;
    let order = match order {
        Some(spec) => OrderPolicy::parse(spec).map_err(|e| CliError::Usage(e.to_string()))?,
        None => OrderPolicy::seeded(seed),
    };
    order.validate(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    let inputs = match inputs {
        Some(p) => InputProvider::from_json(m, &cfg, &read(p)?).map_err(|e| CliError::Usage(e.to_string()))?,
        None => InputProvider::random(seed),
    };
    let mut mons = Vec::new();
    for p in monitors {
        mons.push(Monitor { name: stem(p), formula: load_formula(p, m)? });
    }
    let result = Simulator::new(m, &cfg, order, inputs, seed).run(cycles, &mons).map_err(internal)?;
    let jsonl = result.trace.to_jsonl(&cfg);
    let (code, verdict) = match &result.verdict {
        SimVerdict::Pass => (EXIT_OK, json!({"verdict": "pass"})),
        SimVerdict::Violation { monitor, step, cycle } => {
            (EXIT_VIOLATION, json!({"verdict": "violation", "monitor": monitor, "step": step, "cycle": cycle}))
        }
    };
    if cli.json {
        let trace: Vec<Json> = jsonl.lines().map(|l| serde_json::from_str(l).expect("trace line is json")).collect();
        let mut v = verdict;
        v["trace"] = Json::Array(trace);
        emit(true, out, "", &v)?;
    } else {
        emit(false, out, &jsonl, &Json::Null)?;
        match &result.verdict {
            SimVerdict::Pass => eprintln!("{} steps, no monitor violated", result.trace.entries.len()),
            SimVerdict::Violation { monitor, step, cycle } => {
                eprintln!("monitor `{monitor}` violated at step {step} (cycle {cycle})")
            }
        }
    }
    Ok(code)
}

fn contract_json(c: &Contract) -> Json {
    let disjuncts: Vec<Json> =
        c.disjuncts.iter().map(|d| json!({"transition": d.transition, "formula": print_expr(&d.formula)})).collect();
    json!({"class": c.class, "kind": c.kind.to_string(), "formula": print_expr(&c.formula), "disjuncts": disjuncts})
}

fn cmd_contracts(cli: &Cli, model: &Path, class: Option<&str>, out: Option<&Path>) -> CliResult {
    let pm = load_model(model)?;
    if let Some(c) = class {
        if pm.model.class(c).is_none() {
            return Err(CliError::Usage(format!("unknown class `{c}`")));
        }
    }
    let contracts: Vec<Contract> =
        all_contracts(&pm.model).map_err(internal)?.into_iter().filter(|c| class.is_none_or(|k| c.class == k)).collect();
    let text: String = contracts.iter().map(|c| c.render() + "\n").collect();
    let value = Json::Array(contracts.iter().map(contract_json).collect());
    emit(cli.json, out, &text, &value)?;
    Ok(EXIT_OK)
}

fn dump_tasks(dir: &Path, tasks: &[VerificationTask]) -> Result<(), CliError> {
    for t in tasks {
        write(&dir.join(format!("{}.smt2", t.id)), &t.smt)?;
    }
    Ok(())
}

fn run_tasks(model: &Model, tasks: &[VerificationTask], solver: &SolverArgs, out: Option<&Path>) -> Result<Report, CliError> {
    if let Some(dir) = out {
        dump_tasks(dir, tasks)?;
    }
    let r = report(discharge(model, tasks, &solver.config()));
    if let Some(dir) = out {
        write(&dir.join("report.txt"), &r.to_text())?;
        write(&dir.join("report.json"), &r.to_json())?;
    }
    Ok(r)
}

fn print_report(cli: &Cli, r: &Report) {
    if cli.json {
        println!("{}", r.to_json());
    } else {
        print!("{}", r.to_text());
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_ground(
    cli: &Cli,
    model: &Path,
    sets: &[String],
    invariant: Option<&Path>,
    property: Option<&Path>,
    gprime: Option<&PathBuf>,
    do_discharge: bool,
    out: Option<&Path>,
    solver: &SolverArgs,
) -> CliResult {
    let pm = load_model(model)?;
    let m = &pm.model;
    let mut p = plan(m);
    if !sets.is_empty() {
        p = p.restrict(m, sets).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let inv = invariant.map(|f| load_formula(f, m)).transpose()?;
    let prop = property.map(|f| load_formula(f, m)).transpose()?;
    let gp = gprime.map(|_| load_gprime(gprime, m)).transpose()?;
    let g = ground(m, &p, GroundOptions::default(), inv.as_ref(), prop.as_ref(), gp.as_ref()).map_err(internal)?;
    let grounded_src = print_model(&g.model);
    let plan_json = serde_json::to_value(&p).expect("plan serializes");
    if let Some(dir) = out {
        write(&dir.join("grounded.sra"), &grounded_src)?;
        write(&dir.join("plan.json"), &serde_json::to_string_pretty(&plan_json).expect("json"))?;
        dump_tasks(&dir.join("lemmas"), &g.lemmas)?;
    }
    let r = if do_discharge { Some(report(discharge(&g.model, &g.lemmas, &solver.config()))) } else { None };
    if cli.json {
        let lemmas: Vec<&str> = g.lemmas.iter().map(|t| t.id.as_str()).collect();
        let mut v = json!({"plan": plan_json, "grounded_model": grounded_src, "lemmas": lemmas});
        if let Some(r) = &r {
            v["report"] = serde_json::from_str(&r.to_json()).expect("report json");
        }
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        for e in &p.entries {
            let kind = if e.nullable { "nullable" } else { "non-null" };
            println!("// ground {}.{} -> {} : {} ({kind}, by {})", e.class, e.set, e.field, e.elem, e.constraint);
        }
        if p.is_empty() {
            println!("// nothing to ground");
        }
        if out.is_none() {
            println!("{grounded_src}");
            for t in &g.lemmas {
                print!("{}", t.render());
            }
        }
        if let Some(r) = &r {
            print!("{}", r.to_text());
        }
    }
    Ok(r.map(|r| r.verdict.exit_code() as u8).unwrap_or(EXIT_OK))
}

fn cmd_verify_local(cli: &Cli, model: &Path, out: Option<&Path>, solver: &SolverArgs) -> CliResult {
    let pm = load_model(model)?;
    let tasks = local_tasks(&pm.model, Default::default()).map_err(internal)?;
    let r = run_tasks(&pm.model, &tasks, solver, out)?;
    print_report(cli, &r);
    Ok(r.verdict.exit_code() as u8)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify_global(
    cli: &Cli,
    model: &Path,
    invariant: &Path,
    property: &Path,
    gprime: Option<&PathBuf>,
    config: Option<&str>,
    do_ground: bool,
    with_local: bool,
    out: Option<&Path>,
    solver: &SolverArgs,
) -> CliResult {
    if let Some(c) = config {
        if c != "none" {
            return Err(CliError::Usage(format!(
                "verify-global covers every configuration satisfying the constraints and takes none; \
                 got --config {c} (use `--config none` or omit it, and `simulate` for a concrete configuration)"
            )));
        }
    }
    let pm = load_model(model)?;
    let m = &pm.model;
    let inv = load_formula(invariant, m)?;
    let prop = load_formula(property, m)?;
    let gp = load_gprime(gprime, m)?;
    let (target, mut tasks) = if do_ground {
        let g = ground(m, &plan(m), GroundOptions::default(), Some(&inv), Some(&prop), gprime.map(|_| &gp)).map_err(internal)?;
        let (ginv, gprop) = (g.invariant.expect("grounded invariant"), g.property.expect("grounded property"));
        let mut tasks = g.lemmas;
        tasks.extend(global_tasks(&g.model, &ginv, &gprop, &gp, Default::default()).map_err(internal)?);
        (g.model, tasks)
    } else {
        (m.clone(), global_tasks(m, &inv, &prop, &gp, Default::default()).map_err(internal)?)
    };
    if with_local {
        tasks.extend(local_tasks(&target, Default::default()).map_err(internal)?);
    }
    let r = run_tasks(&target, &tasks, solver, out)?;
    print_report(cli, &r);
    Ok(r.verdict.exit_code() as u8)
}

struct OracleArgs<'a> {
    samples: usize,
    seed: u64,
    configs: usize,
    cycles: usize,
    max_instances: usize,
    effects: usize,
    depth: usize,
    invariant: Option<&'a Path>,
    property: Option<&'a Path>,
}

fn random_configs(m: &Model, a: &OracleArgs) -> Result<Vec<Configuration>, CliError> {
    use rand::SeedableRng;
    let mut rng = SimRng::seed_from_u64(a.seed);
    let gen = ConfigGen { max_instances: a.max_instances, ..ConfigGen::default() };
    (0..a.configs).map(|_| random_config(m, &gen, &mut rng).map_err(internal)).collect()
}

fn cmd_oracle(cli: &Cli, harness: Harness, model: &Path, a: &OracleArgs) -> CliResult {
    let pm = load_model(model)?;
    let m = &pm.model;
    let (ok, text, value) = match harness {
        Harness::Contracts => {
            let opts = ContractOracleOptions { samples: a.samples, seed: a.seed, ..Default::default() };
            let r = contract_vs_simulator(m, &opts).map_err(internal)?;
            (r.all_sound() && r.all_precise(), r.to_text(), serde_json::to_value(&r).expect("json"))
        }
        Harness::Effects => {
            let r = effect_oracle(&[m], a.effects, a.depth, a.samples.clamp(1, 100), a.seed).map_err(internal)?;
            (r.mismatches.is_empty(), r.to_text(), serde_json::to_value(&r).expect("json"))
        }
        Harness::Reach => {
            let (Some(i), Some(p)) = (a.invariant, a.property) else {
                return Err(CliError::Usage("the reach harness needs --invariant and --property".into()));
            };
            let inv = load_formula(i, m)?;
            let prop = load_formula(p, m)?;
            let opts = ReachOptions { cycles: a.cycles, seed: a.seed, ..Default::default() };
            let mut text = String::new();
            let mut runs = Vec::new();
            let mut ok = true;
            for (k, cfg) in random_configs(m, a)?.iter().enumerate() {
                let r = bounded_reachability_check(m, cfg, &inv, &prop, opts).map_err(internal)?;
                text.push_str(&format!("config {k}: {} instances, {} states", cfg.total(), r.states));
                if let Some(v) = &r.violation {
                    ok = false;
                    text.push_str(&format!(", {:?}: {}\n", v.kind, v.detail));
                    for s in &v.trace {
                        text.push_str(&format!("  {}: {}\n", s.label, s.state));
                    }
                } else {
                    text.push_str(", no violation\n");
                }
                runs.push(json!({"config": k, "instances": cfg.total(), "report": r}));
            }
            (ok, text, Json::Array(runs))
        }
        Harness::Grounding => {
            let p = plan(m);
            let g = ground(m, &p, GroundOptions::default(), None, None, None).map_err(internal)?;
            let mut text = String::new();
            let mut runs = Vec::new();
            let mut ok = true;
            for (k, cfg) in random_configs(m, a)?.iter().enumerate() {
                let seeds: Vec<u64> = (0..a.samples.min(20) as u64).map(|s| a.seed + s).collect();
                let cmp = trace_agreement(m, &g.model, cfg, &seeds, a.cycles).map_err(internal)?;
                let same = cmp.iter().filter(|c| c.identical).count();
                ok &= same == cmp.len();
                text.push_str(&format!("config {k}: {same}/{} seeds trace-identical\n", cmp.len()));
                runs.push(json!({"config": k, "comparisons": cmp}));
            }
            (ok, text, Json::Array(runs))
        }
    };
    let value = json!({"ok": ok, "result": value});
    emit(cli.json, None, &text, &value)?;
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Check { model, config, formulas } => cmd_check(cli, model, config.as_deref(), formulas),
        Command::Simulate { model, config, cycles, seed, order, inputs, monitors, ignore_constraints, out } => cmd_simulate(
            cli,
            model,
            config,
            *cycles,
            *seed,
            order.as_deref(),
            inputs.as_deref(),
            monitors,
            *ignore_constraints,
            out.as_deref(),
        ),
        Command::Contracts { model, class, out } => cmd_contracts(cli, model, class.as_deref(), out.as_deref()),
        Command::Ground { model, sets, invariant, property, gprime, discharge, out, solver } => cmd_ground(
            cli,
            model,
            sets,
            invariant.as_deref(),
            property.as_deref(),
            gprime.as_ref(),
            *discharge,
            out.as_deref(),
            solver,
        ),
        Command::VerifyLocal { model, out, solver } => cmd_verify_local(cli, model, out.as_deref(), solver),
        Command::VerifyGlobal { model, invariant, property, gprime, config, ground, with_local, out, solver } => {
            cmd_verify_global(
                cli,
                model,
                invariant,
                property,
                gprime.as_ref(),
                config.as_deref(),
                *ground,
                *with_local,
                out.as_deref(),
                solver,
            )
        }
        Command::Oracle {
            harness,
            model,
            samples,
            seed,
            configs,
            cycles,
            max_instances,
            effects,
            depth,
            invariant,
            property,
        } => {
            let a = OracleArgs {
                samples: *samples,
                seed: *seed,
                configs: *configs,
                cycles: *cycles,
                max_instances: *max_instances,
                effects: *effects,
                depth: *depth,
                invariant: invariant.as_deref(),
                property: property.as_deref(),
            };
            cmd_oracle(cli, *harness, model, &a)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if cli.json {
                let v = match &e {
                    CliError::Diagnostics(d) => json!({"error": "diagnostics", "diagnostics": diag_json(&d.0)}),
                    other => json!({"error": other.to_string()}),
                };
                println!("{v}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(EXIT_ERROR)
        }
    }
}
