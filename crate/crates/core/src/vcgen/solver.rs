//! Discharging tasks with an external SMT-LIB solver process.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::sexp::{parse_all, Sexp};
use super::smt::{all_pred, immutable_fn, null_const, phase_const, state_fn, var_sym};
use super::{TaskKind, VerificationTask};
use crate::model::*;

/// Environment variable overriding the solver command.
pub const SOLVER_ENV: &str = "SRA_SMT_CMD";

/// Largest universe per class for which a structured counter-model is built.
const MAX_UNIVERSE: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolverConfig {
    /// Program and arguments; the script is written to standard input.
    pub command: Vec<String>,
    pub timeout: Duration,
    pub jobs: usize,
    /// Also extract a counter-model for invalid tasks.
    pub models: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let cmd = std::env::var(SOLVER_ENV).unwrap_or_else(|_| "z3 -in".to_string());
        SolverConfig::with_command(&cmd)
    }
}

impl SolverConfig {
    pub fn with_command(cmd: &str) -> Self {
        SolverConfig {
            command: cmd.split_whitespace().map(str::to_string).collect(),
            timeout: Duration::from_secs(60),
            jobs: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            models: true,
        }
    }

    pub fn command_line(&self) -> String {
        self.command.join(" ")
    }
}

/// One object of a counter-model with the values of its members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelObject {
    pub name: String,
    pub class: String,
    /// Whether the object is part of the configuration (`All_C`).
    pub present: bool,
    pub params: BTreeMap<String, String>,
    pub sets: BTreeMap<String, Vec<String>>,
    pub pre: BTreeMap<String, String>,
    pub post: BTreeMap<String, String>,
}

/// A candidate configuration with pre and post states refuting a task.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CounterModel {
    pub objects: Vec<ModelObject>,
    pub phase_pre: Option<String>,
    pub phase_post: Option<String>,
    /// Task constants and the objects they denote.
    pub constants: BTreeMap<String, String>,
    /// Raw solver model when no structured view could be built.
    pub raw: Option<String>,
}

impl CounterModel {
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(raw) = &self.raw {
            let _ = writeln!(out, "{raw}");
            return out;
        }
        for (c, o) in &self.constants {
            let _ = writeln!(out, "  {c} = {o}");
        }
        if let (Some(a), Some(b)) = (&self.phase_pre, &self.phase_post) {
            let _ = writeln!(out, "  phase: {a} -> {b}");
        }
        for o in self.objects.iter().filter(|o| o.present) {
            let _ = writeln!(out, "  {} : {}", o.name, o.class);
            for (k, v) in &o.params {
                let _ = writeln!(out, "    {k} = {v}");
            }
            for (k, v) in &o.sets {
                let _ = writeln!(out, "    {k} = {{{}}}", v.join(", "));
            }
            for (k, v) in &o.pre {
                let post = o.post.get(k).map(String::as_str).unwrap_or("?");
                if post == v {
                    let _ = writeln!(out, "    {k} = {v}");
                } else {
                    let _ = writeln!(out, "    {k} = {v} -> {post}");
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum VcVerdict {
    Valid,
    Invalid { model: Option<CounterModel> },
    Unknown { reason: String },
    Timeout,
}

impl VcVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            VcVerdict::Valid => "valid",
            VcVerdict::Invalid { .. } => "invalid",
            VcVerdict::Unknown { .. } => "unknown",
            VcVerdict::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VcResult {
    pub id: String,
    pub kind: TaskKind,
    #[serde(flatten)]
    pub verdict: VcVerdict,
    pub wall_ms: u128,
    /// Solver resource count, when reported.
    pub steps: Option<u64>,
    pub solver: String,
}

enum RunOutcome {
    Done { stdout: String, stderr: String },
    TimedOut,
    Failed(String),
}

fn run_solver(cfg: &SolverConfig, script: &str) -> RunOutcome {
    let Some((prog, args)) = cfg.command.split_first() else {
        return RunOutcome::Failed("empty solver command".into());
    };
    let mut child = match Command::new(prog)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return RunOutcome::Failed(format!("cannot start `{}`: {e}", cfg.command_line())),
    };
    let mut stdin = child.stdin.take().expect("piped stdin");
    let script = script.to_string();
    let writer = std::thread::spawn(move || {
        let _ = stdin.write_all(script.as_bytes());
    });
    let mut out_pipe = child.stdout.take().expect("piped stdout");
    let mut err_pipe = child.stderr.take().expect("piped stderr");
    let out_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = out_pipe.read_to_string(&mut s);
        s
    });
    let err_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = err_pipe.read_to_string(&mut s);
        s
    });
    let start = Instant::now();
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) if start.elapsed() >= cfg.timeout => {
                let _ = child.kill();
                let _ = child.wait();
                let _ = writer.join();
                return RunOutcome::TimedOut;
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(2)),
            Err(e) => return RunOutcome::Failed(e.to_string()),
        }
    }
    let _ = writer.join();
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();
    RunOutcome::Done { stdout, stderr }
}

fn rlimit(items: &[Sexp]) -> Option<u64> {
    for it in items {
        if let Some(l) = it.list() {
            for w in l.windows(2) {
                if w[0].atom() == Some(":rlimit-count") {
                    return w[1].atom().and_then(|a| a.parse().ok());
                }
            }
        }
    }
    None
}

/// Per-sort universe sizes of a model, read from the `S!val!N` element
/// declarations or, in older solver versions, the `;; universe for S:` comments.
fn universe_sizes(model_sexp: Option<&Sexp>, stdout: &str) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for item in model_sexp.and_then(Sexp::list).unwrap_or(&[]) {
        if let Some([Sexp::Atom(d), Sexp::Atom(name), Sexp::List(args), Sexp::Atom(sort)]) =
            item.list()
        {
            if d == "declare-fun" && args.is_empty() && name.contains("!val!") {
                *out.entry(sort.clone()).or_insert(0) += 1;
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    let mut lines = stdout.lines().peekable();
    while let Some(l) = lines.next() {
        if let Some(rest) = l.trim().strip_prefix(";; universe for ") {
            let sort = rest.trim_end_matches(':').trim().to_string();
            let n = lines
                .peek()
                .map(|x| x.trim_start_matches(";;").split_whitespace().count())
                .unwrap_or(1);
            out.insert(sort, n.max(1));
        }
    }
    out
}

fn value_text(s: &Sexp) -> String {
    match s {
        Sexp::Atom(a) => a
            .rsplit_once('.')
            .filter(|_| !a.starts_with("cm."))
            .map(|(_, v)| v.to_string())
            .unwrap_or_else(|| a.clone()),
        Sexp::List(v) => match v.as_slice() {
            [Sexp::Atom(m), Sexp::Atom(n)] if m == "-" => format!("-{n}"),
            [Sexp::Atom(a), n] if a == "Active" => format!("timer({})", value_text(n)),
            _ => s.to_string(),
        },
    }
}

fn obj_name(class: &str, i: usize) -> String {
    format!("cm.{class}.{i}")
}

fn obj_queries(term: &str, class: &str, sizes: &BTreeMap<String, usize>) -> Vec<String> {
    let mut out = vec![format!("(= {term} {})", null_const(class))];
    for j in 0..sizes.get(class).copied().unwrap_or(1) {
        out.push(format!("(= {term} {})", obj_name(class, j)));
    }
    out
}

/// Second solver pass: pins each sort to named objects and reads every symbol.
fn structured_model(
    model: &Model,
    task: &VerificationTask,
    cfg: &SolverConfig,
    sizes: &BTreeMap<String, usize>,
) -> Option<CounterModel> {
    // Solver models often carry junk elements; try a universe no larger
    // than the cap, falling back to the raw model if that is unsatisfiable.
    let sizes: BTreeMap<String, usize> = sizes
        .iter()
        .map(|(k, v)| (k.clone(), (*v).min(MAX_UNIVERSE)))
        .collect();
    let sizes = &sizes;
    let mut script = task.smt.clone();
    let mut queries: Vec<String> = Vec::new();
    for c in &model.classes {
        let n = sizes.get(&c.name).copied().unwrap_or(1);
        let names: Vec<String> = (0..n).map(|i| obj_name(&c.name, i)).collect();
        for x in &names {
            let _ = writeln!(script, "(declare-const {x} {})", c.name);
        }
        if n > 1 {
            let _ = writeln!(script, "(assert (distinct {}))", names.join(" "));
        }
        let eqs: Vec<String> = names.iter().map(|x| format!("(= o {x})")).collect();
        let _ = writeln!(
            script,
            "(assert (forall ((o {})) (or false {})))",
            c.name,
            eqs.join(" ")
        );
    }
    script.push_str("(check-sat)\n");
    for c in &model.classes {
        let n = sizes.get(&c.name).copied().unwrap_or(1);
        for i in 0..n {
            let o = obj_name(&c.name, i);
            queries.push(format!("({} {o})", all_pred(&c.name)));
            for p in &c.params {
                queries.push(format!("({} {o})", immutable_fn(&c.name, &p.name)));
            }
            for g in &c.grounded {
                queries.extend(obj_queries(
                    &format!("({} {o})", immutable_fn(&c.name, &g.name)),
                    &g.class,
                    sizes,
                ));
            }
            for s in &c.sets {
                for j in 0..sizes.get(&s.elem).copied().unwrap_or(1) {
                    queries.push(format!(
                        "({} {o} {})",
                        immutable_fn(&c.name, &s.name),
                        obj_name(&s.elem, j)
                    ));
                }
            }
            for f in c.mutable_names() {
                for v in [Vintage::Pre, Vintage::Post] {
                    queries.push(format!("({} {o})", state_fn(&c.name, f, v)));
                }
            }
        }
    }
    queries.push(phase_const(Vintage::Pre).to_string());
    queries.push(phase_const(Vintage::Post).to_string());
    for (k, class) in &task.consts {
        queries.extend(obj_queries(&var_sym(k), class, sizes));
    }
    let _ = writeln!(script, "(get-value ({}))", queries.join(" "));
    let RunOutcome::Done { stdout, .. } = run_solver(cfg, &script) else {
        return None;
    };
    let items = parse_all(&stdout).ok()?;
    // The script checks twice: once as encoded, once with the pinned universe.
    if items.iter().filter_map(Sexp::atom).any(|a| a != "sat") {
        return None;
    }
    let mut values: BTreeMap<String, Sexp> = BTreeMap::new();
    for pair in items.iter().rev().find_map(Sexp::list)? {
        if let [k, v] = pair.list()? {
            values.insert(k.to_string(), v.clone());
        }
    }
    let get = |q: String| values.get(&q).map(value_text);
    // Object-valued terms are read back by equality with the pinned objects.
    let resolve = |term: &str, class: &str| -> Option<String> {
        if get(format!("(= {term} {})", null_const(class))).as_deref() == Some("true") {
            return Some("null".into());
        }
        (0..sizes.get(class).copied().unwrap_or(1))
            .find(|j| get(format!("(= {term} {})", obj_name(class, *j))).as_deref() == Some("true"))
            .map(|j| format!("{}{j}", class.to_lowercase()))
    };
    let mut cm = CounterModel::default();
    for c in &model.classes {
        for i in 0..sizes.get(&c.name).copied().unwrap_or(1) {
            let o = obj_name(&c.name, i);
            let mut obj = ModelObject {
                name: format!("{}{i}", c.name.to_lowercase()),
                class: c.name.clone(),
                present: get(format!("({} {o})", all_pred(&c.name))).as_deref() == Some("true"),
                params: BTreeMap::new(),
                sets: BTreeMap::new(),
                pre: BTreeMap::new(),
                post: BTreeMap::new(),
            };
            for p in &c.params {
                if let Some(v) = get(format!("({} {o})", immutable_fn(&c.name, &p.name))) {
                    obj.params.insert(p.name.clone(), v);
                }
            }
            for g in &c.grounded {
                if let Some(v) = resolve(
                    &format!("({} {o})", immutable_fn(&c.name, &g.name)),
                    &g.class,
                ) {
                    obj.params.insert(g.name.clone(), v);
                }
            }
            for s in &c.sets {
                let mut members = Vec::new();
                for j in 0..sizes.get(&s.elem).copied().unwrap_or(1) {
                    let q = format!(
                        "({} {o} {})",
                        immutable_fn(&c.name, &s.name),
                        obj_name(&s.elem, j)
                    );
                    if get(q).as_deref() == Some("true") {
                        members.push(format!("{}{j}", s.elem.to_lowercase()));
                    }
                }
                obj.sets.insert(s.name.clone(), members);
            }
            for f in c.mutable_names() {
                if let Some(v) = get(format!("({} {o})", state_fn(&c.name, f, Vintage::Pre))) {
                    obj.pre.insert(f.to_string(), v);
                }
                if let Some(v) = get(format!("({} {o})", state_fn(&c.name, f, Vintage::Post))) {
                    obj.post.insert(f.to_string(), v);
                }
            }
            cm.objects.push(obj);
        }
    }
    cm.phase_pre = get(phase_const(Vintage::Pre).to_string());
    cm.phase_post = get(phase_const(Vintage::Post).to_string());
    for (k, class) in &task.consts {
        if let Some(v) = resolve(&var_sym(k), class) {
            cm.constants.insert(k.clone(), v);
        }
    }
    Some(cm)
}

/// Discharges one encoded task.
pub fn discharge_one(model: &Model, task: &VerificationTask, cfg: &SolverConfig) -> VcResult {
    let start = Instant::now();
    let mut script = task.smt.clone();
    if cfg.models {
        script.push_str("(get-model)\n");
    }
    script.push_str("(get-info :all-statistics)\n");
    let (verdict, steps) = match run_solver(cfg, &script) {
        RunOutcome::TimedOut => (VcVerdict::Timeout, None),
        RunOutcome::Failed(e) => (VcVerdict::Unknown { reason: e }, None),
        RunOutcome::Done { stdout, stderr } => match parse_all(&stdout) {
            Err(e) => (
                VcVerdict::Unknown {
                    reason: format!("{e}: {}{}", stdout.trim(), stderr.trim()),
                },
                None,
            ),
            Ok(items) => {
                let steps = rlimit(&items);
                match items.first().and_then(Sexp::atom) {
                    Some("unsat") => (VcVerdict::Valid, steps),
                    Some("sat") => {
                        let model_cm = if cfg.models {
                            let sizes = universe_sizes(items.get(1), &stdout);
                            structured_model(model, task, cfg, &sizes).or_else(|| {
                                items.get(1).map(|m| CounterModel {
                                    raw: Some(m.to_string()),
                                    ..Default::default()
                                })
                            })
                        } else {
                            None
                        };
                        (VcVerdict::Invalid { model: model_cm }, steps)
                    }
                    Some("unknown") => (
                        VcVerdict::Unknown {
                            reason: "solver returned unknown".into(),
                        },
                        steps,
                    ),
                    _ => {
                        let reason = format!(
                            "unexpected solver output: {} {}",
                            stdout.trim(),
                            stderr.trim()
                        );
                        (
                            VcVerdict::Unknown {
                                reason: reason.trim().to_string(),
                            },
                            None,
                        )
                    }
                }
            }
        },
    };
    VcResult {
        id: task.id.clone(),
        kind: task.kind,
        verdict,
        wall_ms: start.elapsed().as_millis(),
        steps,
        solver: cfg.command_line(),
    }
}

/// Discharges encoded tasks in parallel, results in task order.
pub fn discharge(model: &Model, tasks: &[VerificationTask], cfg: &SolverConfig) -> Vec<VcResult> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<VcResult>>> = Mutex::new(vec![None; tasks.len()]);
    let workers = cfg.jobs.max(1).min(tasks.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= tasks.len() {
                    break;
                }
                let r = discharge_one(model, &tasks[i], cfg);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every task discharged"))
        .collect()
}
