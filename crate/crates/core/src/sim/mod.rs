//! Operational semantics: local exec, scheduler steps, cycles and runs.

mod eval;
mod inputs;
mod order;
mod trace;

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use eval::{empty_state, eval_constraints, evaluate, satisfies_constraints, Env};
pub use inputs::InputProvider;
pub use order::{permutations, FixedOrder, OrderPolicy};
pub use trace::{StepLabel, Trace, TraceEntry};

use crate::model::*;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("missing initial value for `{class}.{field}`")]
    MissingInit { class: String, field: String },
    #[error("assertion failed in transition `{transition}` of `{instance}`")]
    AssertFailed {
        instance: String,
        transition: String,
    },
    #[error("assumption violated in transition `{transition}` of `{instance}`")]
    AssumeFailed {
        instance: String,
        transition: String,
    },
    #[error("scheduler deadlock in phase `{phase}`: no scheduler guard is true")]
    Deadlock {
        phase: String,
        state: Box<GlobalState>,
    },
    #[error("more than {0} scheduler steps in one cycle")]
    Livelock(usize),
    #[error("invalid instance order: {0}")]
    BadOrder(String),
    #[error("invalid input script: {0}")]
    BadInputs(String),
}

/// Builds the initial global state: declared initial values, events false,
/// timers inactive, executed false, phase l0, inputs from the provider.
pub fn init_state(
    model: &Model,
    cfg: &Configuration,
    inputs: &mut InputProvider,
) -> Result<GlobalState, SimError> {
    let mut s = GlobalState {
        fields: Vec::with_capacity(cfg.total()),
        executed: vec![false; cfg.total()],
        phase: model.scheduler.initial.clone(),
    };
    let empty = empty_state(cfg);
    for o in cfg.ids() {
        let class = model.class_decl(cfg.class_of(o));
        let mut vals = BTreeMap::new();
        for f in &class.fields {
            let v = match (&f.init, &f.ty) {
                (_, _) if f.input => Value::default_for(model, &f.ty),
                (Some(init), _) => evaluate(model, cfg, &empty, None, init)?,
                (None, ScalarType::Event) => Value::Bool(false),
                (None, ScalarType::Timer) => Value::Timer(TimerValue::Inactive),
                (None, _) => {
                    return Err(SimError::MissingInit {
                        class: class.name.clone(),
                        field: f.name.clone(),
                    })
                }
            };
            vals.insert(f.name.clone(), v);
        }
        s.fields.push(vals);
    }
    inputs.provide(model, cfg, 0, &mut s)?;
    Ok(s)
}

/// The first phase-matching transition enabled at the instance's location.
pub fn enabled_transition<'m>(
    model: &'m Model,
    cfg: &Configuration,
    s: &GlobalState,
    o: ObjId,
    phase: &str,
) -> Result<Option<&'m Transition>, SimError> {
    let class = model.class_decl(cfg.class_of(o));
    let loc = s.read(o, LOCATION);
    for t in class.transitions_in(phase) {
        if loc.as_ref() != Some(&Value::Enum(t.from.clone())) {
            continue;
        }
        let mut env = Env::new(model, cfg, s).bind(SELF, Value::Obj(o));
        if env.eval_bool(&t.guard)? {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Random value of a scalar type, used for havoc.
pub fn random_value(model: &Model, ty: &ScalarType, rng: &mut SimRng) -> Value {
    match ty {
        ScalarType::Int => Value::Int(rng.gen_range(-3..=3)),
        ScalarType::Bool | ScalarType::Event => Value::Bool(rng.gen()),
        ScalarType::Enum(e) => {
            let vals = model.enum_values(e);
            Value::Enum(vals[rng.gen_range(0..vals.len())].clone())
        }
        ScalarType::Timer => {
            let n = rng.gen_range(0..=3);
            Value::Timer(TimerValue::from_count(n))
        }
    }
}

fn run_stmt(
    model: &Model,
    cfg: &Configuration,
    s: &mut GlobalState,
    o: ObjId,
    stmt: &Stmt,
    t: &Transition,
    rng: &mut SimRng,
) -> Result<(), SimError> {
    let class = cfg.class_of(o).to_string();
    match stmt {
        Stmt::Seq(v) => {
            for x in v {
                run_stmt(model, cfg, s, o, x, t, rng)?;
            }
        }
        Stmt::Assign { field, value } => {
            let v = Env::new(model, cfg, s)
                .bind(SELF, Value::Obj(o))
                .eval(value)?;
            s.set(o, field, v);
        }
        Stmt::Havoc { field } => {
            let ty = match model.member(&class, field) {
                Some(MemberKind::Field(f)) => f.ty.clone(),
                _ => ScalarType::Bool,
            };
            let v = random_value(model, &ty, rng);
            s.set(o, field, v);
        }
        Stmt::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let c = Env::new(model, cfg, s)
                .bind(SELF, Value::Obj(o))
                .eval_bool(cond)?;
            let branch = if c { then_branch } else { else_branch };
            run_stmt(model, cfg, s, o, branch, t, rng)?;
        }
        Stmt::ForallAssign {
            var,
            set,
            field,
            value,
            ..
        } => {
            // Every right-hand side reads the state before the statement.
            let mut writes = Vec::new();
            {
                let mut env = Env::new(model, cfg, s).bind(SELF, Value::Obj(o));
                let Value::Set(targets) = env.eval(set)? else {
                    return Err(SimError::Type(
                        "quantified assignment over a non-set".into(),
                    ));
                };
                for y in targets {
                    env.vars.push((var.clone(), Value::Obj(y)));
                    let v = env.eval(value);
                    env.vars.pop();
                    writes.push((y, v?));
                }
            }
            for (y, v) in writes {
                s.set(y, field, v);
            }
        }
        Stmt::ObjAssign {
            target,
            field,
            value,
            ..
        } => {
            let mut env = Env::new(model, cfg, s).bind(SELF, Value::Obj(o));
            let tgt = env.eval(target)?;
            let v = env.eval(value)?;
            match tgt {
                Value::Obj(y) => s.set(y, field, v),
                other => return Err(SimError::Unbound(format!("assignment through {other}"))),
            }
        }
        Stmt::Assume(e) | Stmt::Assert(e) => {
            let ok = Env::new(model, cfg, s)
                .bind(SELF, Value::Obj(o))
                .eval_bool(e)?;
            if !ok {
                let instance = cfg.name(o).to_string();
                let transition = t.name.clone();
                return Err(if matches!(stmt, Stmt::Assume(_)) {
                    SimError::AssumeFailed {
                        instance,
                        transition,
                    }
                } else {
                    SimError::AssertFailed {
                        instance,
                        transition,
                    }
                });
            }
        }
    }
    Ok(())
}

/// Runs `effect` alone for instance `o`, as part of transition `t`.
pub fn run_effect(
    model: &Model,
    cfg: &Configuration,
    s: &GlobalState,
    o: ObjId,
    t: &Transition,
    rng: &mut SimRng,
) -> Result<GlobalState, SimError> {
    let mut next = s.clone();
    run_stmt(model, cfg, &mut next, o, &t.effect, t, rng)?;
    Ok(next)
}

/// One local exec of instance `o` in `phase`. Returns the successor state and
/// the fired transition (`None` for a stutter). The executed flag is left untouched.
pub fn exec_local<'m>(
    model: &'m Model,
    cfg: &Configuration,
    s: &GlobalState,
    o: ObjId,
    phase: &str,
    rng: &mut SimRng,
) -> Result<(GlobalState, Option<&'m Transition>), SimError> {
    let Some(t) = enabled_transition(model, cfg, s, o, phase)? else {
        return Ok((s.clone(), None));
    };
    let class = model.class_decl(cfg.class_of(o));
    let mut next = s.clone();
    run_stmt(model, cfg, &mut next, o, &t.effect, t, rng)?;
    next.set(o, LOCATION, Value::Enum(t.to.clone()));
    for e in guard_events(class, &t.guard) {
        next.set(o, &e, Value::Bool(false));
    }
    Ok((next, Some(t)))
}

/// Applies tick to every timer of instance `o`.
pub fn tick_instance(model: &Model, cfg: &Configuration, s: &mut GlobalState, o: ObjId) {
    let class = model.class_decl(cfg.class_of(o));
    for f in class.timers() {
        if let Some(Value::Timer(t)) = s.get(o, &f.name).cloned() {
            s.set(o, &f.name, Value::Timer(t.tick()));
        }
    }
}

/// The first enabled scheduler transition from the current phase.
pub fn enabled_sched<'m>(
    model: &'m Model,
    cfg: &Configuration,
    s: &GlobalState,
) -> Result<Option<&'m SchedTransition>, SimError> {
    for t in &model.scheduler.transitions {
        if t.from != s.phase {
            continue;
        }
        if Env::new(model, cfg, s).eval_bool(&t.guard)? {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Applies a phase change to `to`: executed reset, and tick when `to` is final.
pub fn apply_phase_change(model: &Model, cfg: &Configuration, s: &mut GlobalState, to: &str) {
    s.phase = to.to_string();
    s.executed.iter_mut().for_each(|e| *e = false);
    if to == model.scheduler.final_phase {
        for o in cfg.ids() {
            tick_instance(model, cfg, s, o);
        }
    }
}

/// Runs one self-loop sweep in the given instance order, setting executed
/// immediately after each instance's exec.
pub fn sweep(
    model: &Model,
    cfg: &Configuration,
    s: &GlobalState,
    order: &[ObjId],
    rng: &mut SimRng,
) -> Result<(GlobalState, Vec<Option<String>>), SimError> {
    let mut cur = s.clone();
    let phase = s.phase.clone();
    let mut fired = Vec::with_capacity(order.len());
    for &o in order {
        let (mut next, t) = exec_local(model, cfg, &cur, o, &phase, rng)?;
        next.executed[o.0] = true;
        fired.push(t.map(|t| t.name.clone()));
        cur = next;
    }
    Ok((cur, fired))
}

/// One scheduler step, including the implicit reset from the final phase.
pub fn step_scheduler(
    model: &Model,
    cfg: &Configuration,
    s: &GlobalState,
    order: &mut OrderPolicy,
    inputs: &mut InputProvider,
    cycle: usize,
    rng: &mut SimRng,
) -> Result<(GlobalState, StepLabel), SimError> {
    if s.phase == model.scheduler.final_phase {
        let mut next = s.clone();
        next.phase = model.scheduler.initial.clone();
        inputs.provide(model, cfg, cycle, &mut next)?;
        return Ok((next, StepLabel::Reset));
    }
    let Some(t) = enabled_sched(model, cfg, s)? else {
        return Err(SimError::Deadlock {
            phase: s.phase.clone(),
            state: Box::new(s.clone()),
        });
    };
    if t.is_self_loop() {
        let ids = order.order(cfg, &s.phase)?;
        let (next, fired) = sweep(model, cfg, s, &ids, rng)?;
        let names: Vec<String> = ids.iter().map(|o| cfg.name(*o).to_string()).collect();
        let fired = names.iter().cloned().zip(fired).collect();
        return Ok((
            next,
            StepLabel::SelfLoop {
                phase: s.phase.clone(),
                order: names,
                fired,
            },
        ));
    }
    let mut next = s.clone();
    apply_phase_change(model, cfg, &mut next, &t.to);
    Ok((
        next,
        StepLabel::PhaseChange {
            from: t.from.clone(),
            to: t.to.clone(),
        },
    ))
}

/// A named formula evaluated at every state whose phase is final.
#[derive(Debug, Clone)]
pub struct Monitor {
    pub name: String,
    pub formula: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Violation {
        monitor: String,
        step: usize,
        cycle: usize,
    },
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trace: Trace,
    pub verdict: Verdict,
}

/// Drives runs over one model and configuration.
pub struct Simulator<'m> {
    pub model: &'m Model,
    pub cfg: &'m Configuration,
    pub order: OrderPolicy,
    pub inputs: InputProvider,
    pub rng: SimRng,
    /// Livelock guard on scheduler steps within one cycle.
    pub max_steps_per_cycle: usize,
}

impl<'m> Simulator<'m> {
    pub fn new(
        model: &'m Model,
        cfg: &'m Configuration,
        order: OrderPolicy,
        inputs: InputProvider,
        seed: u64,
    ) -> Self {
        use rand::SeedableRng;
        Simulator {
            model,
            cfg,
            order,
            inputs,
            rng: SimRng::seed_from_u64(seed),
            max_steps_per_cycle: 10_000,
        }
    }

    /// Executes `cycles` complete scheduling cycles, checking monitors at every final-phase state.
    pub fn run(&mut self, cycles: usize, monitors: &[Monitor]) -> Result<RunResult, SimError> {
        let mut s = init_state(self.model, self.cfg, &mut self.inputs)?;
        let mut trace = Trace::default();
        trace.push(StepLabel::Init, s.clone());
        let mut cycle = 0;
        let mut steps_in_cycle = 0;
        while cycle < cycles {
            let (next, label) = step_scheduler(
                self.model,
                self.cfg,
                &s,
                &mut self.order,
                &mut self.inputs,
                cycle,
                &mut self.rng,
            )?;
            s = next;
            trace.push(label.clone(), s.clone());
            steps_in_cycle += 1;
            if steps_in_cycle > self.max_steps_per_cycle {
                return Err(SimError::Livelock(self.max_steps_per_cycle));
            }
            if matches!(label, StepLabel::Reset) {
                steps_in_cycle = 0;
            }
            if s.phase == self.model.scheduler.final_phase && !matches!(label, StepLabel::Reset) {
                for m in monitors {
                    let ok = Env::new(self.model, self.cfg, &s).eval_bool(&m.formula)?;
                    if !ok {
                        let step = trace.entries.len() - 1;
                        return Ok(RunResult {
                            trace,
                            verdict: Verdict::Violation {
                                monitor: m.name.clone(),
                                step,
                                cycle,
                            },
                        });
                    }
                }
                cycle += 1;
            }
        }
        Ok(RunResult {
            trace,
            verdict: Verdict::Pass,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_enum_values_stay_in_domain() {
        use rand::SeedableRng;
        let model = Model {
            enums: vec![EnumDecl {
                name: "E".into(),
                values: vec!["A".into(), "B".into()],
            }],
            classes: vec![],
            scheduler: SchedulerDecl {
                phases: vec![],
                initial: String::new(),
                final_phase: String::new(),
                transitions: vec![],
            },
            constraints: vec![],
        };
        let mut rng = SimRng::seed_from_u64(1);
        for _ in 0..20 {
            let v = random_value(&model, &ScalarType::Enum("E".into()), &mut rng);
            assert!(matches!(v, Value::Enum(ref s) if s == "A" || s == "B"));
        }
    }
}
