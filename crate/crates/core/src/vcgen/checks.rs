use super::{TaskKind, VcError, VerificationTask};
use crate::contract::{
    exec_contract_with, init_contract, phase_function_fields, tick_contract, GenOptions,
};
use crate::frontend::LocalConditions;
use crate::model::*;

/// Everything the global checks are built from.
#[derive(Debug, Clone)]
pub struct CheckInputs<'a> {
    pub model: &'a Model,
    pub invariant: &'a Expr,
    pub property: &'a Expr,
    pub gprime: &'a LocalConditions,
    pub opts: GenOptions,
}

fn field_expr(x: &Expr, class: &str, field: &str) -> Expr {
    Expr::field(x.clone(), class, field)
}

/// `forall x in All_C : body(x)`.
fn for_all(class: &str, body: impl Fn(&Expr) -> Expr) -> Expr {
    let x = Expr::var("x", class);
    Expr::forall("x", class, Expr::All(class.to_string()), body(&x))
}

fn unchanged_at(x: &Expr, class: &str, field: &str) -> Expr {
    let f = field_expr(x, class, field);
    Expr::eq(f.clone(), Expr::old(f))
}

/// Frame axioms for one exec step of `d` (class `class`) in `phase`: fields
/// outside the footprint are unchanged everywhere, own scalar footprint fields
/// are unchanged on every other instance, and the phase is unchanged.
pub fn step_frame(model: &Model, class: &ClassDecl, d: &Expr, phase: &str) -> Vec<(String, Expr)> {
    let footprint = write_footprint(class, phase);
    let fns = phase_function_fields(class, phase);
    let mut out = Vec::new();
    for e in &model.classes {
        for f in e.mutable_names() {
            let key = (e.name.clone(), f.to_string());
            if !footprint.contains(&key) {
                out.push((
                    format!("frame {}.{f}", e.name),
                    for_all(&e.name, |x| unchanged_at(x, &e.name, f)),
                ));
            } else if e.name == class.name && !fns.contains(&key) {
                let body = |x: &Expr| {
                    Expr::implies(Expr::ne(x.clone(), d.clone()), unchanged_at(x, &e.name, f))
                };
                out.push((
                    format!("frame {}.{f} off the executing instance", e.name),
                    for_all(&e.name, body),
                ));
            }
        }
    }
    out.push((
        "frame phase".into(),
        Expr::eq(Expr::Phase, Expr::old(Expr::Phase)),
    ));
    out
}

/// State change of a scheduler phase change: executed reset, every other field
/// unchanged except timers on entry to the final phase, which tick.
pub fn phase_change_frame(model: &Model, to_final: bool) -> Result<Vec<(String, Expr)>, VcError> {
    let mut out = Vec::new();
    for c in &model.classes {
        let name = &c.name;
        out.push((
            format!("executed reset {name}"),
            for_all(name, |x| Expr::not(field_expr(x, name, EXECUTED))),
        ));
        for f in &c.fields {
            if to_final && f.is_timer() {
                continue;
            }
            out.push((
                format!("frame {name}.{}", f.name),
                for_all(name, |x| unchanged_at(x, name, &f.name)),
            ));
        }
        if to_final {
            let k = tick_contract(model, name)?;
            out.push((
                format!("tick {name}"),
                for_all(name, |x| k.formula.instantiate_self(x)),
            ));
        }
    }
    Ok(out)
}

/// Guard of scheduler transition `i` as selected: true and no earlier guard
/// from the same phase true.
fn selected_guard(model: &Model, i: usize) -> Expr {
    let t = &model.scheduler.transitions[i];
    let earlier = model.scheduler.transitions[..i]
        .iter()
        .filter(|u| u.from == t.from)
        .map(|u| Expr::not(u.guard.clone()));
    Expr::and(t.guard.clone(), Expr::and_all(earlier))
}

fn member(x: &Expr, class: &str) -> Expr {
    Expr::bin(BinOp::In, x.clone(), Expr::All(class.to_string()))
}

fn at_phase(p: &str) -> Expr {
    Expr::eq(Expr::Phase, Expr::enum_lit(PHASE_ENUM, p))
}

fn check_gprime(e: &Expr, class: &str, phase: &str) -> Result<(), VcError> {
    if e.has_old() {
        return Err(VcError::PostStateGPrime {
            class: class.into(),
            phase: phase.into(),
        });
    }
    Ok(())
}

/// Builds every global entailment task for the invariant and property.
pub fn build_checks(inp: &CheckInputs<'_>) -> Result<Vec<VerificationTask>, VcError> {
    let m = inp.model;
    let sched = &m.scheduler;
    let inv = inp.invariant;
    let mut tasks = Vec::new();
    let mut self_loop_phases = Vec::new();
    for (i, t) in sched.transitions.iter().enumerate() {
        if t.is_self_loop() && !self_loop_phases.contains(&t.from) {
            self_loop_phases.push(t.from.clone());
            let p = &t.from;
            let guard = selected_guard(m, i);
            for c in &m.classes {
                let cv = Expr::var("c", &c.name);
                let g = inp.gprime.get(p, &c.name);
                check_gprime(&g, &c.name, p)?;
                let gc = g.instantiate_self(&cv);
                tasks.push(
                    VerificationTask::new(TaskKind::Establishment, &c.name, p)
                        .with_const("c", &c.name)
                        .hyp("c exists", member(&cv, &c.name))
                        .hyp("invariant", inv.clone())
                        .hyp("phase", at_phase(p))
                        .hyp("scheduler guard", guard.clone())
                        .goal(gc.clone()),
                );
                for d in &m.classes {
                    let dv = Expr::var("d", &d.name);
                    let td = exec_contract_with(m, &d.name, p, inp.opts)?;
                    let mut task = VerificationTask::new(
                        TaskKind::Stability,
                        &format!("{}-{}", c.name, d.name),
                        p,
                    )
                    .with_const("c", &c.name)
                    .with_const("d", &d.name)
                    .hyp("c exists", member(&cv, &c.name))
                    .hyp("d exists", member(&dv, &d.name));
                    if c.name == d.name {
                        task = task.hyp("distinct", Expr::ne(cv.clone(), dv.clone()));
                    }
                    task = task
                        .hyp("invariant before", Expr::old(inv.clone()))
                        .hyp("phase before", Expr::old(at_phase(p)))
                        .hyp("local condition before", Expr::old(gc.clone()))
                        .hyp("step of d", td.formula.instantiate_self(&dv))
                        .hyp("d executed", field_expr(&dv, &d.name, EXECUTED));
                    for (l, f) in step_frame(m, d, &dv, p) {
                        task = task.hyp(&l, f);
                    }
                    tasks.push(task.goal(gc.clone()));
                }
                let tc = exec_contract_with(m, &c.name, p, inp.opts)?;
                let mut task = VerificationTask::new(TaskKind::SelfLoopPreservation, &c.name, p)
                    .with_const("c", &c.name)
                    .hyp("c exists", member(&cv, &c.name))
                    .hyp("invariant before", Expr::old(inv.clone()))
                    .hyp("phase before", Expr::old(at_phase(p)))
                    .hyp("local condition before", Expr::old(gc.clone()))
                    .hyp("step of c", tc.formula.instantiate_self(&cv))
                    .hyp("c executed", field_expr(&cv, &c.name, EXECUTED));
                for (l, f) in step_frame(m, c, &cv, p) {
                    task = task.hyp(&l, f);
                }
                tasks.push(task.goal(inv.clone()));
            }
        }
    }
    for (i, t) in sched.transitions.iter().enumerate() {
        if t.is_self_loop() {
            continue;
        }
        let to_final = t.to == sched.final_phase;
        let kind = if to_final {
            TaskKind::PhaseFinal
        } else {
            TaskKind::PhaseNonFinal
        };
        let mut task = VerificationTask::new(kind, "global", &format!("{}-{}", t.from, t.to))
            .hyp("invariant before", Expr::old(inv.clone()))
            .hyp("phase before", Expr::old(at_phase(&t.from)))
            .hyp("scheduler guard before", Expr::old(selected_guard(m, i)))
            .hyp("phase after", at_phase(&t.to));
        for (l, f) in phase_change_frame(m, to_final)? {
            task = task.hyp(&l, f);
        }
        tasks.push(task.goal(inv.clone()));
    }
    let mut reset = VerificationTask::new(
        TaskKind::Reset,
        "global",
        &format!("{}-{}", sched.final_phase, sched.initial),
    )
    .hyp("invariant before", Expr::old(inv.clone()))
    .hyp("phase before", Expr::old(at_phase(&sched.final_phase)))
    .hyp("phase after", at_phase(&sched.initial));
    for c in &m.classes {
        for f in c.mutable_names() {
            if !m.is_input(&c.name, f) {
                let name = &c.name;
                reset = reset.hyp(
                    &format!("input change keeps {name}.{f}"),
                    for_all(name, |x| unchanged_at(x, name, f)),
                );
            }
        }
    }
    tasks.push(reset.goal(inv.clone()));
    let mut init = VerificationTask::new(TaskKind::Init, "global", &sched.initial);
    for c in &m.classes {
        let ic = init_contract(m, &c.name)?;
        let name = &c.name;
        init = init.hyp(
            &format!("init {name}"),
            for_all(name, |x| {
                Expr::and(
                    ic.formula.instantiate_self(x),
                    Expr::not(field_expr(x, name, EXECUTED)),
                )
            }),
        );
    }
    tasks.push(
        init.hyp("phase", at_phase(&sched.initial))
            .goal(inv.clone()),
    );
    tasks.push(
        VerificationTask::new(TaskKind::PropertyImplication, "global", &sched.final_phase)
            .hyp("invariant", inv.clone())
            .hyp("phase", at_phase(&sched.final_phase))
            .goal(inp.property.clone()),
    );
    Ok(tasks)
}
