//! Local contract checks. Each generated contract is compared against a
//! weakest-precondition reading of the class declaration, computed
//! independently of the forward symbolic execution used to generate it.

use super::{TaskKind, VcError, VerificationTask};
use crate::contract::{exec_contract_with, init_contract, tick_contract, GenOptions};
use crate::model::*;

/// Rewrites every current-state (non-`old`) read of a mutable field with `f`.
/// `f` receives the already rewritten object expression.
fn replace_reads(e: &Expr, f: &impl Fn(&Expr, &str, &str) -> Option<Expr>) -> Expr {
    match e {
        Expr::Old(_) => e.clone(),
        Expr::Field { obj, class, field } => {
            let o = replace_reads(obj, f);
            f(&o, class, field).unwrap_or_else(|| Expr::field(o, class, field))
        }
        _ => e.map_children(&mut |c| replace_reads(c, f)),
    }
}

struct Wp<'m> {
    model: &'m Model,
    class: String,
    counter: usize,
}

impl Wp<'_> {
    fn assign(&self, field: &str, value: &Expr, q: &Expr) -> Expr {
        let me = Expr::self_var(&self.class);
        replace_reads(q, &|o, c, f| {
            if c != self.class || f != field {
                return None;
            }
            if *o == me {
                return Some(value.clone());
            }
            Some(Expr::ite(
                Expr::eq(o.clone(), me.clone()),
                value.clone(),
                Expr::field(o.clone(), c, f),
            ))
        })
    }

    fn wp(&mut self, s: &Stmt, q: Expr) -> Expr {
        match s {
            Stmt::Seq(v) => v.iter().rev().fold(q, |acc, x| self.wp(x, acc)),
            Stmt::Assign { field, value } => self.assign(field, value, &q),
            Stmt::Havoc { field } => {
                self.counter += 1;
                let ty = self.model.type_of(&Expr::self_field(&self.class, field));
                let v = Expr::Fresh {
                    name: format!("havoc{}_{field}", self.counter),
                    ty,
                };
                self.assign(field, &v, &q)
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let a = self.wp(then_branch, q.clone());
                let b = self.wp(else_branch, q);
                Expr::and(
                    Expr::implies(cond.clone(), a),
                    Expr::implies(Expr::not(cond.clone()), b),
                )
            }
            Stmt::ForallAssign {
                var,
                class,
                set,
                field,
                value,
            } => replace_reads(&q, &|o, c, f| {
                if c != class || f != field {
                    return None;
                }
                let member = Expr::bin(BinOp::In, o.clone(), set.clone());
                Some(Expr::ite(
                    member,
                    value.subst_var(var, o),
                    Expr::field(o.clone(), c, f),
                ))
            }),
            Stmt::ObjAssign {
                target,
                class,
                field,
                value,
            } => replace_reads(&q, &|o, c, f| {
                if c != class || f != field {
                    return None;
                }
                Some(Expr::ite(
                    Expr::eq(o.clone(), target.clone()),
                    value.clone(),
                    Expr::field(o.clone(), c, f),
                ))
            }),
            Stmt::Assume(e) => Expr::implies(e.clone(), q),
            Stmt::Assert(e) => Expr::and(e.clone(), q),
        }
    }
}

/// Weakest precondition of `s`, executed by the receiver of `class`, for `q`.
/// Reads under `old` refer to a fixed earlier state and are left alone.
pub fn wp(model: &Model, class: &str, s: &Stmt, q: &Expr) -> Expr {
    Wp {
        model,
        class: class.to_string(),
        counter: 0,
    }
    .wp(s, q.clone())
}

fn at(class: &ClassDecl, t: &Transition) -> Expr {
    let loc = Expr::eq(
        Expr::self_field(&class.name, LOCATION),
        Expr::enum_lit(class.location_enum(), &t.from),
    );
    Expr::and(loc, t.guard.clone())
}

fn set_true(class: &str, field: &str) -> Stmt {
    let _ = class;
    Stmt::Assign {
        field: field.to_string(),
        value: Expr::tt(),
    }
}

/// The obligation that every execution of `exec(phase)` from any pre-state
/// satisfies the generated contract.
fn exec_goal(
    model: &Model,
    class: &ClassDecl,
    phase: &str,
    opts: GenOptions,
) -> Result<Expr, VcError> {
    let q = exec_contract_with(model, &class.name, phase, opts)?.formula;
    let mut w = Wp {
        model,
        class: class.name.clone(),
        counter: 0,
    };
    let mut parts = Vec::new();
    let mut disabled = Vec::new();
    for t in class.transitions_in(phase) {
        let mut body = vec![
            t.effect.clone(),
            Stmt::Assign {
                field: LOCATION.into(),
                value: Expr::enum_lit(class.location_enum(), &t.to),
            },
        ];
        for e in guard_events(class, &t.guard) {
            body.push(Stmt::Assign {
                field: e,
                value: Expr::ff(),
            });
        }
        body.push(set_true(&class.name, EXECUTED));
        let fires = Expr::and(at(class, t), Expr::and_all(disabled.clone()));
        parts.push(Expr::implies(fires, w.wp(&Stmt::Seq(body), q.clone())));
        disabled.push(Expr::not(at(class, t)));
    }
    parts.push(Expr::implies(
        Expr::and_all(disabled),
        w.wp(&set_true(&class.name, EXECUTED), q),
    ));
    Ok(Expr::and_all(parts).strip_old())
}

fn init_goal(model: &Model, class: &ClassDecl) -> Result<Expr, VcError> {
    let q = init_contract(model, &class.name)?.formula;
    let mut body = Vec::new();
    for f in &class.fields {
        let s = match (&f.init, &f.ty) {
            (_, _) if f.input => Stmt::Havoc {
                field: f.name.clone(),
            },
            (Some(init), _) => Stmt::Assign {
                field: f.name.clone(),
                value: init.clone(),
            },
            (None, ScalarType::Event) => Stmt::Assign {
                field: f.name.clone(),
                value: Expr::ff(),
            },
            (None, ScalarType::Timer) => Stmt::Assign {
                field: f.name.clone(),
                value: Expr::Inactive,
            },
            (None, _) => Stmt::Havoc {
                field: f.name.clone(),
            },
        };
        body.push(s);
    }
    body.push(Stmt::Assign {
        field: EXECUTED.into(),
        value: Expr::ff(),
    });
    Ok(wp(model, &class.name, &Stmt::Seq(body), &q))
}

fn tick_goal(model: &Model, class: &ClassDecl) -> Result<Expr, VcError> {
    let q = tick_contract(model, &class.name)?.formula;
    let mut body = Vec::new();
    for f in class.timers() {
        let cur = Expr::self_field(&class.name, &f.name);
        let left = Expr::Unary(UnOp::TimerRemaining, Box::new(cur.clone()));
        let running = Expr::and(
            Expr::Unary(UnOp::TimerActive, Box::new(cur)),
            Expr::bin(BinOp::Gt, left.clone(), Expr::Int(1)),
        );
        let next = Expr::TimerFrom(Box::new(Expr::bin(BinOp::Sub, left, Expr::Int(1))));
        body.push(Stmt::Assign {
            field: f.name.clone(),
            value: Expr::ite(running, next, Expr::Inactive),
        });
    }
    Ok(wp(model, &class.name, &Stmt::Seq(body), &q).strip_old())
}

/// Local contract tasks for every class: init, exec per phase and tick.
pub fn build_local_contract_tasks_with(
    model: &Model,
    opts: GenOptions,
) -> Result<Vec<VerificationTask>, VcError> {
    let mut tasks = Vec::new();
    for c in &model.classes {
        let me = Expr::self_var(&c.name);
        let member = Expr::bin(BinOp::In, me, Expr::All(c.name.clone()));
        let mk = |phase: &str, goal: Expr| {
            VerificationTask::new(TaskKind::LocalContract, &c.name, phase)
                .with_const(SELF, &c.name)
                .hyp("self exists", member.clone())
                .goal(goal)
        };
        tasks.push(mk("init", init_goal(model, c)?));
        for p in &model.scheduler.phases {
            tasks.push(mk(p, exec_goal(model, c, p, opts)?));
        }
        tasks.push(mk("tick", tick_goal(model, c)?));
    }
    Ok(tasks)
}

pub fn build_local_contract_tasks(model: &Model) -> Result<Vec<VerificationTask>, VcError> {
    build_local_contract_tasks_with(model, GenOptions::default())
}
