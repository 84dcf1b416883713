//! Language restrictions enforced on resolved models.

use std::collections::BTreeSet;

use super::diag::{Code, Diagnostic};
use super::resolve::{DeclKey, SourceMap};
use crate::model::*;

struct Checker<'a> {
    model: &'a Model,
    map: &'a SourceMap,
    out: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn err(&mut self, code: Code, key: &DeclKey, msg: impl Into<String>) {
        self.out
            .push(Diagnostic::error(code, self.map.span(key), msg));
    }

    fn warn(&mut self, code: Code, key: &DeclKey, msg: impl Into<String>) {
        self.out
            .push(Diagnostic::warning(code, self.map.span(key), msg));
    }

    fn run(&mut self) {
        let m = self.model;
        if m.classes.is_empty() {
            self.err(
                Code::NoClasses,
                &DeclKey::Scheduler,
                "no class declarations",
            );
        }
        for e in &m.enums {
            let key = DeclKey::Enum(e.name.clone());
            if e.values.is_empty() {
                self.err(
                    Code::BadEnum,
                    &key,
                    format!("enum `{}` has no values", e.name),
                );
            }
            let uniq: BTreeSet<_> = e.values.iter().collect();
            if uniq.len() != e.values.len() {
                self.err(
                    Code::BadEnum,
                    &key,
                    format!("enum `{}` has duplicate values", e.name),
                );
            }
        }
        for c in &m.classes {
            self.class(c);
        }
        self.scheduler();
        for (i, k) in m.constraints.iter().enumerate() {
            let key = DeclKey::Constraint(i);
            self.no_old(&k.expr, &key);
            self.quant_ranges(&k.expr, &key);
            for s in free_symbols(&k.expr) {
                let bad = match &s.symbol {
                    Symbol::Field { class, field } => m.is_mutable(class, field),
                    Symbol::Phase => true,
                    Symbol::All(_) => false,
                };
                if bad {
                    self.err(
                        Code::MutableInConstraint,
                        &key,
                        format!(
                            "constraint `{}` mentions mutable symbol `{}`",
                            k.name, s.symbol
                        ),
                    );
                }
            }
        }
    }

    fn class(&mut self, c: &ClassDecl) {
        let ckey = DeclKey::Class(c.name.clone());
        match c.field(LOCATION) {
            Some(f) if matches!(f.ty, ScalarType::Enum(_)) && !f.input => {}
            Some(_) => self.err(
                Code::MissingLocation,
                &ckey,
                "`location` must be a non-input enum variable",
            ),
            None => self.err(
                Code::MissingLocation,
                &ckey,
                format!("class `{}` has no `location` variable", c.name),
            ),
        }
        for f in &c.fields {
            let key = DeclKey::Member(c.name.clone(), f.name.clone());
            if let Some(init) = &f.init {
                self.no_old(init, &key);
            }
            if !f.input
                && f.init.is_none()
                && matches!(
                    f.ty,
                    ScalarType::Int | ScalarType::Bool | ScalarType::Enum(_)
                )
            {
                self.warn(
                    Code::MissingInit,
                    &key,
                    format!("field `{}` has no initial value", f.name),
                );
            }
        }
        for t in &c.transitions {
            let key = DeclKey::Transition(c.name.clone(), t.name.clone());
            if !self.model.scheduler.phases.contains(&t.phase) {
                self.err(
                    Code::UnknownName,
                    &key,
                    format!("unknown phase `{}`", t.phase),
                );
            }
            let locs = self.model.enum_values(c.location_enum());
            for l in [&t.from, &t.to] {
                if !c.location_enum().is_empty() && !locs.contains(l) {
                    self.err(Code::UnknownName, &key, format!("unknown location `{l}`"));
                }
            }
            self.guard(c, &t.guard, &key);
            self.no_old(&t.guard, &key);
            self.quant_ranges(&t.guard, &key);
            for e in t.effect.exprs() {
                self.no_old(e, &key);
                self.quant_ranges(e, &key);
            }
            self.effect(c, &t.effect, &key);
        }
    }

    fn guard(&mut self, c: &ClassDecl, g: &Expr, key: &DeclKey) {
        for conj in g.conjuncts() {
            if own_event(c, conj).is_some() {
                continue;
            }
            let reads_event = conj.contains(&|e| match e {
                Expr::Field { class, field, .. } => {
                    matches!(self.model.member(class, field), Some(MemberKind::Field(f)) if f.is_event())
                }
                _ => false,
            });
            if reads_event {
                self.err(
                    Code::GuardShape,
                    key,
                    "events may appear in guards only as top-level conjuncts naming the instance's own events",
                );
            }
        }
    }

    fn assigned(&mut self, class: &str, field: &str, value: Option<&Expr>, key: &DeclKey) {
        match self.model.member(class, field) {
            Some(MemberKind::Field(f)) => {
                if f.name == LOCATION {
                    self.err(
                        Code::LocationAssigned,
                        key,
                        "`location` cannot be assigned; it changes with the transition",
                    );
                } else if f.input {
                    self.err(
                        Code::InputAssigned,
                        key,
                        format!("input `{}` cannot be assigned", f.name),
                    );
                } else if f.is_event() && value != Some(&Expr::tt()) {
                    self.err(
                        Code::EventNotTrue,
                        key,
                        format!("event `{}` may only be assigned `true`", f.name),
                    );
                }
            }
            Some(_) => self.err(
                Code::ImmutableAssigned,
                key,
                format!("`{class}.{field}` is not assignable"),
            ),
            None => self.err(
                Code::UnknownName,
                key,
                format!("unknown field `{class}.{field}`"),
            ),
        }
    }

    fn effect(&mut self, c: &ClassDecl, s: &Stmt, key: &DeclKey) {
        s.walk(&mut |s| match s {
            Stmt::Assign { field, value } => self.assigned(&c.name, field, Some(value), key),
            Stmt::Havoc { field } => self.assigned(&c.name, field, None, key),
            Stmt::ForallAssign {
                class,
                field,
                value,
                ..
            }
            | Stmt::ObjAssign {
                class,
                field,
                value,
                ..
            } => self.assigned(class, field, Some(value), key),
            _ => {}
        });
    }

    fn no_old(&mut self, e: &Expr, key: &DeclKey) {
        if e.has_old() {
            self.err(Code::OldInSource, key, "`old` is only allowed in contracts");
        }
    }

    fn quant_ranges(&mut self, e: &Expr, key: &DeclKey) {
        let mut bad = false;
        e.walk(&mut |x| {
            if let Expr::Quant { set, .. } = x {
                if !matches!(self.model.type_of(set), Type::Set(_)) {
                    bad = true;
                }
            }
        });
        if bad {
            self.err(
                Code::QuantifierRange,
                key,
                "quantifiers must range over a set",
            );
        }
    }

    fn scheduler(&mut self) {
        let s = &self.model.scheduler;
        let key = DeclKey::Scheduler;
        if s.phases.is_empty() {
            self.err(Code::SchedulerShape, &key, "scheduler declares no phases");
            return;
        }
        if s.initial == s.final_phase && !s.initial.is_empty() {
            self.err(
                Code::SchedulerShape,
                &key,
                "initial and final phases must differ",
            );
        }
        let mut reached: BTreeSet<&str> = BTreeSet::new();
        if s.phases.contains(&s.initial) {
            reached.insert(&s.initial);
        }
        loop {
            let before = reached.len();
            for t in &s.transitions {
                if reached.contains(t.from.as_str()) {
                    reached.insert(&t.to);
                }
            }
            if reached.len() == before {
                break;
            }
        }
        for p in &s.phases {
            if !reached.contains(p.as_str()) {
                self.err(
                    Code::SchedulerShape,
                    &key,
                    format!("phase `{p}` is unreachable from `{}`", s.initial),
                );
            }
        }
        if s.transitions.iter().any(|t| t.from == s.final_phase) {
            self.err(
                Code::SchedulerShape,
                &key,
                "the final phase may not have outgoing transitions",
            );
        }
        for (i, t) in s.transitions.iter().enumerate() {
            let tkey = DeclKey::SchedTrans(i);
            self.no_old(&t.guard, &tkey);
            self.quant_ranges(&t.guard, &tkey);
            for sym in free_symbols(&t.guard) {
                let ok = match &sym.symbol {
                    Symbol::Field { class, field } => match self.model.member(class, field) {
                        Some(MemberKind::Executed) => true,
                        Some(MemberKind::Field(f)) => f.is_event() || f.is_timer(),
                        _ => false,
                    },
                    Symbol::All(_) => true,
                    Symbol::Phase => false,
                };
                if !ok {
                    self.err(
                        Code::SchedulerGuard,
                        &tkey,
                        format!("scheduler guards may only read events, timers and executed flags, not `{}`", sym.symbol),
                    );
                }
            }
        }
    }
}

/// Enforces the language restrictions. Returns warnings on success.
pub fn check(model: &Model, map: &SourceMap) -> Vec<Diagnostic> {
    let mut c = Checker {
        model,
        map,
        out: Vec::new(),
    };
    c.run();
    c.out
}
