//! Grounding: replacing set fields known to hold at most one element by
//! object-valued fields, and the lemmas showing the rewrite changes nothing.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::contract::{exec_contract, ContractError};
use crate::frontend::LocalConditions;
use crate::model::*;
use crate::vcgen::{TaskKind, VerificationTask};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroundingError {
    #[error("`{class}.{set}` is not a set field")]
    NotASet { class: String, set: String },
    #[error("no constraint bounds `{class}.{set}` to at most one element")]
    NotUnit { class: String, set: String },
    #[error(transparent)]
    Contract(#[from] ContractError),
}

/// One set field to be grounded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanEntry {
    pub class: String,
    pub set: String,
    pub elem: String,
    /// Name of the new object-valued field.
    pub field: String,
    /// The set may be empty, so the field may be null.
    pub nullable: bool,
    /// Constraint justifying the entry.
    pub constraint: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GroundingPlan {
    pub entries: Vec<PlanEntry>,
}

/// Test-only faults in the rewrite.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GroundOptions {
    /// Omit the `!= null` guard for nullable fields.
    pub drop_null_guard: bool,
}

/// Reads `|c.s| op k` under `forall c in All_C`, returning the set and
/// whether the set may be empty. Only bounds of at most one qualify.
fn unit_bound(var: &str, class: &str, e: &Expr) -> Option<(String, bool)> {
    let Expr::Binary(op, a, b) = e else {
        return None;
    };
    let (card, k, op) = match (&**a, &**b) {
        (Expr::Unary(UnOp::Card, s), Expr::Int(k)) => (s, *k, *op),
        (Expr::Int(k), Expr::Unary(UnOp::Card, s)) => (s, *k, flip(*op)?),
        _ => return None,
    };
    let Expr::Field {
        obj,
        class: c,
        field,
    } = &**card
    else {
        return None;
    };
    if c != class || !matches!(&**obj, Expr::Var { name, .. } if name == var) {
        return None;
    }
    let nullable = match (op, k) {
        (BinOp::Eq, 1) => false,
        (BinOp::Le, 1) | (BinOp::Lt, 2) => true,
        _ => return None,
    };
    Some((field.clone(), nullable))
}

fn flip(op: BinOp) -> Option<BinOp> {
    Some(match op {
        BinOp::Eq => BinOp::Eq,
        BinOp::Le => BinOp::Ge,
        BinOp::Ge => BinOp::Le,
        BinOp::Lt => BinOp::Gt,
        BinOp::Gt => BinOp::Lt,
        _ => return None,
    })
}

/// Name for the grounded field: the set name without a trailing `s`, or with
/// `Obj` appended, made distinct from every member of the class.
fn grounded_name(class: &ClassDecl, set: &str, taken: &BTreeSet<String>) -> String {
    let base = match set.strip_suffix('s') {
        Some(b) if !b.is_empty() => b.to_string(),
        _ => format!("{set}Obj"),
    };
    let mut all: BTreeSet<String> = taken.clone();
    all.extend(class.fields.iter().map(|f| f.name.clone()));
    all.extend(class.params.iter().map(|p| p.name.clone()));
    all.extend(class.sets.iter().map(|s| s.name.clone()));
    all.extend(class.grounded.iter().map(|g| g.name.clone()));
    all.insert(EXECUTED.to_string());
    fresh_name(&base, &all)
}

/// Every set field bounded to at most one element by a configuration
/// constraint. Exact bounds win over upper bounds.
pub fn plan(model: &Model) -> GroundingPlan {
    let mut entries: Vec<PlanEntry> = Vec::new();
    for g in &model.constraints {
        for conj in g.expr.conjuncts() {
            let Expr::Quant {
                q: Quantifier::Forall,
                var,
                class,
                set,
                body,
            } = conj
            else {
                continue;
            };
            if **set != Expr::All(class.clone()) {
                continue;
            }
            for b in body.conjuncts() {
                let Some((s, nullable)) = unit_bound(var, class, b) else {
                    continue;
                };
                let Some(cd) = model.class(class) else {
                    continue;
                };
                let Some(sd) = cd.set(&s) else { continue };
                if let Some(e) = entries.iter_mut().find(|e| e.class == *class && e.set == s) {
                    if e.nullable && !nullable {
                        e.nullable = false;
                        e.constraint = g.name.clone();
                    }
                    continue;
                }
                let taken = entries
                    .iter()
                    .filter(|e| e.class == *class)
                    .map(|e| e.field.clone())
                    .collect();
                entries.push(PlanEntry {
                    class: class.clone(),
                    set: s.clone(),
                    elem: sd.elem.clone(),
                    field: grounded_name(cd, &s, &taken),
                    nullable,
                    constraint: g.name.clone(),
                });
            }
        }
    }
    GroundingPlan { entries }
}

impl GroundingPlan {
    /// Keeps only the requested `Class.set` entries.
    pub fn restrict(
        &self,
        model: &Model,
        wanted: &[String],
    ) -> Result<GroundingPlan, GroundingError> {
        let mut entries = Vec::new();
        for w in wanted {
            let (class, set) = w.split_once('.').unwrap_or(("", w));
            if model.class(class).and_then(|c| c.set(set)).is_none() {
                return Err(GroundingError::NotASet {
                    class: class.into(),
                    set: set.into(),
                });
            }
            match self
                .entries
                .iter()
                .find(|e| e.class == class && e.set == set)
            {
                Some(e) => entries.push(e.clone()),
                None => {
                    return Err(GroundingError::NotUnit {
                        class: class.into(),
                        set: set.into(),
                    })
                }
            }
        }
        Ok(GroundingPlan { entries })
    }

    fn entry_for(&self, set: &Expr) -> Option<(&PlanEntry, Expr)> {
        let Expr::Field { obj, class, field } = set else {
            return None;
        };
        let e = self
            .entries
            .iter()
            .find(|e| &e.class == class && &e.set == field)?;
        Some((e, Expr::field((**obj).clone(), class, &e.field)))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Rewrites a formula over grounded sets to use the grounded fields.
pub struct Grounder<'p> {
    pub plan: &'p GroundingPlan,
    pub opts: GroundOptions,
}

impl Grounder<'_> {
    fn non_null(&self, e: &PlanEntry, g: &Expr) -> Option<Expr> {
        (e.nullable && !self.opts.drop_null_guard)
            .then(|| Expr::ne(g.clone(), Expr::Null(e.elem.clone())))
    }

    /// Membership `x in set`, grounded where possible.
    fn member(&self, x: &Expr, set: &Expr) -> Option<Expr> {
        if let Expr::Binary(BinOp::Union, a, b) = set {
            let ma = self
                .member(x, a)
                .unwrap_or_else(|| Expr::bin(BinOp::In, x.clone(), self.formula(a)));
            let mb = self
                .member(x, b)
                .unwrap_or_else(|| Expr::bin(BinOp::In, x.clone(), self.formula(b)));
            return Some(Expr::or(ma, mb));
        }
        let (e, g) = self.plan.entry_for(set)?;
        let eq = Expr::eq(x.clone(), g.clone());
        Some(match self.non_null(e, &g) {
            Some(nn) => Expr::and(nn, eq),
            None => eq,
        })
    }

    pub fn formula(&self, e: &Expr) -> Expr {
        match e {
            Expr::Quant {
                q, var, set, body, ..
            } => {
                if let Some((entry, g)) = self.plan.entry_for(set) {
                    let inner = self.formula(&body.subst_var(var, &g));
                    return match (self.non_null(entry, &g), q) {
                        (None, _) => inner,
                        (Some(nn), Quantifier::Forall) => Expr::implies(nn, inner),
                        (Some(nn), Quantifier::Exists) => Expr::and(nn, inner),
                    };
                }
                e.map_children(&mut |c| self.formula(c))
            }
            Expr::Binary(BinOp::In, x, set) => {
                let x = self.formula(x);
                self.member(&x, set)
                    .unwrap_or_else(|| Expr::bin(BinOp::In, x, self.formula(set)))
            }
            Expr::Unary(UnOp::Card, set) => match self.plan.entry_for(set) {
                Some((entry, g)) => match self.non_null(entry, &g) {
                    Some(nn) => Expr::ite(nn, Expr::Int(1), Expr::Int(0)),
                    None => Expr::Int(1),
                },
                None => e.map_children(&mut |c| self.formula(c)),
            },
            Expr::Binary(BinOp::Subset, a, b) => match self.plan.entry_for(a) {
                Some((entry, g)) => {
                    let inside = self
                        .member(&g, b)
                        .unwrap_or_else(|| Expr::bin(BinOp::In, g.clone(), self.formula(b)));
                    match self.non_null(entry, &g) {
                        Some(nn) => Expr::implies(nn, inside),
                        None => inside,
                    }
                }
                None => e.map_children(&mut |c| self.formula(c)),
            },
            Expr::Binary(BinOp::Disjoint, a, b) => {
                let (entry, g, other) = match (self.plan.entry_for(a), self.plan.entry_for(b)) {
                    (Some((en, g)), _) => (en, g, b),
                    (None, Some((en, g))) => (en, g, a),
                    _ => return e.map_children(&mut |c| self.formula(c)),
                };
                let inside = self
                    .member(&g, other)
                    .unwrap_or_else(|| Expr::bin(BinOp::In, g.clone(), self.formula(other)));
                match self.non_null(entry, &g) {
                    Some(nn) => Expr::implies(nn, Expr::not(inside)),
                    None => Expr::not(inside),
                }
            }
            // Anything else over a grounded set stays on the retained ghost set.
            _ => e.map_children(&mut |c| self.formula(c)),
        }
    }

    pub fn stmt(&self, s: &Stmt) -> Stmt {
        match s {
            Stmt::Seq(v) => Stmt::Seq(v.iter().map(|x| self.stmt(x)).collect()),
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => Stmt::If {
                cond: self.formula(cond),
                then_branch: Box::new(self.stmt(then_branch)),
                else_branch: Box::new(self.stmt(else_branch)),
            },
            Stmt::ForallAssign {
                var,
                class,
                set,
                field,
                value,
            } => {
                if let Some((entry, g)) = self.plan.entry_for(set) {
                    let assign = Stmt::ObjAssign {
                        target: g.clone(),
                        class: class.clone(),
                        field: field.clone(),
                        value: self.formula(&value.subst_var(var, &g)),
                    };
                    return match self.non_null(entry, &g) {
                        Some(nn) => Stmt::If {
                            cond: nn,
                            then_branch: Box::new(assign),
                            else_branch: Box::new(Stmt::Seq(vec![])),
                        },
                        None => assign,
                    };
                }
                Stmt::ForallAssign {
                    var: var.clone(),
                    class: class.clone(),
                    set: self.formula(set),
                    field: field.clone(),
                    value: self.formula(value),
                }
            }
            Stmt::Assign { field, value } => Stmt::Assign {
                field: field.clone(),
                value: self.formula(value),
            },
            Stmt::ObjAssign {
                target,
                class,
                field,
                value,
            } => Stmt::ObjAssign {
                target: self.formula(target),
                class: class.clone(),
                field: field.clone(),
                value: self.formula(value),
            },
            Stmt::Assume(e) => Stmt::Assume(self.formula(e)),
            Stmt::Assert(e) => Stmt::Assert(self.formula(e)),
            Stmt::Havoc { .. } => s.clone(),
        }
    }
}

/// `forall c in All_C : (forall x in c.s : x == c.g) && (c.g != null ==> c.g in c.s)`:
/// the grounded field is the unique member of its set, or null when empty.
pub fn linking_condition(e: &PlanEntry) -> Expr {
    let c = Expr::var("c", &e.class);
    let g = Expr::field(c.clone(), &e.class, &e.field);
    let s = Expr::field(c.clone(), &e.class, &e.set);
    let x = Expr::var("x", &e.elem);
    let every = Expr::forall("x", &e.elem, s.clone(), Expr::eq(x, g.clone()));
    let some = Expr::implies(
        Expr::ne(g.clone(), Expr::Null(e.elem.clone())),
        Expr::bin(BinOp::In, g, s),
    );
    Expr::forall(
        "c",
        &e.class,
        Expr::All(e.class.clone()),
        Expr::and(every, some),
    )
}

/// The grounded model: grounded fields added, their sets made ghost, guards,
/// effects and scheduler guards rewritten, linking conditions added to the
/// configuration constraints.
pub fn ground_model(model: &Model, plan: &GroundingPlan, opts: GroundOptions) -> Model {
    let gr = Grounder { plan, opts };
    let mut m = model.clone();
    for c in &mut m.classes {
        for e in plan.entries.iter().filter(|e| e.class == c.name) {
            if let Some(s) = c.sets.iter_mut().find(|s| s.name == e.set) {
                s.ghost = true;
            }
            c.grounded.push(GroundedDecl {
                name: e.field.clone(),
                class: e.elem.clone(),
                source: e.set.clone(),
                nullable: e.nullable,
            });
        }
        for t in &mut c.transitions {
            t.guard = gr.formula(&t.guard);
            t.effect = gr.stmt(&t.effect);
        }
    }
    for t in &mut m.scheduler.transitions {
        t.guard = gr.formula(&t.guard);
    }
    for e in &plan.entries {
        m.constraints.push(Constraint {
            name: format!("Link_{}_{}", e.class, e.set),
            expr: linking_condition(e),
        });
    }
    m
}

/// Grounds a formula with the default options.
pub fn ground_formula(plan: &GroundingPlan, e: &Expr) -> Expr {
    Grounder {
        plan,
        opts: GroundOptions::default(),
    }
    .formula(e)
}

fn iff(a: Expr, b: Expr) -> Expr {
    Expr::bin(BinOp::Iff, a, b)
}

/// Equivalence lemmas between the original and grounded artefacts, to be
/// encoded against the grounded model (whose constraints carry the links).
pub fn lemma_tasks(
    original: &Model,
    grounded: &Model,
    plan: &GroundingPlan,
    opts: GroundOptions,
    specs: &[(&str, &Expr)],
    gprime: Option<&LocalConditions>,
) -> Result<Vec<VerificationTask>, GroundingError> {
    let gr = Grounder { plan, opts };
    let mut tasks = Vec::new();
    for c in &original.classes {
        let me = Expr::self_var(&c.name);
        let exists = Expr::bin(BinOp::In, me, Expr::All(c.name.clone()));
        for p in &original.scheduler.phases {
            if c.transitions_in(p).next().is_none() {
                continue;
            }
            let t0 = exec_contract(original, &c.name, p)?.formula;
            let t1 = exec_contract(grounded, &c.name, p)?.formula;
            tasks.push(
                VerificationTask::new(TaskKind::GroundingLemma, &c.name, &format!("contract-{p}"))
                    .with_const(SELF, &c.name)
                    .hyp("self exists", exists.clone())
                    .goal(iff(t1, t0)),
            );
            if let Some(gp) = gprime {
                let g0 = gp.get(p, &c.name);
                tasks.push(
                    VerificationTask::new(
                        TaskKind::GroundingLemma,
                        &c.name,
                        &format!("gprime-{p}"),
                    )
                    .with_const(SELF, &c.name)
                    .hyp("self exists", exists.clone())
                    .goal(iff(gr.formula(&g0), g0)),
                );
            }
        }
    }
    for (i, t) in original.scheduler.transitions.iter().enumerate() {
        tasks.push(
            VerificationTask::new(
                TaskKind::GroundingLemma,
                "global",
                &format!("guard{i}-{}-{}", t.from, t.to),
            )
            .goal(iff(gr.formula(&t.guard), t.guard.clone())),
        );
    }
    for (name, e) in specs {
        tasks.push(
            VerificationTask::new(TaskKind::GroundingLemma, "global", name)
                .goal(iff(gr.formula(e), (*e).clone())),
        );
    }
    Ok(tasks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(nullable: bool) -> GroundingPlan {
        GroundingPlan {
            entries: vec![PlanEntry {
                class: "C".into(),
                set: "items".into(),
                elem: "D".into(),
                field: "item".into(),
                nullable,
                constraint: "G".into(),
            }],
        }
    }

    #[test]
    fn quantifier_over_unit_set_is_instantiated() {
        let p = entry(false);
        let body = Expr::field(Expr::var("x", "D"), "D", "flag");
        let e = Expr::forall("x", "D", Expr::self_field("C", "items"), body);
        let g = ground_formula(&p, &e);
        assert_eq!(g, Expr::field(Expr::self_field("C", "item"), "D", "flag"));
    }

    #[test]
    fn nullable_quantifier_is_guarded() {
        let p = entry(true);
        let body = Expr::field(Expr::var("x", "D"), "D", "flag");
        let e = Expr::exists("x", "D", Expr::self_field("C", "items"), body);
        let g = ground_formula(&p, &e);
        let item = Expr::self_field("C", "item");
        assert_eq!(
            g,
            Expr::and(
                Expr::ne(item.clone(), Expr::Null("D".into())),
                Expr::field(item, "D", "flag")
            )
        );
    }

    #[test]
    fn name_rule() {
        let c = ClassDecl {
            name: "C".into(),
            fields: vec![],
            params: vec![],
            sets: vec![],
            grounded: vec![],
            transitions: vec![],
        };
        assert_eq!(grounded_name(&c, "sensors", &BTreeSet::new()), "sensor");
        assert_eq!(grounded_name(&c, "peer", &BTreeSet::new()), "peerObj");
        let taken = BTreeSet::from(["sensor".to_string()]);
        assert_ne!(grounded_name(&c, "sensors", &taken), "sensor");
    }
}
