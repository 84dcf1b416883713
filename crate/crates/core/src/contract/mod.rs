//! Local contracts generated from class declarations by symbolic execution.

mod transform;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

pub use transform::{
    effect_formula, epsilon, equal_partial, has_epsilon, is_epsilon, transform_effect, SymbolicMap,
    HAVOC,
};

use crate::frontend::print_expr;
use crate::model::*;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContractError {
    #[error(
        "class `{0}`: effects containing assume/assert are not supported by contract generation"
    )]
    AssumeAssert(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
}

/// Deliberate generator faults, used to show that the oracles notice them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenOptions {
    /// Omit every frame conjunct.
    pub drop_unchanged: bool,
    /// Do not reset consumed events.
    pub drop_event_reset: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind")]
pub enum ContractKind {
    Init,
    Exec { phase: String },
    Tick,
}

impl fmt::Display for ContractKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContractKind::Init => write!(f, "init"),
            ContractKind::Exec { phase } => write!(f, "exec({phase})"),
            ContractKind::Tick => write!(f, "tick"),
        }
    }
}

/// One disjunct of an exec contract: a transition or the stutter case.
#[derive(Debug, Clone, PartialEq)]
pub struct Disjunct {
    /// Transition name, `None` for stutter.
    pub transition: Option<String>,
    pub formula: Expr,
}

/// A generated contract over the receiver `self` of `class`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    pub class: String,
    pub kind: ContractKind,
    /// Non-empty for exec contracts only.
    pub disjuncts: Vec<Disjunct>,
    pub formula: Expr,
}

impl Contract {
    pub fn render(&self) -> String {
        let mut out = format!("contract {} {}:\n", self.class, self.kind);
        if self.disjuncts.is_empty() {
            out.push_str(&format!("  {}\n", print_expr(&self.formula)));
        } else {
            for d in &self.disjuncts {
                let name = d.transition.as_deref().unwrap_or("stutter");
                out.push_str(&format!("  | {name}: {}\n", print_expr(&d.formula)));
            }
        }
        out
    }
}

/// The transitions from the same start location that precede `t` in `phase`.
fn earlier<'a>(class: &'a ClassDecl, t: &Transition) -> impl Iterator<Item = &'a Transition> {
    let (from, phase, index) = (t.from.clone(), t.phase.clone(), t.index);
    class
        .transitions
        .iter()
        .filter(move |u| u.phase == phase && u.from == from && u.index < index)
}

fn at_location(class: &ClassDecl, loc: &str) -> Expr {
    Expr::eq(
        Expr::self_field(&class.name, LOCATION),
        Expr::enum_lit(class.location_enum(), loc),
    )
}

/// The guard conjoined with the negation of every earlier phase-matching
/// guard from the same start location.
pub fn extended_guard(class: &ClassDecl, t: &Transition) -> Expr {
    let negs = earlier(class, t).map(|u| Expr::not(u.guard.clone()));
    Expr::and(t.guard.clone(), Expr::and_all(negs))
}

/// `self.f == old(self.f)`.
fn unchanged_scalar(class: &str, field: &str) -> Expr {
    let f = Expr::self_field(class, field);
    Expr::eq(f.clone(), Expr::old(f))
}

/// `forall x in All_C : x.f == old(x.f)`.
pub fn unchanged_everywhere(class: &str, field: &str) -> Expr {
    let f = Expr::field(Expr::var("x", class), class, field);
    Expr::forall(
        "x",
        class,
        Expr::All(class.to_string()),
        Expr::eq(f.clone(), Expr::old(f)),
    )
}

/// Fields of other instances (or promoted own fields) written in `phase`.
pub fn phase_function_fields(class: &ClassDecl, phase: &str) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for t in class.transitions_in(phase) {
        t.effect.walk(&mut |s| match s {
            Stmt::ForallAssign {
                class: c, field, ..
            }
            | Stmt::ObjAssign {
                class: c, field, ..
            } => {
                out.insert((c.clone(), field.clone()));
            }
            _ => {}
        });
    }
    out
}

/// Frame of one disjunct: own fields outside `written` and footprint function
/// fields outside `written_fns`.
fn unchanged(
    class: &ClassDecl,
    fns: &BTreeSet<(String, String)>,
    written: &BTreeSet<String>,
    written_fns: &BTreeSet<(String, String)>,
) -> Expr {
    let mut parts = Vec::new();
    for f in &class.fields {
        if written.contains(&f.name) || fns.contains(&(class.name.clone(), f.name.clone())) {
            continue;
        }
        parts.push(unchanged_scalar(&class.name, &f.name));
    }
    for (c, f) in fns {
        if written_fns.contains(&(c.clone(), f.clone())) {
            continue;
        }
        if c == &class.name && written.contains(f) {
            // Written here as a scalar of self; every other instance keeps its value.
            let x = Expr::var("x", c);
            let fx = Expr::field(x.clone(), c, f);
            let body = Expr::implies(
                Expr::ne(x, Expr::self_var(c)),
                Expr::eq(fx.clone(), Expr::old(fx)),
            );
            parts.push(Expr::forall("x", c, Expr::All(c.clone()), body));
        } else {
            parts.push(unchanged_everywhere(c, f));
        }
    }
    Expr::and_all(parts)
}

/// The full symbolic map of firing `t`: effect, then location, then event consumption.
pub fn transition_map(
    model: &Model,
    class: &ClassDecl,
    t: &Transition,
    opts: GenOptions,
) -> Result<SymbolicMap, ContractError> {
    let mut stmts = vec![
        t.effect.clone(),
        Stmt::Assign {
            field: LOCATION.into(),
            value: Expr::enum_lit(class.location_enum(), &t.to),
        },
    ];
    if !opts.drop_event_reset {
        for e in guard_events(class, &t.guard) {
            stmts.push(Stmt::Assign {
                field: e,
                value: Expr::ff(),
            });
        }
    }
    let body = Stmt::Seq(stmts);
    if body.has_assume_or_assert() {
        return Err(ContractError::AssumeAssert(class.name.clone()));
    }
    let mut m = SymbolicMap::for_stmt(model, &class.name, &body);
    m.exec(model, &body)?;
    Ok(m)
}

/// Trans_t: enabled in the pre-state, effect, end location, executed, consumed
/// events reset and everything else in the footprint unchanged.
pub fn transition_formula(
    model: &Model,
    class: &ClassDecl,
    t: &Transition,
    opts: GenOptions,
) -> Result<Expr, ContractError> {
    let map = transition_map(model, class, t, opts)?;
    let pre = Expr::old(Expr::and(
        at_location(class, &t.from),
        extended_guard(class, t),
    ));
    let effect = effect_formula(model, &map);
    let written: BTreeSet<String> = map
        .scalars
        .keys()
        .filter(|f| !map.is_identity_scalar(f))
        .cloned()
        .collect();
    let written_fns: BTreeSet<(String, String)> = map
        .functions
        .keys()
        .filter(|(c, f)| !map.is_identity_function(c, f))
        .cloned()
        .collect();
    let fns = phase_function_fields(class, &t.phase);
    let frame = if opts.drop_unchanged {
        Expr::tt()
    } else {
        unchanged(class, &fns, &written, &written_fns)
    };
    Ok(Expr::and_all([
        pre,
        effect,
        Expr::self_field(&class.name, EXECUTED),
        frame,
    ]))
}

/// Stutter: nothing enabled in the pre-state, everything unchanged but executed.
pub fn stutter_formula(class: &ClassDecl, phase: &str, opts: GenOptions) -> Expr {
    let disabled = Expr::and_all(
        class
            .transitions_in(phase)
            .map(|t| Expr::not(Expr::and(at_location(class, &t.from), t.guard.clone()))),
    );
    let fns = phase_function_fields(class, phase);
    let frame = if opts.drop_unchanged {
        Expr::tt()
    } else {
        unchanged(class, &fns, &BTreeSet::new(), &BTreeSet::new())
    };
    Expr::and_all([
        Expr::old(disabled),
        Expr::self_field(&class.name, EXECUTED),
        frame,
    ])
}

fn class_of<'m>(model: &'m Model, class: &str) -> Result<&'m ClassDecl, ContractError> {
    model
        .class(class)
        .ok_or_else(|| ContractError::UnknownClass(class.to_string()))
}

pub fn exec_contract_with(
    model: &Model,
    class: &str,
    phase: &str,
    opts: GenOptions,
) -> Result<Contract, ContractError> {
    let c = class_of(model, class)?;
    let mut disjuncts = Vec::new();
    for t in c.transitions_in(phase) {
        disjuncts.push(Disjunct {
            transition: Some(t.name.clone()),
            formula: transition_formula(model, c, t, opts)?,
        });
    }
    disjuncts.push(Disjunct {
        transition: None,
        formula: stutter_formula(c, phase, opts),
    });
    let formula = Expr::or_all(disjuncts.iter().map(|d| d.formula.clone()));
    Ok(Contract {
        class: class.to_string(),
        kind: ContractKind::Exec {
            phase: phase.to_string(),
        },
        disjuncts,
        formula,
    })
}

/// T_C(p): the disjunction of every phase-matching transition formula and stutter.
pub fn exec_contract(model: &Model, class: &str, phase: &str) -> Result<Contract, ContractError> {
    exec_contract_with(model, class, phase, GenOptions::default())
}

/// I_C: declared initial values, events false, timers inactive, not executed.
pub fn init_contract(model: &Model, class: &str) -> Result<Contract, ContractError> {
    let c = class_of(model, class)?;
    let mut parts = Vec::new();
    for f in &c.fields {
        if f.input {
            continue;
        }
        let lhs = Expr::self_field(class, &f.name);
        match (&f.init, &f.ty) {
            (Some(init), _) => parts.push(Expr::eq(lhs, init.clone())),
            (None, ScalarType::Event) => parts.push(Expr::eq(lhs, Expr::ff())),
            (None, ScalarType::Timer) => parts.push(Expr::eq(lhs, Expr::Inactive)),
            (None, _) => {}
        }
    }
    parts.push(Expr::not(Expr::self_field(class, EXECUTED)));
    let formula = Expr::and_all(parts);
    Ok(Contract {
        class: class.to_string(),
        kind: ContractKind::Init,
        disjuncts: vec![],
        formula,
    })
}

/// K_C: every active timer counts down by one, expiring at one; other fields
/// unchanged. The executed flag is the scheduler's and is not mentioned.
pub fn tick_contract(model: &Model, class: &str) -> Result<Contract, ContractError> {
    let c = class_of(model, class)?;
    let mut parts = Vec::new();
    for f in &c.fields {
        let cur = Expr::self_field(class, &f.name);
        if !f.is_timer() {
            parts.push(unchanged_scalar(class, &f.name));
            continue;
        }
        let left = Expr::old(Expr::Unary(UnOp::TimerRemaining, Box::new(cur.clone())));
        let active = Expr::old(Expr::Unary(UnOp::TimerActive, Box::new(cur.clone())));
        parts.push(Expr::implies(
            Expr::bin(BinOp::Gt, left.clone(), Expr::Int(1)),
            Expr::eq(
                cur.clone(),
                Expr::TimerFrom(Box::new(Expr::bin(BinOp::Sub, left.clone(), Expr::Int(1)))),
            ),
        ));
        parts.push(Expr::implies(
            Expr::eq(left, Expr::Int(1)),
            Expr::eq(cur.clone(), Expr::Inactive),
        ));
        parts.push(Expr::implies(
            Expr::not(active),
            Expr::eq(cur, Expr::Inactive),
        ));
    }
    let formula = Expr::and_all(parts);
    Ok(Contract {
        class: class.to_string(),
        kind: ContractKind::Tick,
        disjuncts: vec![],
        formula,
    })
}

/// Every contract of the model: init, exec per phase, tick, per class.
pub fn all_contracts_with(model: &Model, opts: GenOptions) -> Result<Vec<Contract>, ContractError> {
    let mut out = Vec::new();
    for c in &model.classes {
        out.push(init_contract(model, &c.name)?);
        for p in &model.scheduler.phases {
            out.push(exec_contract_with(model, &c.name, p, opts)?);
        }
        out.push(tick_contract(model, &c.name)?);
    }
    Ok(out)
}

pub fn all_contracts(model: &Model) -> Result<Vec<Contract>, ContractError> {
    all_contracts_with(model, GenOptions::default())
}

/// Text rendering of every contract.
pub fn render_contracts(contracts: &[Contract]) -> String {
    contracts
        .iter()
        .map(Contract::render)
        .collect::<Vec<_>>()
        .join("\n")
}
