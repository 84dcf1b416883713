//! Verification conditions: global entailment checks and local contract
//! checks, their SMT-LIB encoding, solver discharge and reporting.

mod checks;
mod local;
mod report;
pub mod sexp;
pub mod smt;
mod solver;

use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;

pub use checks::{build_checks, phase_change_frame, step_frame, CheckInputs};
pub use local::{build_local_contract_tasks, build_local_contract_tasks_with, wp};
pub use report::{report, Report, Verdict};
pub use solver::{
    discharge, discharge_one, CounterModel, ModelObject, SolverConfig, VcResult, VcVerdict,
    SOLVER_ENV,
};

use crate::contract::ContractError;
use crate::frontend::print_expr;
use crate::model::*;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VcError {
    #[error("cardinality literal {k} exceeds the expansion bound {bound}")]
    CardinalityBound { k: i64, bound: i64 },
    #[error("cannot encode: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error("local condition for `{class}` in `{phase}` reads the post-state")]
    PostStateGPrime { class: String, phase: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Establishment,
    Stability,
    SelfLoopPreservation,
    Init,
    PhaseNonFinal,
    PhaseFinal,
    Reset,
    PropertyImplication,
    LocalContract,
    GroundingLemma,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Establishment => "establishment",
            TaskKind::Stability => "stability",
            TaskKind::SelfLoopPreservation => "self-loop",
            TaskKind::Init => "init",
            TaskKind::PhaseNonFinal => "phase-nonfinal",
            TaskKind::PhaseFinal => "phase-final",
            TaskKind::Reset => "reset",
            TaskKind::PropertyImplication => "property",
            TaskKind::LocalContract => "local",
            TaskKind::GroundingLemma => "lemma",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One validity obligation `consts. hypotheses => goal`.
#[derive(Debug, Clone)]
pub struct VerificationTask {
    /// Also the file stem: `<kind>_<class>_<phase>`.
    pub id: String,
    pub kind: TaskKind,
    pub class: String,
    pub phase: String,
    /// Free object constants, universally quantified.
    pub consts: Vec<(String, String)>,
    pub hypotheses: Vec<(String, Expr)>,
    pub goal: Expr,
    pub smt: String,
}

impl VerificationTask {
    pub fn new(kind: TaskKind, class: &str, phase: &str) -> Self {
        let id = format!("{}_{}_{}", kind.as_str(), class, phase);
        VerificationTask {
            id,
            kind,
            class: class.to_string(),
            phase: phase.to_string(),
            consts: vec![],
            hypotheses: vec![],
            goal: Expr::tt(),
            smt: String::new(),
        }
    }

    pub fn with_const(mut self, name: &str, class: &str) -> Self {
        self.consts.push((name.to_string(), class.to_string()));
        self
    }

    pub fn hyp(mut self, label: &str, e: Expr) -> Self {
        self.hypotheses.push((label.to_string(), e));
        self
    }

    pub fn goal(mut self, e: Expr) -> Self {
        self.goal = e;
        self
    }

    /// The closed obligation, constants read as universally quantified.
    pub fn formula(&self) -> Expr {
        Expr::implies(
            Expr::and_all(self.hypotheses.iter().map(|(_, h)| h.clone())),
            self.goal.clone(),
        )
    }

    /// Human-readable rendering of the obligation.
    pub fn render(&self) -> String {
        let mut out = format!("task {}\n", self.id);
        for (n, c) in &self.consts {
            let _ = writeln!(out, "  for all {n} : {c}");
        }
        for (l, h) in &self.hypotheses {
            let _ = writeln!(out, "  assume [{l}] {}", print_expr(h));
        }
        let _ = writeln!(out, "  prove {}", print_expr(&self.goal));
        out
    }

    /// Encodes the task: preamble, constants, then the negated obligation.
    pub fn encode(&mut self, model: &Model, card_bound: i64) -> Result<(), VcError> {
        let mut out = smt::preamble(model, card_bound)?;
        let mut enc = smt::Encoder::new(model, card_bound);
        let mut hyps = Vec::new();
        for (l, h) in &self.hypotheses {
            hyps.push(format!("  ; {l}\n  {}", enc.term(h, Vintage::Post)?));
        }
        let goal = enc.term(&self.goal, Vintage::Post)?;
        for (n, c) in &self.consts {
            let _ = writeln!(out, "(declare-const {} {c})", smt::var_sym(n));
        }
        out.push_str(&enc.fresh_decls());
        let _ = writeln!(out, "; obligation {}", self.id);
        let body = if hyps.is_empty() {
            goal
        } else {
            format!("(=>\n (and\n{}\n )\n {goal})", hyps.join("\n"))
        };
        let _ = writeln!(out, "(assert (not {body}))");
        let _ = writeln!(out, "(check-sat)");
        self.smt = out;
        Ok(())
    }
}

/// Object constant standing for an arbitrary instance.
pub fn inst(name: &str, class: &str) -> Expr {
    Expr::var(name, class)
}

/// Encodes every task. Task constants share the variable namespace, so `Var(c)`
/// in a formula refers to the declared constant.
pub fn encode_all(
    model: &Model,
    tasks: &mut [VerificationTask],
    card_bound: i64,
) -> Result<(), VcError> {
    for t in tasks.iter_mut() {
        t.encode(model, card_bound)?;
    }
    Ok(())
}
