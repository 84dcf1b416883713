//! End-to-end task construction shared by the command line and the tests.

use crate::contract::GenOptions;
use crate::frontend::LocalConditions;
use crate::grounding::{
    ground_formula, ground_model, lemma_tasks, GroundOptions, GroundingError, GroundingPlan,
};
use crate::model::*;
use crate::vcgen::{
    build_checks, build_local_contract_tasks_with, encode_all, CheckInputs, VcError,
    VerificationTask,
};

/// Largest cardinality literal expanded in encodings.
pub const CARD_BOUND: i64 = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Vc(#[from] VcError),
    #[error(transparent)]
    Grounding(#[from] GroundingError),
}

/// The global entailment tasks for `inv` and `prop`, encoded.
pub fn global_tasks(
    model: &Model,
    inv: &Expr,
    prop: &Expr,
    gprime: &LocalConditions,
    opts: GenOptions,
) -> Result<Vec<VerificationTask>, VcError> {
    let inputs = CheckInputs {
        model,
        invariant: inv,
        property: prop,
        gprime,
        opts,
    };
    let mut tasks = build_checks(&inputs)?;
    encode_all(model, &mut tasks, CARD_BOUND)?;
    Ok(tasks)
}

/// Tasks checking every class's transitions against its generated contracts, encoded.
pub fn local_tasks(model: &Model, opts: GenOptions) -> Result<Vec<VerificationTask>, VcError> {
    let mut tasks = build_local_contract_tasks_with(model, opts)?;
    encode_all(model, &mut tasks, CARD_BOUND)?;
    Ok(tasks)
}

/// A grounded model with its equivalence lemmas and grounded specifications.
#[derive(Debug, Clone)]
pub struct Grounded {
    pub model: Model,
    pub lemmas: Vec<VerificationTask>,
    pub invariant: Option<Expr>,
    pub property: Option<Expr>,
}

/// Grounds `model` along `plan` and builds the lemmas relating both models,
/// including one per supplied specification formula.
pub fn ground(
    model: &Model,
    plan: &GroundingPlan,
    opts: GroundOptions,
    inv: Option<&Expr>,
    prop: Option<&Expr>,
    gprime: Option<&LocalConditions>,
) -> Result<Grounded, PipelineError> {
    let gm = ground_model(model, plan, opts);
    let mut specs: Vec<(&str, &Expr)> = Vec::new();
    if let Some(i) = inv {
        specs.push(("invariant", i));
    }
    if let Some(p) = prop {
        specs.push(("property", p));
    }
    let mut lemmas = lemma_tasks(model, &gm, plan, opts, &specs, gprime)?;
    encode_all(&gm, &mut lemmas, CARD_BOUND)?;
    Ok(Grounded {
        invariant: inv.map(|e| ground_formula(plan, e)),
        property: prop.map(|e| ground_formula(plan, e)),
        model: gm,
        lemmas,
    })
}
