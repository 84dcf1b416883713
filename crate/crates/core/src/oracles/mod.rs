//! Differential-testing harnesses tying contracts, verification conditions,
//! grounding and the simulator together.

mod contracts;
mod effects;
mod gen;
mod reach;

pub use contracts::{
    contract_vs_simulator, ContractCheck, ContractFailure, ContractOracleOptions, ContractReport,
};
pub use effects::{
    effect_oracle, effect_test_model, EffectGen, EffectMismatch, EffectReport, EFFECT_TEST_MODEL,
};
pub use gen::{alternative, random_config, random_state, reachable_states, ConfigGen};
pub use reach::{
    bounded_reachability_check, ReachOptions, ReachReport, ReachViolation, TraceStep, ViolationKind,
};

use crate::contract::ContractError;
use crate::model::*;
use crate::sim::{InputProvider, OrderPolicy, SimError, Simulator};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("no configuration satisfying the constraints found in {retries} attempts")]
    NoConfiguration { retries: usize },
    #[error("{instances} instances exceed the exploration cap of {cap}")]
    TooManyInstances { instances: usize, cap: usize },
    #[error("{combinations} input combinations exceed the cap of {cap}")]
    TooManyInputs { combinations: usize, cap: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Contract(#[from] ContractError),
}

/// Outcome of running two models side by side on one seed.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct TraceComparison {
    pub seed: u64,
    pub identical: bool,
    /// First differing line of the JSON-lines traces.
    pub first_difference: Option<usize>,
}

/// Simulates `a` and `b` on the same configuration, seeds, random inputs and
/// random orders, and compares the traces line by line.
pub fn trace_agreement(
    a: &Model,
    b: &Model,
    cfg: &Configuration,
    seeds: &[u64],
    cycles: usize,
) -> Result<Vec<TraceComparison>, OracleError> {
    let mut out = Vec::new();
    for &seed in seeds {
        let run = |m: &Model| -> Result<String, SimError> {
            let mut sim = Simulator::new(
                m,
                cfg,
                OrderPolicy::seeded(seed),
                InputProvider::random(seed),
                seed,
            );
            Ok(sim.run(cycles, &[])?.trace.to_jsonl(cfg))
        };
        let (ta, tb) = (run(a)?, run(b)?);
        let first_difference = ta
            .lines()
            .zip(tb.lines())
            .position(|(x, y)| x != y)
            .or_else(|| {
                let (na, nb) = (ta.lines().count(), tb.lines().count());
                (na != nb).then_some(na.min(nb))
            });
        out.push(TraceComparison {
            seed,
            identical: first_difference.is_none(),
            first_difference,
        });
    }
    Ok(out)
}
