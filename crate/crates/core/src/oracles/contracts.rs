//! Generated contracts checked against concrete local steps.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use super::gen::{alternative, random_config, random_state, reachable_states, ConfigGen};
use super::OracleError;
use crate::contract::{
    exec_contract_with, has_epsilon, init_contract, phase_function_fields, tick_contract,
    transition_map, Contract, GenOptions,
};
use crate::model::*;
use crate::sim::{exec_local, init_state, tick_instance, Env, InputProvider, SimRng};

#[derive(Debug, Clone, PartialEq)]
pub struct ContractOracleOptions {
    /// Samples per class and contract kind.
    pub samples: usize,
    pub seed: u64,
    /// Generator faults to inject, for mutation testing of the oracle.
    pub gen: GenOptions,
    /// Number of random configurations sampled from.
    pub configs: usize,
    pub config_gen: ConfigGen,
}

impl Default for ContractOracleOptions {
    fn default() -> Self {
        ContractOracleOptions {
            samples: 1000,
            seed: 0,
            gen: GenOptions::default(),
            configs: 8,
            config_gen: ConfigGen::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractCheck {
    pub class: String,
    pub kind: String,
    pub samples: usize,
    /// Samples whose concrete step satisfies the contract.
    pub sound: usize,
    /// Samples where the contract pins down the step: exactly the fired
    /// disjunct holds, and changing any determined post value falsifies it.
    pub precise: usize,
    /// Samples where the concrete step itself failed (null access, assertion).
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractFailure {
    /// Seed replaying the sample.
    pub sample_seed: u64,
    pub class: String,
    pub kind: String,
    pub instance: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ContractReport {
    pub checks: Vec<ContractCheck>,
    /// First failures, capped.
    pub failures: Vec<ContractFailure>,
}

const MAX_FAILURES: usize = 20;

impl ContractReport {
    fn totals(&self) -> (usize, usize, usize) {
        self.checks.iter().fold((0, 0, 0), |a, c| {
            (a.0 + c.samples - c.skipped, a.1 + c.sound, a.2 + c.precise)
        })
    }

    pub fn soundness_rate(&self) -> f64 {
        let (n, s, _) = self.totals();
        if n == 0 {
            1.0
        } else {
            s as f64 / n as f64
        }
    }

    pub fn precision_rate(&self) -> f64 {
        let (n, _, p) = self.totals();
        if n == 0 {
            1.0
        } else {
            p as f64 / n as f64
        }
    }

    pub fn all_sound(&self) -> bool {
        self.checks.iter().all(|c| c.sound + c.skipped == c.samples)
    }

    pub fn all_precise(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.precise + c.skipped == c.samples)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<12} {:<12} samples {:>5}  sound {:>5}  precise {:>5}  skipped {:>3}\n",
                c.class, c.kind, c.samples, c.sound, c.precise, c.skipped
            ));
        }
        for f in &self.failures {
            out.push_str(&format!(
                "failure [{}] {} {} on {}: {}\n",
                f.sample_seed, f.class, f.kind, f.instance, f.reason
            ));
        }
        out.push_str(&format!(
            "soundness {:.2}%  precision {:.2}%\n",
            100.0 * self.soundness_rate(),
            100.0 * self.precision_rate()
        ));
        out
    }
}

struct Pool {
    cfg: Configuration,
    reachable: Vec<GlobalState>,
}

enum Outcome {
    Skipped,
    Checked {
        sound: bool,
        precise: bool,
        reason: Option<String>,
    },
}

fn holds(
    model: &Model,
    cfg: &Configuration,
    pre: &GlobalState,
    post: &GlobalState,
    o: ObjId,
    e: &Expr,
) -> Result<bool, String> {
    Env::new(model, cfg, post)
        .with_pre(pre)
        .bind(SELF, Value::Obj(o))
        .eval_bool(e)
        .map_err(|err| err.to_string())
}

/// A post-state location that the contract must determine.
struct Target {
    obj: ObjId,
    field: String,
}

fn field_type(model: &Model, class: &str, field: &str) -> ScalarType {
    match model.member(class, field) {
        Some(MemberKind::Field(f)) => f.ty.clone(),
        _ => ScalarType::Bool,
    }
}

/// Checks that changing any target in `post` falsifies `formula`.
fn rigid(
    model: &Model,
    cfg: &Configuration,
    pre: &GlobalState,
    post: &GlobalState,
    o: ObjId,
    formula: &Expr,
    targets: &[Target],
) -> Result<(), String> {
    for t in targets {
        let class = cfg.class_of(t.obj);
        let Some(cur) = post.read(t.obj, &t.field) else {
            continue;
        };
        let Some(alt) = alternative(model, &field_type(model, class, &t.field), &cur) else {
            continue;
        };
        let mut changed = post.clone();
        changed.set(t.obj, &t.field, alt.clone());
        if holds(model, cfg, pre, &changed, o, formula)? {
            return Err(format!(
                "contract also admits {}.{} = {alt}",
                cfg.name(t.obj),
                t.field
            ));
        }
    }
    Ok(())
}

fn check_exec(
    model: &Model,
    pool: &Pool,
    class: &ClassDecl,
    phase: &str,
    contract: &Contract,
    rng: &mut SimRng,
) -> (Outcome, String) {
    let cfg = &pool.cfg;
    let ids = cfg.universe(&class.name);
    let Some(&o) = ids.choose(rng) else {
        return (Outcome::Skipped, String::new());
    };
    let name = cfg.name(o).to_string();
    let at_phase: Vec<&GlobalState> = pool.reachable.iter().filter(|s| s.phase == phase).collect();
    let pre = match at_phase.choose(rng) {
        Some(s) if rng.gen_bool(0.5) => (*s).clone(),
        _ => random_state(model, cfg, phase, rng),
    };
    let Ok((mut post, fired)) = exec_local(model, cfg, &pre, o, phase, rng) else {
        return (Outcome::Skipped, name);
    };
    post.executed[o.0] = true;
    let sound = match holds(model, cfg, &pre, &post, o, &contract.formula) {
        Ok(b) => b,
        Err(e) => {
            return (
                Outcome::Checked {
                    sound: false,
                    precise: false,
                    reason: Some(e),
                },
                name,
            )
        }
    };
    if !sound {
        let t = fired.map(|t| t.name.as_str()).unwrap_or("stutter");
        return (
            Outcome::Checked {
                sound,
                precise: false,
                reason: Some(format!("step `{t}` violates the contract")),
            },
            name,
        );
    }
    let mut true_disjuncts = Vec::new();
    for d in &contract.disjuncts {
        match holds(model, cfg, &pre, &post, o, &d.formula) {
            Ok(true) => true_disjuncts.push(d.transition.clone()),
            Ok(false) => {}
            Err(e) => {
                return (
                    Outcome::Checked {
                        sound,
                        precise: false,
                        reason: Some(e),
                    },
                    name,
                )
            }
        }
    }
    let fired_name = fired.map(|t| t.name.clone());
    if true_disjuncts != vec![fired_name.clone()] {
        let reason = format!("disjuncts {true_disjuncts:?} hold, expected only {fired_name:?}");
        return (
            Outcome::Checked {
                sound,
                precise: false,
                reason: Some(reason),
            },
            name,
        );
    }
    // Post values left open by havoc are not determined by the contract.
    let map = fired.map(|t| transition_map(model, class, t, GenOptions::default()));
    let open = |c: &str, f: &str| -> bool {
        match &map {
            Some(Ok(m)) => {
                m.functions
                    .get(&(c.to_string(), f.to_string()))
                    .is_some_and(has_epsilon)
                    || (c == class.name && m.scalars.get(f).is_some_and(has_epsilon))
            }
            _ => false,
        }
    };
    let mut targets = Vec::new();
    for f in class.mutable_names() {
        if !open(&class.name, f) {
            targets.push(Target {
                obj: o,
                field: f.to_string(),
            });
        }
    }
    for (c, f) in phase_function_fields(class, phase) {
        if open(&c, &f) {
            continue;
        }
        for x in cfg.universe(&c) {
            if x != o {
                targets.push(Target {
                    obj: x,
                    field: f.clone(),
                });
            }
        }
    }
    match rigid(model, cfg, &pre, &post, o, &contract.formula, &targets) {
        Ok(()) => (
            Outcome::Checked {
                sound,
                precise: true,
                reason: None,
            },
            name,
        ),
        Err(e) => (
            Outcome::Checked {
                sound,
                precise: false,
                reason: Some(e),
            },
            name,
        ),
    }
}

fn check_init(
    model: &Model,
    pool: &Pool,
    class: &ClassDecl,
    contract: &Contract,
    seed: u64,
    rng: &mut SimRng,
) -> (Outcome, String) {
    let cfg = &pool.cfg;
    let Some(&o) = cfg.universe(&class.name).choose(rng) else {
        return (Outcome::Skipped, String::new());
    };
    let name = cfg.name(o).to_string();
    let Ok(s) = init_state(model, cfg, &mut InputProvider::random(seed)) else {
        return (Outcome::Skipped, name);
    };
    let sound = match holds(model, cfg, &s, &s, o, &contract.formula) {
        Ok(b) => b,
        Err(e) => {
            return (
                Outcome::Checked {
                    sound: false,
                    precise: false,
                    reason: Some(e),
                },
                name,
            )
        }
    };
    if !sound {
        return (
            Outcome::Checked {
                sound,
                precise: false,
                reason: Some("initial state violates the contract".into()),
            },
            name,
        );
    }
    let targets: Vec<Target> = class
        .mutable_names()
        .into_iter()
        .filter(|f| !model.is_input(&class.name, f))
        .map(|f| Target {
            obj: o,
            field: f.to_string(),
        })
        .collect();
    // Fields are single-state here: perturb pre and post together.
    for t in &targets {
        let Some(cur) = s.read(t.obj, &t.field) else {
            continue;
        };
        let Some(alt) = alternative(model, &field_type(model, &class.name, &t.field), &cur) else {
            continue;
        };
        let mut changed = s.clone();
        changed.set(t.obj, &t.field, alt.clone());
        match holds(model, cfg, &changed, &changed, o, &contract.formula) {
            Ok(false) => {}
            Ok(true) => {
                let reason = format!("contract also admits {}.{} = {alt}", name, t.field);
                return (
                    Outcome::Checked {
                        sound,
                        precise: false,
                        reason: Some(reason),
                    },
                    name,
                );
            }
            Err(e) => {
                return (
                    Outcome::Checked {
                        sound,
                        precise: false,
                        reason: Some(e),
                    },
                    name,
                )
            }
        }
    }
    (
        Outcome::Checked {
            sound,
            precise: true,
            reason: None,
        },
        name,
    )
}

fn check_tick(
    model: &Model,
    pool: &Pool,
    class: &ClassDecl,
    contract: &Contract,
    rng: &mut SimRng,
) -> (Outcome, String) {
    let cfg = &pool.cfg;
    let Some(&o) = cfg.universe(&class.name).choose(rng) else {
        return (Outcome::Skipped, String::new());
    };
    let name = cfg.name(o).to_string();
    let phase = model.scheduler.final_phase.clone();
    let pre = random_state(model, cfg, &phase, rng);
    let mut post = pre.clone();
    tick_instance(model, cfg, &mut post, o);
    let sound = match holds(model, cfg, &pre, &post, o, &contract.formula) {
        Ok(b) => b,
        Err(e) => {
            return (
                Outcome::Checked {
                    sound: false,
                    precise: false,
                    reason: Some(e),
                },
                name,
            )
        }
    };
    if !sound {
        return (
            Outcome::Checked {
                sound,
                precise: false,
                reason: Some("tick violates the contract".into()),
            },
            name,
        );
    }
    let targets: Vec<Target> = class
        .fields
        .iter()
        .map(|f| Target {
            obj: o,
            field: f.name.clone(),
        })
        .collect();
    match rigid(model, cfg, &pre, &post, o, &contract.formula, &targets) {
        Ok(()) => (
            Outcome::Checked {
                sound,
                precise: true,
                reason: None,
            },
            name,
        ),
        Err(e) => (
            Outcome::Checked {
                sound,
                precise: false,
                reason: Some(e),
            },
            name,
        ),
    }
}

fn sample_seed(seed: u64, item: usize, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(((item as u64) << 32) | i as u64)
}

/// Samples random configurations and states, runs init, local exec and tick
/// concretely and checks the generated contracts on the result.
pub fn contract_vs_simulator(
    model: &Model,
    opts: &ContractOracleOptions,
) -> Result<ContractReport, OracleError> {
    let mut rng = SimRng::seed_from_u64(opts.seed);
    let mut pools = Vec::new();
    for k in 0..opts.configs.max(1) {
        let cfg = random_config(model, &opts.config_gen, &mut rng)?;
        let reachable = reachable_states(model, &cfg, 3, opts.seed.wrapping_add(k as u64));
        pools.push(Pool { cfg, reachable });
    }
    let mut report = ContractReport::default();
    let mut item = 0;
    for class in &model.classes {
        let mut contracts = vec![init_contract(model, &class.name)?];
        for p in &model.scheduler.phases {
            contracts.push(exec_contract_with(model, &class.name, p, opts.gen)?);
        }
        contracts.push(tick_contract(model, &class.name)?);
        for contract in &contracts {
            item += 1;
            let kind = contract.kind.to_string();
            let mut check = ContractCheck {
                class: class.name.clone(),
                kind: kind.clone(),
                samples: opts.samples,
                sound: 0,
                precise: 0,
                skipped: 0,
            };
            for i in 0..opts.samples {
                let s = sample_seed(opts.seed, item, i);
                let mut srng = SimRng::seed_from_u64(s);
                let pool = &pools[srng.gen_range(0..pools.len())];
                let (outcome, instance) = match &contract.kind {
                    crate::contract::ContractKind::Init => {
                        check_init(model, pool, class, contract, s, &mut srng)
                    }
                    crate::contract::ContractKind::Exec { phase } => {
                        check_exec(model, pool, class, phase, contract, &mut srng)
                    }
                    crate::contract::ContractKind::Tick => {
                        check_tick(model, pool, class, contract, &mut srng)
                    }
                };
                match outcome {
                    Outcome::Skipped => check.skipped += 1,
                    Outcome::Checked {
                        sound,
                        precise,
                        reason,
                    } => {
                        check.sound += sound as usize;
                        check.precise += precise as usize;
                        if let Some(reason) = reason {
                            if report.failures.len() < MAX_FAILURES {
                                report.failures.push(ContractFailure {
                                    sample_seed: s,
                                    class: class.name.clone(),
                                    kind: kind.clone(),
                                    instance,
                                    reason,
                                });
                            }
                        }
                    }
                }
            }
            report.checks.push(check);
        }
    }
    Ok(report)
}
