//! Random configurations and states.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::OracleError;
use crate::model::*;
use crate::sim::{
    init_state, random_value, satisfies_constraints, step_scheduler, Env, InputProvider,
    OrderPolicy, SimRng,
};

/// Bounds for random configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfigGen {
    pub min_instances: usize,
    pub max_instances: usize,
    /// Rejection-sampling attempts before giving up.
    pub retries: usize,
}

impl Default for ConfigGen {
    fn default() -> Self {
        ConfigGen {
            min_instances: 1,
            max_instances: 4,
            retries: 10_000,
        }
    }
}

/// A set field fixed by a constraint `forall c in All_C : c.s == rhs`.
struct Definition {
    class: String,
    set: String,
    var: String,
    rhs: Expr,
}

fn mentions_field(e: &Expr, class: &str, field: &str) -> bool {
    e.contains(&|x| matches!(x, Expr::Field { class: c, field: f, .. } if c == class && f == field))
}

fn definitions(model: &Model) -> Vec<Definition> {
    let mut out = Vec::new();
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
                let Expr::Binary(BinOp::Eq, l, r) = b else {
                    continue;
                };
                for (lhs, rhs) in [(l, r), (r, l)] {
                    let Expr::Field {
                        obj,
                        class: c,
                        field,
                    } = &**lhs
                    else {
                        continue;
                    };
                    let is_set = model.class(c).and_then(|cd| cd.set(field)).is_some();
                    if c == class
                        && is_set
                        && matches!(&**obj, Expr::Var { name, .. } if name == var)
                        && !mentions_field(rhs, c, field)
                    {
                        out.push(Definition {
                            class: c.clone(),
                            set: field.clone(),
                            var: var.clone(),
                            rhs: (**rhs).clone(),
                        });
                        break;
                    }
                }
            }
        }
    }
    out
}

fn random_param(model: &Model, ty: &ScalarType, rng: &mut SimRng) -> Value {
    match ty {
        ScalarType::Int => Value::Int(rng.gen_range(0..=3)),
        _ => random_value(model, ty, rng),
    }
}

fn attempt(
    model: &Model,
    gen: &ConfigGen,
    defs: &[Definition],
    rng: &mut SimRng,
) -> Result<Configuration, OracleError> {
    let mut cfg = Configuration::default();
    for c in &model.classes {
        let n = rng.gen_range(gen.min_instances..=gen.max_instances.max(gen.min_instances));
        for i in 0..n {
            cfg.add_instance(&format!("{}{i}", c.name.to_lowercase()), &c.name);
        }
    }
    let density = *[0.2, 0.35, 0.5].choose(rng).unwrap();
    for c in &model.classes {
        for o in cfg.universe(&c.name) {
            for s in &c.sets {
                if defs.iter().any(|d| d.class == c.name && d.set == s.name) {
                    continue;
                }
                let members: BTreeSet<ObjId> = cfg
                    .universe(&s.elem)
                    .into_iter()
                    .filter(|_| rng.gen_bool(density))
                    .collect();
                cfg.sets.insert((o, s.name.clone()), members);
            }
            for p in &c.params {
                let v = random_param(model, &p.ty, rng);
                cfg.params.insert((o, p.name.clone()), v);
            }
        }
    }
    let state = crate::sim::empty_state(&cfg);
    for d in defs {
        for o in cfg.universe(&d.class) {
            let v = Env::new(model, &cfg, &state)
                .bind(&d.var, Value::Obj(o))
                .eval(&d.rhs)?;
            if let Value::Set(s) = v {
                cfg.sets.insert((o, d.set.clone()), s);
            }
        }
    }
    Ok(cfg)
}

/// A random configuration satisfying every constraint, by rejection sampling.
/// Sets fixed by a defining equation are computed rather than sampled.
pub fn random_config(
    model: &Model,
    gen: &ConfigGen,
    rng: &mut SimRng,
) -> Result<Configuration, OracleError> {
    let defs = definitions(model);
    for _ in 0..gen.retries.max(1) {
        let cfg = attempt(model, gen, &defs, rng)?;
        if satisfies_constraints(model, &cfg) {
            return Ok(cfg);
        }
    }
    Err(OracleError::NoConfiguration {
        retries: gen.retries,
    })
}

/// A state with every field drawn at random, in `phase`.
pub fn random_state(
    model: &Model,
    cfg: &Configuration,
    phase: &str,
    rng: &mut SimRng,
) -> GlobalState {
    let mut s = GlobalState {
        fields: Vec::with_capacity(cfg.total()),
        executed: vec![false; cfg.total()],
        phase: phase.to_string(),
    };
    for o in cfg.ids() {
        let class = model.class_decl(cfg.class_of(o));
        let vals = class
            .fields
            .iter()
            .map(|f| (f.name.clone(), random_value(model, &f.ty, rng)))
            .collect();
        s.fields.push(vals);
        s.executed[o.0] = rng.gen();
    }
    s
}

/// States visited by a random run of `cycles` cycles (random inputs and orders).
pub fn reachable_states(
    model: &Model,
    cfg: &Configuration,
    cycles: usize,
    seed: u64,
) -> Vec<GlobalState> {
    let mut inputs = InputProvider::random(seed);
    let mut order = OrderPolicy::seeded(seed);
    let mut rng = <SimRng as rand::SeedableRng>::seed_from_u64(seed);
    let Ok(mut s) = init_state(model, cfg, &mut inputs) else {
        return vec![];
    };
    let mut out = vec![s.clone()];
    let mut cycle = 0;
    let limit = 64 * (cycles + 1) * (model.scheduler.transitions.len() + 1);
    for _ in 0..limit {
        if s.phase == model.scheduler.final_phase {
            cycle += 1;
            if cycle >= cycles {
                break;
            }
        }
        match step_scheduler(model, cfg, &s, &mut order, &mut inputs, cycle, &mut rng) {
            Ok((next, _)) => {
                s = next;
                out.push(s.clone());
            }
            Err(_) => break,
        }
    }
    out
}

/// A different value of the same type, if the type has one.
pub fn alternative(model: &Model, ty: &ScalarType, v: &Value) -> Option<Value> {
    Some(match (ty, v) {
        (_, Value::Bool(b)) => Value::Bool(!b),
        (_, Value::Int(i)) => Value::Int(i + 1),
        (ScalarType::Enum(e), Value::Enum(x)) => {
            let vals = model.enum_values(e);
            let i = vals.iter().position(|y| y == x)?;
            if vals.len() < 2 {
                return None;
            }
            Value::Enum(vals[(i + 1) % vals.len()].clone())
        }
        (_, Value::Timer(TimerValue::Inactive)) => Value::Timer(TimerValue::Active(1)),
        (_, Value::Timer(TimerValue::Active(n))) => Value::Timer(TimerValue::Active(n + 1)),
        _ => return None,
    })
}
