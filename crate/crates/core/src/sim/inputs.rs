use std::collections::BTreeMap;

use rand::SeedableRng;
use serde_json::Value as Json;

use super::{random_value, SimError, SimRng};
use crate::model::*;

/// Source of input-field values at initialization and at each reset.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum InputProvider {
    /// Per-cycle assignments `instance -> field -> value`. The last entry
    /// persists; unscripted inputs take their type default.
    Scripted(Vec<BTreeMap<String, BTreeMap<String, Value>>>),
    Random(SimRng),
}

impl InputProvider {
    pub fn defaults() -> InputProvider {
        InputProvider::Scripted(vec![])
    }

    pub fn random(seed: u64) -> InputProvider {
        InputProvider::Random(SimRng::seed_from_u64(seed))
    }

    /// Parses a script: a JSON object (one cycle) or a list of objects.
    pub fn from_json(
        model: &Model,
        cfg: &Configuration,
        text: &str,
    ) -> Result<InputProvider, SimError> {
        let j: Json = serde_json::from_str(text).map_err(|e| SimError::BadInputs(e.to_string()))?;
        let items = match j {
            Json::Array(v) => v,
            o @ Json::Object(_) => vec![o],
            _ => {
                return Err(SimError::BadInputs(
                    "expected an object or a list of objects".into(),
                ))
            }
        };
        let mut cycles = Vec::new();
        for item in items {
            let Json::Object(insts) = item else {
                return Err(SimError::BadInputs(
                    "each cycle entry must be an object".into(),
                ));
            };
            let mut entry = BTreeMap::new();
            for (inst, fields) in insts {
                let o = cfg
                    .lookup(&inst)
                    .ok_or_else(|| SimError::BadInputs(format!("unknown instance `{inst}`")))?;
                let class = model.class_decl(cfg.class_of(o));
                let Json::Object(fields) = fields else {
                    return Err(SimError::BadInputs(format!(
                        "inputs of `{inst}` must be an object"
                    )));
                };
                let mut vals = BTreeMap::new();
                for (f, v) in fields {
                    let decl = class.field(&f).filter(|d| d.input).ok_or_else(|| {
                        SimError::BadInputs(format!("`{inst}.{f}` is not an input field"))
                    })?;
                    vals.insert(
                        f.clone(),
                        json_value(model, &decl.ty, &v).ok_or_else(|| {
                            SimError::BadInputs(format!("bad value {v} for `{inst}.{f}`"))
                        })?,
                    );
                }
                entry.insert(inst, vals);
            }
            cycles.push(entry);
        }
        Ok(InputProvider::Scripted(cycles))
    }

    /// Sets every input field of every instance for cycle `cycle`.
    pub fn provide(
        &mut self,
        model: &Model,
        cfg: &Configuration,
        cycle: usize,
        s: &mut GlobalState,
    ) -> Result<(), SimError> {
        for o in cfg.ids() {
            let class = model.class_decl(cfg.class_of(o));
            for f in class.fields.iter().filter(|f| f.input) {
                let v = match self {
                    InputProvider::Scripted(cycles) => cycles
                        .get(cycle.min(cycles.len().saturating_sub(1)))
                        .and_then(|e| e.get(cfg.name(o)))
                        .and_then(|m| m.get(&f.name))
                        .cloned()
                        .unwrap_or_else(|| Value::default_for(model, &f.ty)),
                    InputProvider::Random(rng) => random_value(model, &f.ty, rng),
                };
                s.set(o, &f.name, v);
            }
        }
        Ok(())
    }
}

fn json_value(model: &Model, ty: &ScalarType, v: &Json) -> Option<Value> {
    match (ty, v) {
        (ScalarType::Bool, Json::Bool(b)) => Some(Value::Bool(*b)),
        (ScalarType::Int, Json::Number(n)) => n.as_i64().map(Value::Int),
        (ScalarType::Enum(e), Json::String(s)) if model.enum_values(e).contains(s) => {
            Some(Value::Enum(s.clone()))
        }
        _ => None,
    }
}
