//! Configurations (the immutable part of an instance) and global states.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::Value as Json;

use super::decl::{GroundedDecl, Model, ScalarType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TimerValue {
    Inactive,
    /// Remaining cycles, always at least 1.
    Active(u32),
}

impl TimerValue {
    /// `t := n` semantics: non-positive counts leave the timer inactive.
    pub fn from_count(n: i64) -> TimerValue {
        if n >= 1 {
            TimerValue::Active(n.min(u32::MAX as i64) as u32)
        } else {
            TimerValue::Inactive
        }
    }

    pub fn tick(self) -> TimerValue {
        match self {
            TimerValue::Active(n) if n > 1 => TimerValue::Active(n - 1),
            _ => TimerValue::Inactive,
        }
    }

    pub fn remaining(self) -> i64 {
        match self {
            TimerValue::Inactive => 0,
            TimerValue::Active(n) => n as i64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Enum(String),
    Timer(TimerValue),
    Obj(ObjId),
    Null,
    Set(BTreeSet<ObjId>),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    /// Default value of a scalar type, used for unscripted inputs.
    pub fn default_for(model: &Model, ty: &ScalarType) -> Value {
        match ty {
            ScalarType::Int => Value::Int(0),
            ScalarType::Bool | ScalarType::Event => Value::Bool(false),
            ScalarType::Enum(e) => {
                Value::Enum(model.enum_values(e).first().cloned().unwrap_or_default())
            }
            ScalarType::Timer => Value::Timer(TimerValue::Inactive),
        }
    }

    pub fn to_json(&self, cfg: &Configuration) -> Json {
        match self {
            Value::Bool(b) => Json::Bool(*b),
            Value::Int(i) => Json::from(*i),
            Value::Enum(s) => Json::String(s.clone()),
            Value::Timer(TimerValue::Inactive) => Json::String("inactive".into()),
            Value::Timer(TimerValue::Active(n)) => Json::from(*n),
            Value::Obj(o) => Json::String(cfg.name(*o).to_string()),
            Value::Null => Json::Null,
            Value::Set(s) => Json::Array(
                s.iter()
                    .map(|o| Json::String(cfg.name(*o).into()))
                    .collect(),
            ),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Enum(s) => write!(f, "{s}"),
            Value::Timer(TimerValue::Inactive) => write!(f, "inactive"),
            Value::Timer(TimerValue::Active(n)) => write!(f, "active({n})"),
            Value::Obj(o) => write!(f, "#{}", o.0),
            Value::Null => write!(f, "null"),
            Value::Set(s) => {
                let items: Vec<String> = s.iter().map(|o| format!("#{}", o.0)).collect();
                write!(f, "{{{}}}", items.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    pub name: String,
    pub class: String,
}

/// A finite first-order structure: universes plus interpretations of the
/// immutable set-valued and parameter fields.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Configuration {
    pub instances: Vec<Instance>,
    pub sets: BTreeMap<(ObjId, String), BTreeSet<ObjId>>,
    pub params: BTreeMap<(ObjId, String), Value>,
}

static EMPTY: BTreeSet<ObjId> = BTreeSet::new();

impl Configuration {
    pub fn add_instance(&mut self, name: &str, class: &str) -> ObjId {
        self.instances.push(Instance {
            name: name.to_string(),
            class: class.to_string(),
        });
        ObjId(self.instances.len() - 1)
    }

    pub fn ids(&self) -> impl Iterator<Item = ObjId> + '_ {
        (0..self.instances.len()).map(ObjId)
    }

    pub fn universe(&self, class: &str) -> Vec<ObjId> {
        self.ids()
            .filter(|o| self.instances[o.0].class == class)
            .collect()
    }

    pub fn lookup(&self, name: &str) -> Option<ObjId> {
        self.instances
            .iter()
            .position(|i| i.name == name)
            .map(ObjId)
    }

    pub fn name(&self, o: ObjId) -> &str {
        &self.instances[o.0].name
    }

    pub fn class_of(&self, o: ObjId) -> &str {
        &self.instances[o.0].class
    }

    pub fn set(&self, o: ObjId, field: &str) -> &BTreeSet<ObjId> {
        self.sets.get(&(o, field.to_string())).unwrap_or(&EMPTY)
    }

    pub fn param(&self, o: ObjId, field: &str) -> Option<&Value> {
        self.params.get(&(o, field.to_string()))
    }

    /// Value of a grounded field: the unique member of its source set, or null.
    pub fn grounded(&self, o: ObjId, g: &GroundedDecl) -> Value {
        let s = self.set(o, &g.source);
        match s.len() {
            1 => Value::Obj(*s.iter().next().unwrap()),
            _ => Value::Null,
        }
    }

    pub fn total(&self) -> usize {
        self.instances.len()
    }
}

/// Mutable global state: per-instance scalar valuations, executed flags and
/// the scheduler phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlobalState {
    pub fields: Vec<BTreeMap<String, Value>>,
    pub executed: Vec<bool>,
    pub phase: String,
}

impl GlobalState {
    pub fn get(&self, o: ObjId, field: &str) -> Option<&Value> {
        if field == super::EXECUTED {
            return None;
        }
        self.fields.get(o.0)?.get(field)
    }

    pub fn set(&mut self, o: ObjId, field: &str, v: Value) {
        if field == super::EXECUTED {
            self.executed[o.0] = v.as_bool().unwrap_or(false);
        } else {
            self.fields[o.0].insert(field.to_string(), v);
        }
    }

    /// Reads a mutable field, including the executed flag.
    pub fn read(&self, o: ObjId, field: &str) -> Option<Value> {
        if field == super::EXECUTED {
            return self.executed.get(o.0).map(|b| Value::Bool(*b));
        }
        self.get(o, field).cloned()
    }

    pub fn to_json(&self, cfg: &Configuration) -> Json {
        let mut m = serde_json::Map::new();
        let mut order: Vec<ObjId> = cfg.ids().collect();
        order.sort_by(|a, b| cfg.name(*a).cmp(cfg.name(*b)));
        for o in order {
            let mut inst = serde_json::Map::new();
            for (k, v) in &self.fields[o.0] {
                inst.insert(k.clone(), v.to_json(cfg));
            }
            inst.insert(super::EXECUTED.to_string(), Json::Bool(self.executed[o.0]));
            let sorted: BTreeMap<String, Json> = inst.into_iter().collect();
            m.insert(
                cfg.name(o).to_string(),
                serde_json::to_value(sorted).unwrap(),
            );
        }
        Json::Object(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timer_tick_rules() {
        assert_eq!(TimerValue::Active(3).tick(), TimerValue::Active(2));
        assert_eq!(TimerValue::Active(1).tick(), TimerValue::Inactive);
        assert_eq!(TimerValue::Inactive.tick(), TimerValue::Inactive);
        assert_eq!(TimerValue::from_count(0), TimerValue::Inactive);
        assert_eq!(TimerValue::from_count(2), TimerValue::Active(2));
    }
}
