//! Concrete evaluation of expressions and two-state formulas.

use std::collections::BTreeSet;

use super::SimError;
use crate::model::*;

/// Evaluation context: configuration, current state, optional pre-state and
/// bound object variables.
pub struct Env<'a> {
    pub model: &'a Model,
    pub cfg: &'a Configuration,
    pub state: &'a GlobalState,
    pub pre: Option<&'a GlobalState>,
    pub vars: Vec<(String, Value)>,
}

impl<'a> Env<'a> {
    pub fn new(model: &'a Model, cfg: &'a Configuration, state: &'a GlobalState) -> Env<'a> {
        Env {
            model,
            cfg,
            state,
            pre: None,
            vars: Vec::new(),
        }
    }

    pub fn with_pre(mut self, pre: &'a GlobalState) -> Env<'a> {
        self.pre = Some(pre);
        self
    }

    pub fn bind(mut self, name: &str, v: Value) -> Env<'a> {
        self.vars.push((name.to_string(), v));
        self
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Value, SimError> {
        eval(self, e, false)
    }

    pub fn eval_bool(&mut self, e: &Expr) -> Result<bool, SimError> {
        as_bool(self.eval(e)?)
    }
}

fn as_bool(v: Value) -> Result<bool, SimError> {
    v.as_bool()
        .ok_or_else(|| SimError::Type(format!("expected Bool, found {v}")))
}

fn as_int(v: Value) -> Result<i64, SimError> {
    v.as_int()
        .ok_or_else(|| SimError::Type(format!("expected Int, found {v}")))
}

fn as_set(v: Value) -> Result<BTreeSet<ObjId>, SimError> {
    match v {
        Value::Set(s) => Ok(s),
        v => Err(SimError::Type(format!("expected a set, found {v}"))),
    }
}

fn as_obj(v: Value) -> Result<ObjId, SimError> {
    match v {
        Value::Obj(o) => Ok(o),
        Value::Null => Err(SimError::Unbound("field access on null".into())),
        v => Err(SimError::Type(format!("expected an object, found {v}"))),
    }
}

fn eval(env: &mut Env<'_>, e: &Expr, in_old: bool) -> Result<Value, SimError> {
    let state = if in_old {
        env.pre
            .ok_or_else(|| SimError::Unbound("old(..) without a pre-state".into()))?
    } else {
        env.state
    };
    Ok(match e {
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Int(n) => Value::Int(*n),
        Expr::EnumLit { value, .. } => Value::Enum(value.clone()),
        Expr::Inactive => Value::Timer(TimerValue::Inactive),
        Expr::Null(_) => Value::Null,
        Expr::Var { name, .. } => env
            .vars
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| SimError::Unbound(name.clone()))?,
        Expr::Field { obj, class, field } => {
            let o = as_obj(eval(env, obj, in_old)?)?;
            match env.model.member(class, field) {
                Some(MemberKind::Field(_)) | Some(MemberKind::Executed) => state
                    .read(o, field)
                    .ok_or_else(|| SimError::Unbound(format!("{}.{field}", env.cfg.name(o))))?,
                Some(MemberKind::Param(_)) => env
                    .cfg
                    .param(o, field)
                    .cloned()
                    .ok_or_else(|| SimError::Unbound(format!("{}.{field}", env.cfg.name(o))))?,
                Some(MemberKind::Set(_)) => Value::Set(env.cfg.set(o, field).clone()),
                Some(MemberKind::Grounded(g)) => env.cfg.grounded(o, g),
                None => return Err(SimError::Unbound(format!("{class}.{field}"))),
            }
        }
        Expr::Phase => Value::Enum(state.phase.clone()),
        Expr::All(c) => Value::Set(env.cfg.universe(c).into_iter().collect()),
        Expr::SetLit { elems, .. } => {
            let mut s = BTreeSet::new();
            for x in elems {
                s.insert(as_obj(eval(env, x, in_old)?)?);
            }
            Value::Set(s)
        }
        Expr::Unary(op, a) => {
            let v = eval(env, a, in_old)?;
            match op {
                UnOp::Not => Value::Bool(!as_bool(v)?),
                UnOp::Neg => Value::Int(-as_int(v)?),
                UnOp::Card => Value::Int(as_set(v)?.len() as i64),
                UnOp::TimerActive => match v {
                    Value::Timer(t) => Value::Bool(t != TimerValue::Inactive),
                    v => return Err(SimError::Type(format!("expected Timer, found {v}"))),
                },
                UnOp::TimerRemaining => match v {
                    Value::Timer(t) => Value::Int(t.remaining()),
                    v => return Err(SimError::Type(format!("expected Timer, found {v}"))),
                },
            }
        }
        Expr::Binary(op, a, b) => {
            // Short-circuit connectives so guarded null dereferences stay total.
            match op {
                BinOp::And => {
                    return Ok(Value::Bool(
                        as_bool(eval(env, a, in_old)?)? && as_bool(eval(env, b, in_old)?)?,
                    ))
                }
                BinOp::Or => {
                    return Ok(Value::Bool(
                        as_bool(eval(env, a, in_old)?)? || as_bool(eval(env, b, in_old)?)?,
                    ))
                }
                BinOp::Implies => {
                    return Ok(Value::Bool(
                        !as_bool(eval(env, a, in_old)?)? || as_bool(eval(env, b, in_old)?)?,
                    ))
                }
                _ => {}
            }
            let x = eval(env, a, in_old)?;
            let y = eval(env, b, in_old)?;
            match op {
                BinOp::Add => Value::Int(as_int(x)?.wrapping_add(as_int(y)?)),
                BinOp::Sub => Value::Int(as_int(x)?.wrapping_sub(as_int(y)?)),
                BinOp::Mul => Value::Int(as_int(x)?.wrapping_mul(as_int(y)?)),
                BinOp::Eq => Value::Bool(x == y),
                BinOp::Ne => Value::Bool(x != y),
                BinOp::Lt => Value::Bool(as_int(x)? < as_int(y)?),
                BinOp::Le => Value::Bool(as_int(x)? <= as_int(y)?),
                BinOp::Gt => Value::Bool(as_int(x)? > as_int(y)?),
                BinOp::Ge => Value::Bool(as_int(x)? >= as_int(y)?),
                BinOp::Iff => Value::Bool(as_bool(x)? == as_bool(y)?),
                BinOp::In => match x {
                    Value::Null => Value::Bool(false),
                    x => Value::Bool(as_set(y)?.contains(&as_obj(x)?)),
                },
                BinOp::Subset => Value::Bool(as_set(x)?.is_subset(&as_set(y)?)),
                BinOp::Disjoint => Value::Bool(as_set(x)?.is_disjoint(&as_set(y)?)),
                BinOp::Union => {
                    let mut s = as_set(x)?;
                    s.extend(as_set(y)?);
                    Value::Set(s)
                }
                BinOp::And | BinOp::Or | BinOp::Implies => unreachable!(),
            }
        }
        Expr::Ite(c, t, f) => {
            if as_bool(eval(env, c, in_old)?)? {
                eval(env, t, in_old)?
            } else {
                eval(env, f, in_old)?
            }
        }
        Expr::Quant {
            q, var, set, body, ..
        } => {
            let s = as_set(eval(env, set, in_old)?)?;
            let mut result = *q == Quantifier::Forall;
            for o in s {
                env.vars.push((var.clone(), Value::Obj(o)));
                let b = eval(env, body, in_old);
                env.vars.pop();
                let b = as_bool(b?)?;
                if *q == Quantifier::Forall && !b {
                    result = false;
                    break;
                }
                if *q == Quantifier::Exists && b {
                    result = true;
                    break;
                }
            }
            Value::Bool(result)
        }
        Expr::Old(a) => eval(env, a, true)?,
        Expr::TimerFrom(a) => Value::Timer(TimerValue::from_count(as_int(eval(env, a, in_old)?)?)),
        Expr::Fresh { name, .. } => return Err(SimError::Unbound(format!("?{name}"))),
    })
}

/// Evaluates `e` over a configuration and state; `pre` is required iff `e` mentions `old`.
pub fn evaluate(
    model: &Model,
    cfg: &Configuration,
    state: &GlobalState,
    pre: Option<&GlobalState>,
    e: &Expr,
) -> Result<Value, SimError> {
    let mut env = Env::new(model, cfg, state);
    env.pre = pre;
    env.eval(e)
}

/// An empty state, sufficient for evaluating formulas over immutable symbols.
pub fn empty_state(cfg: &Configuration) -> GlobalState {
    GlobalState {
        fields: vec![Default::default(); cfg.total()],
        executed: vec![false; cfg.total()],
        phase: String::new(),
    }
}

/// Evaluates every configuration constraint.
pub fn eval_constraints(
    model: &Model,
    cfg: &Configuration,
) -> Vec<(String, Result<bool, SimError>)> {
    let s = empty_state(cfg);
    model
        .constraints
        .iter()
        .map(|c| {
            let v = evaluate(model, cfg, &s, None, &c.expr).and_then(as_bool);
            (c.name.clone(), v)
        })
        .collect()
}

pub fn satisfies_constraints(model: &Model, cfg: &Configuration) -> bool {
    eval_constraints(model, cfg)
        .into_iter()
        .all(|(_, r)| matches!(r, Ok(true)))
}
