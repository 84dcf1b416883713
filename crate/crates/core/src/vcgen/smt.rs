//! SMT-LIB encoding of models and two-state formulas.
//!
//! Classes become uninterpreted sorts, `All_C` a unary predicate, set fields
//! binary membership predicates, mutable fields a pair of unary functions
//! (`.pre`/`.post`), enums and timers algebraic datatypes.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::VcError;
use crate::model::*;

pub const TIMER_SORT: &str = "TimerVal";

/// Default bound on cardinality literals.
pub const DEFAULT_CARD_BOUND: i64 = 4;

pub fn sort_of(ty: &Type) -> String {
    match ty {
        Type::Int => "Int".into(),
        Type::Bool => "Bool".into(),
        Type::Enum(e) => e.clone(),
        Type::Timer => TIMER_SORT.into(),
        Type::Obj(c) => c.clone(),
        Type::Set(c) => format!("(Set {c})"),
    }
}

pub fn ctor(enum_name: &str, value: &str) -> String {
    format!("{enum_name}.{value}")
}

pub fn all_pred(class: &str) -> String {
    format!("All_{class}")
}

pub fn null_const(class: &str) -> String {
    format!("null.{class}")
}

pub fn immutable_fn(class: &str, member: &str) -> String {
    format!("{class}.{member}")
}

pub fn state_fn(class: &str, field: &str, v: Vintage) -> String {
    match v {
        Vintage::Pre => format!("{class}.{field}.pre"),
        Vintage::Post => format!("{class}.{field}.post"),
    }
}

pub fn phase_const(v: Vintage) -> &'static str {
    match v {
        Vintage::Pre => "phase.pre",
        Vintage::Post => "phase.post",
    }
}

pub fn var_sym(name: &str) -> String {
    format!("v.{name}")
}

fn fresh_sym(name: &str) -> String {
    format!("h.{name}")
}

fn and(parts: Vec<String>) -> String {
    match parts.len() {
        0 => "true".into(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("(and {})", parts.join(" ")),
    }
}

fn or(parts: Vec<String>) -> String {
    match parts.len() {
        0 => "false".into(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("(or {})", parts.join(" ")),
    }
}

/// Translates expressions; collects havoc constants it meets.
pub struct Encoder<'m> {
    pub model: &'m Model,
    pub card_bound: i64,
    pub fresh: BTreeSet<(String, Type)>,
    counter: usize,
}

impl<'m> Encoder<'m> {
    pub fn new(model: &'m Model, card_bound: i64) -> Self {
        Encoder {
            model,
            card_bound,
            fresh: BTreeSet::new(),
            counter: 0,
        }
    }

    fn witness(&mut self) -> String {
        self.counter += 1;
        format!("w!{}", self.counter)
    }

    /// Encodes `e` with non-`old` symbols read in vintage `v`.
    pub fn term(&mut self, e: &Expr, v: Vintage) -> Result<String, VcError> {
        Ok(match e {
            Expr::Bool(b) => b.to_string(),
            Expr::Int(n) if *n < 0 => format!("(- {})", n.unsigned_abs()),
            Expr::Int(n) => n.to_string(),
            Expr::EnumLit { ty, value } => ctor(ty, value),
            Expr::Inactive => "Inactive".into(),
            Expr::Null(c) => null_const(c),
            Expr::Var { name, .. } => var_sym(name),
            Expr::Field { obj, class, field } => {
                let o = self.term(obj, v)?;
                match self.model.member(class, field) {
                    Some(MemberKind::Field(_)) | Some(MemberKind::Executed) => {
                        format!("({} {o})", state_fn(class, field, v))
                    }
                    Some(MemberKind::Param(_)) | Some(MemberKind::Grounded(_)) => {
                        format!("({} {o})", immutable_fn(class, field))
                    }
                    Some(MemberKind::Set(_)) => {
                        return Err(VcError::Unsupported(format!(
                            "set `{class}.{field}` used as a value"
                        )))
                    }
                    None => {
                        return Err(VcError::Unsupported(format!(
                            "unknown member `{class}.{field}`"
                        )))
                    }
                }
            }
            Expr::Phase => phase_const(v).into(),
            Expr::All(c) | Expr::SetLit { class: c, .. } => {
                return Err(VcError::Unsupported(format!("set of {c} used as a value")))
            }
            Expr::Unary(op, a) => match op {
                UnOp::Not => format!("(not {})", self.term(a, v)?),
                UnOp::Neg => format!("(- {})", self.term(a, v)?),
                UnOp::Card => {
                    return Err(VcError::Unsupported(
                        "cardinality is only supported compared against an integer literal".into(),
                    ))
                }
                UnOp::TimerActive => format!("((_ is Active) {})", self.term(a, v)?),
                UnOp::TimerRemaining => {
                    let t = self.term(a, v)?;
                    format!("(ite ((_ is Active) {t}) (ticks {t}) 0)")
                }
            },
            Expr::Binary(op, a, b) => self.binary(*op, a, b, v)?,
            Expr::Ite(c, a, b) => {
                format!(
                    "(ite {} {} {})",
                    self.term(c, v)?,
                    self.term(a, v)?,
                    self.term(b, v)?
                )
            }
            Expr::Quant {
                q,
                var,
                class,
                set,
                body,
            } => {
                let (var, body) = if set.free_vars().contains(var) {
                    let mut taken = set.free_vars();
                    taken.extend(body.free_vars());
                    let fresh = fresh_name(var, &taken);
                    let b = body.subst_var(var, &Expr::var(&fresh, class));
                    (fresh, b)
                } else {
                    (var.clone(), (**body).clone())
                };
                let x = var_sym(&var);
                let m = self.mem(set, &x, v)?;
                let b = self.term(&body, v)?;
                match q {
                    Quantifier::Forall => format!("(forall (({x} {class})) (=> {m} {b}))"),
                    Quantifier::Exists => format!("(exists (({x} {class})) (and {m} {b}))"),
                }
            }
            Expr::Old(a) => self.term(a, Vintage::Pre)?,
            Expr::TimerFrom(a) => {
                let n = self.term(a, v)?;
                format!("(ite (>= {n} 1) (Active {n}) Inactive)")
            }
            Expr::Fresh { name, ty } => {
                self.fresh.insert((name.clone(), ty.clone()));
                fresh_sym(name)
            }
        })
    }

    fn binary(&mut self, op: BinOp, a: &Expr, b: &Expr, v: Vintage) -> Result<String, VcError> {
        if op.is_comparison() {
            if let Some(s) = self.cardinality(op, a, b, v)? {
                return Ok(s);
            }
        }
        let set_typed = matches!(self.model.type_of(a), Type::Set(_));
        Ok(match op {
            BinOp::In => {
                let x = self.term(a, v)?;
                self.mem(b, &x, v)?
            }
            BinOp::Subset | BinOp::Disjoint => {
                let elem = self.model.set_elem(a).unwrap_or_default();
                let x = self.witness();
                let ma = self.mem(a, &x, v)?;
                let mb = self.mem(b, &x, v)?;
                if op == BinOp::Subset {
                    format!("(forall (({x} {elem})) (=> {ma} {mb}))")
                } else {
                    format!("(forall (({x} {elem})) (not (and {ma} {mb})))")
                }
            }
            BinOp::Eq | BinOp::Ne if set_typed => {
                let elem = self.model.set_elem(a).unwrap_or_default();
                let x = self.witness();
                let ma = self.mem(a, &x, v)?;
                let mb = self.mem(b, &x, v)?;
                let eq = format!("(forall (({x} {elem})) (= {ma} {mb}))");
                if op == BinOp::Eq {
                    eq
                } else {
                    format!("(not {eq})")
                }
            }
            BinOp::Union => return Err(VcError::Unsupported("set union used as a value".into())),
            _ => {
                let x = self.term(a, v)?;
                let y = self.term(b, v)?;
                let f = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Eq | BinOp::Iff => "=",
                    BinOp::Ne => return Ok(format!("(not (= {x} {y}))")),
                    BinOp::Lt => "<",
                    BinOp::Le => "<=",
                    BinOp::Gt => ">",
                    BinOp::Ge => ">=",
                    BinOp::And => "and",
                    BinOp::Or => "or",
                    BinOp::Implies => "=>",
                    _ => unreachable!(),
                };
                format!("({f} {x} {y})")
            }
        })
    }

    /// Membership of the element term `x` in a set-typed expression.
    pub fn mem(&mut self, set: &Expr, x: &str, v: Vintage) -> Result<String, VcError> {
        Ok(match set {
            Expr::All(c) => format!("({} {x})", all_pred(c)),
            Expr::Field { obj, class, field } => {
                let o = self.term(obj, v)?;
                format!("({} {o} {x})", immutable_fn(class, field))
            }
            Expr::SetLit { elems, .. } => {
                let mut parts = Vec::new();
                for e in elems {
                    parts.push(format!("(= {x} {})", self.term(e, v)?));
                }
                or(parts)
            }
            Expr::Binary(BinOp::Union, a, b) => or(vec![self.mem(a, x, v)?, self.mem(b, x, v)?]),
            Expr::Ite(c, a, b) => {
                format!(
                    "(ite {} {} {})",
                    self.term(c, v)?,
                    self.mem(a, x, v)?,
                    self.mem(b, x, v)?
                )
            }
            Expr::Old(a) => self.mem(a, x, Vintage::Pre)?,
            other => {
                return Err(VcError::Unsupported(format!(
                    "unsupported set expression {other:?}"
                )))
            }
        })
    }

    /// Expands `|s| op k` (either side) into witness formulas.
    fn cardinality(
        &mut self,
        op: BinOp,
        a: &Expr,
        b: &Expr,
        v: Vintage,
    ) -> Result<Option<String>, VcError> {
        let flip = |op: BinOp| match op {
            BinOp::Lt => BinOp::Gt,
            BinOp::Le => BinOp::Ge,
            BinOp::Gt => BinOp::Lt,
            BinOp::Ge => BinOp::Le,
            o => o,
        };
        let (set, op, k) = match (a, b) {
            (Expr::Unary(UnOp::Card, s), k) => (s, op, k),
            (k, Expr::Unary(UnOp::Card, s)) => (s, flip(op), k),
            _ => return Ok(None),
        };
        let k = match k {
            Expr::Int(n) => *n,
            Expr::Unary(UnOp::Neg, n) if matches!(**n, Expr::Int(_)) => {
                let Expr::Int(n) = **n else { unreachable!() };
                -n
            }
            _ => {
                return Err(VcError::Unsupported(
                    "cardinality must be compared with an integer literal".into(),
                ))
            }
        };
        if k > self.card_bound {
            return Err(VcError::CardinalityBound {
                k,
                bound: self.card_bound,
            });
        }
        let elem = self.model.set_elem(set).unwrap_or_default();
        Ok(Some(match op {
            BinOp::Ge => self.at_least(set, &elem, k, v)?,
            BinOp::Gt => self.at_least(set, &elem, k + 1, v)?,
            BinOp::Le => self.at_most(set, &elem, k, v)?,
            BinOp::Lt => self.at_most(set, &elem, k - 1, v)?,
            BinOp::Eq => and(vec![
                self.at_least(set, &elem, k, v)?,
                self.at_most(set, &elem, k, v)?,
            ]),
            BinOp::Ne => format!(
                "(not {})",
                and(vec![
                    self.at_least(set, &elem, k, v)?,
                    self.at_most(set, &elem, k, v)?
                ])
            ),
            _ => {
                return Err(VcError::Unsupported(
                    "cardinality in a membership test".into(),
                ))
            }
        }))
    }

    fn at_least(&mut self, set: &Expr, elem: &str, k: i64, v: Vintage) -> Result<String, VcError> {
        if k <= 0 {
            return Ok("true".into());
        }
        if k > self.card_bound {
            return Err(VcError::CardinalityBound {
                k,
                bound: self.card_bound,
            });
        }
        let xs: Vec<String> = (0..k).map(|_| self.witness()).collect();
        let mut body = Vec::new();
        for x in &xs {
            body.push(self.mem(set, x, v)?);
        }
        if xs.len() > 1 {
            body.push(format!("(distinct {})", xs.join(" ")));
        }
        let binders: Vec<String> = xs.iter().map(|x| format!("({x} {elem})")).collect();
        Ok(format!("(exists ({}) {})", binders.join(" "), and(body)))
    }

    fn at_most(&mut self, set: &Expr, elem: &str, k: i64, v: Vintage) -> Result<String, VcError> {
        if k < 0 {
            return Ok("false".into());
        }
        if k + 1 > self.card_bound + 1 {
            return Err(VcError::CardinalityBound {
                k,
                bound: self.card_bound,
            });
        }
        let xs: Vec<String> = (0..=k).map(|_| self.witness()).collect();
        let mut members = Vec::new();
        for x in &xs {
            members.push(self.mem(set, x, v)?);
        }
        let mut eqs = Vec::new();
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                eqs.push(format!("(= {} {})", xs[i], xs[j]));
            }
        }
        let binders: Vec<String> = xs.iter().map(|x| format!("({x} {elem})")).collect();
        Ok(format!(
            "(forall ({}) (=> {} {}))",
            binders.join(" "),
            and(members),
            or(eqs)
        ))
    }

    /// Declarations for havoc constants collected so far.
    pub fn fresh_decls(&self) -> String {
        let mut out = String::new();
        for (n, ty) in &self.fresh {
            let _ = writeln!(out, "(declare-const {} {})", fresh_sym(n), sort_of(ty));
        }
        out
    }
}

/// Sorts, datatypes, symbols, structural axioms and the configuration constraints.
pub fn preamble(model: &Model, card_bound: i64) -> Result<String, VcError> {
    let mut out = String::new();
    let _ = writeln!(out, "(set-option :produce-models true)");
    let _ = writeln!(out, "(set-logic ALL)");
    let _ = writeln!(
        out,
        "(declare-datatypes (({TIMER_SORT} 0)) (((Inactive) (Active (ticks Int)))))"
    );
    let mut enums: Vec<(String, Vec<String>)> = model
        .enums
        .iter()
        .map(|e| (e.name.clone(), e.values.clone()))
        .collect();
    enums.push((PHASE_ENUM.to_string(), model.scheduler.phases.clone()));
    for (name, values) in &enums {
        let ctors: Vec<String> = values
            .iter()
            .map(|v| format!("({})", ctor(name, v)))
            .collect();
        let _ = writeln!(
            out,
            "(declare-datatypes (({name} 0)) (({})))",
            ctors.join(" ")
        );
    }
    for c in &model.classes {
        let _ = writeln!(out, "(declare-sort {} 0)", c.name);
    }
    for c in &model.classes {
        let n = &c.name;
        let _ = writeln!(out, "(declare-fun {} ({n}) Bool)", all_pred(n));
        let _ = writeln!(out, "(declare-const {} {n})", null_const(n));
        let _ = writeln!(out, "(assert (not ({} {})))", all_pred(n), null_const(n));
    }
    for c in &model.classes {
        let n = &c.name;
        for s in &c.sets {
            let f = immutable_fn(n, &s.name);
            let _ = writeln!(out, "(declare-fun {f} ({n} {}) Bool)", s.elem);
            let _ = writeln!(
                out,
                "(assert (forall ((o {n}) (x {})) (=> ({f} o x) ({} x))))",
                s.elem,
                all_pred(&s.elem)
            );
        }
        for p in &c.params {
            let _ = writeln!(
                out,
                "(declare-fun {} ({n}) {})",
                immutable_fn(n, &p.name),
                sort_of(&p.ty.value_type())
            );
        }
        for g in &c.grounded {
            let f = immutable_fn(n, &g.name);
            let _ = writeln!(out, "(declare-fun {f} ({n}) {})", g.class);
            let _ = writeln!(
                out,
                "(assert (forall ((o {n})) (=> ({} o) (or (= ({f} o) {}) ({} ({f} o))))))",
                all_pred(n),
                null_const(&g.class),
                all_pred(&g.class)
            );
        }
        let mut fields: Vec<(String, Type)> = c
            .fields
            .iter()
            .map(|f| (f.name.clone(), f.ty.value_type()))
            .collect();
        fields.push((EXECUTED.to_string(), Type::Bool));
        for (f, ty) in fields {
            for v in [Vintage::Pre, Vintage::Post] {
                let sym = state_fn(n, &f, v);
                let _ = writeln!(out, "(declare-fun {sym} ({n}) {})", sort_of(&ty));
                if ty == Type::Timer {
                    let _ = writeln!(
                        out,
                        "(assert (forall ((o {n})) (=> ((_ is Active) ({sym} o)) (>= (ticks ({sym} o)) 1))))"
                    );
                }
            }
        }
    }
    for v in [Vintage::Pre, Vintage::Post] {
        let _ = writeln!(out, "(declare-const {} {PHASE_ENUM})", phase_const(v));
    }
    let mut enc = Encoder::new(model, card_bound);
    for g in &model.constraints {
        let t = enc.term(&g.expr, Vintage::Post)?;
        let _ = writeln!(out, "; {}\n(assert {t})", g.name);
    }
    Ok(out)
}
