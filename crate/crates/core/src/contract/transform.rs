use std::collections::{BTreeMap, BTreeSet};

use super::ContractError;
use crate::model::*;

/// Marker name for an unconstrained (havocked) entry.
pub const HAVOC: &str = "eps";

/// The unconstrained marker of a given type.
pub fn epsilon(ty: Type) -> Expr {
    Expr::Fresh {
        name: HAVOC.to_string(),
        ty,
    }
}

pub fn is_epsilon(e: &Expr) -> bool {
    matches!(e, Expr::Fresh { name, .. } if name == HAVOC)
}

pub fn has_epsilon(e: &Expr) -> bool {
    e.contains(&is_epsilon)
}

/// Result of symbolically executing an effect.
///
/// Scalar entries map own fields of the receiver to pre-state expressions.
/// Function entries map `(class, field)` to an expression over the point
/// variable [`SymbolicMap::point`], giving the post value at that point.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicMap {
    pub class: String,
    pub point: String,
    pub scalars: BTreeMap<String, Expr>,
    pub functions: BTreeMap<(String, String), Expr>,
}

/// Fields written through quantified or object assignments.
fn function_targets(s: &Stmt) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    s.walk(&mut |x| match x {
        Stmt::ForallAssign { class, field, .. } | Stmt::ObjAssign { class, field, .. } => {
            out.insert((class.clone(), field.clone()));
        }
        _ => {}
    });
    out
}

fn scalar_targets(s: &Stmt) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    s.walk(&mut |x| match x {
        Stmt::Assign { field, .. } | Stmt::Havoc { field } => {
            out.insert(field.clone());
        }
        _ => {}
    });
    out
}

fn binder_names(s: &Stmt) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    out.insert(SELF.to_string());
    for e in s.exprs() {
        e.walk(&mut |x| match x {
            Expr::Var { name, .. } | Expr::Quant { var: name, .. } => {
                out.insert(name.clone());
            }
            _ => {}
        });
    }
    s.walk(&mut |x| {
        if let Stmt::ForallAssign { var, .. } = x {
            out.insert(var.clone());
        }
    });
    out
}

impl SymbolicMap {
    /// The initial map for `stmt`: identity on every field it may write.
    pub fn for_stmt(model: &Model, class: &str, stmt: &Stmt) -> SymbolicMap {
        let point = fresh_name("y", &binder_names(stmt));
        let mut m = SymbolicMap {
            class: class.to_string(),
            point,
            scalars: BTreeMap::new(),
            functions: BTreeMap::new(),
        };
        let funcs = function_targets(stmt);
        for (c, f) in &funcs {
            m.functions
                .insert((c.clone(), f.clone()), m.identity_at(c, f));
        }
        for f in scalar_targets(stmt) {
            if !funcs.contains(&(class.to_string(), f.clone())) {
                m.scalars
                    .insert(f.clone(), Expr::old(Expr::self_field(class, &f)));
            }
        }
        let _ = model;
        m
    }

    fn point_var(&self, class: &str) -> Expr {
        Expr::var(&self.point, class)
    }

    fn identity_at(&self, class: &str, field: &str) -> Expr {
        Expr::old(Expr::field(self.point_var(class), class, field))
    }

    /// Adds identity entries for fields not yet in the domain.
    pub fn extend_domain(&mut self, fields: &[String]) {
        for f in fields {
            if self
                .functions
                .contains_key(&(self.class.clone(), f.clone()))
            {
                continue;
            }
            self.scalars
                .entry(f.clone())
                .or_insert_with(|| Expr::old(Expr::self_field(&self.class, f)));
        }
    }

    pub fn is_identity_scalar(&self, field: &str) -> bool {
        self.scalars
            .get(field)
            .is_some_and(|e| *e == Expr::old(Expr::self_field(&self.class, field)))
    }

    pub fn is_identity_function(&self, class: &str, field: &str) -> bool {
        self.functions
            .get(&(class.to_string(), field.to_string()))
            .is_some_and(|e| *e == self.identity_at(class, field))
    }

    /// Post value of `obj.field` (with `obj` already a pre-state expression) as a function entry.
    fn apply_function(&self, entry: &Expr, obj: &Expr) -> Expr {
        entry.subst_var(&self.point, obj)
    }

    /// Rewrites an expression read in the current intermediate state into an
    /// expression over pre-state symbols.
    pub fn subst(&self, model: &Model, e: &Expr) -> Expr {
        match e {
            Expr::Field { obj, class, field } => {
                let o = self.subst(model, obj);
                if !model.is_mutable(class, field) {
                    return Expr::Field {
                        obj: Box::new(o),
                        class: class.clone(),
                        field: field.clone(),
                    };
                }
                if let Some(fun) = self.functions.get(&(class.clone(), field.clone())) {
                    return self.apply_function(fun, &o);
                }
                if class == &self.class {
                    if let Some(v) = self.scalars.get(field) {
                        if o == Expr::self_var(class) {
                            return v.clone();
                        }
                        let other = Expr::old(Expr::field(o.clone(), class, field));
                        return Expr::ite(Expr::eq(o, Expr::self_var(class)), v.clone(), other);
                    }
                }
                Expr::old(Expr::field(o, class, field))
            }
            Expr::Phase => Expr::old(Expr::Phase),
            Expr::Old(_) => e.clone(),
            _ => e.map_children(&mut |c| self.subst(model, c)),
        }
    }

    fn update_scalar(&mut self, field: &str, value: Expr) {
        let key = (self.class.clone(), field.to_string());
        if let Some(prev) = self.functions.get(&key).cloned() {
            let at_self = Expr::eq(self.point_var(&self.class), Expr::self_var(&self.class));
            self.functions.insert(key, Expr::ite(at_self, value, prev));
        } else {
            self.scalars.insert(field.to_string(), value);
        }
    }

    /// Forward symbolic execution of one statement.
    pub fn exec(&mut self, model: &Model, s: &Stmt) -> Result<(), ContractError> {
        match s {
            Stmt::Seq(v) => {
                for x in v {
                    self.exec(model, x)?;
                }
            }
            Stmt::Assign { field, value } => {
                let v = self.subst(model, value);
                self.update_scalar(field, v);
            }
            Stmt::Havoc { field } => {
                let ty = model.type_of(&Expr::self_field(&self.class, field));
                self.update_scalar(field, epsilon(ty));
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = self.subst(model, cond);
                let mut a = self.clone();
                a.exec(model, then_branch)?;
                let mut b = self.clone();
                b.exec(model, else_branch)?;
                for (k, va) in &a.scalars {
                    let vb = &b.scalars[k];
                    let merged = if va == vb {
                        va.clone()
                    } else {
                        Expr::ite(c.clone(), va.clone(), vb.clone())
                    };
                    self.scalars.insert(k.clone(), merged);
                }
                for (k, va) in &a.functions {
                    let vb = &b.functions[k];
                    let merged = if va == vb {
                        va.clone()
                    } else {
                        Expr::ite(c.clone(), va.clone(), vb.clone())
                    };
                    self.functions.insert(k.clone(), merged);
                }
            }
            Stmt::ForallAssign {
                var,
                class,
                set,
                field,
                value,
            } => {
                let range = self.subst(model, set);
                let v = self
                    .subst(model, value)
                    .subst_var(var, &self.point_var(class));
                let key = (class.clone(), field.clone());
                let prev = self.functions[&key].clone();
                let member = Expr::bin(BinOp::In, self.point_var(class), range);
                self.functions.insert(key, Expr::ite(member, v, prev));
            }
            Stmt::ObjAssign {
                target,
                class,
                field,
                value,
            } => {
                let t = self.subst(model, target);
                let v = self.subst(model, value);
                let key = (class.clone(), field.clone());
                let prev = self.functions[&key].clone();
                self.functions
                    .insert(key, Expr::ite(Expr::eq(self.point_var(class), t), v, prev));
            }
            Stmt::Assume(_) | Stmt::Assert(_) => {
                return Err(ContractError::AssumeAssert(self.class.clone()))
            }
        }
        Ok(())
    }
}

/// Symbolically executes `effect` of a `class` instance from the identity map.
pub fn transform_effect(
    model: &Model,
    class: &str,
    effect: &Stmt,
) -> Result<SymbolicMap, ContractError> {
    if effect.has_assume_or_assert() {
        return Err(ContractError::AssumeAssert(class.to_string()));
    }
    let mut m = SymbolicMap::for_stmt(model, class, effect);
    m.exec(model, effect)?;
    Ok(m)
}

/// `lhs = e`, weakened where `e` depends on a havocked value: branches of an
/// if-then-else with an unconstrained value contribute no constraint.
pub fn equal_partial(lhs: Expr, e: &Expr) -> Expr {
    if !has_epsilon(e) {
        return Expr::eq(lhs, e.clone());
    }
    match e {
        Expr::Ite(c, a, b) if !has_epsilon(c) => {
            let ta = equal_partial(lhs.clone(), a);
            let tb = equal_partial(lhs, b);
            Expr::and(
                Expr::implies((**c).clone(), ta),
                Expr::implies(Expr::not((**c).clone()), tb),
            )
        }
        _ => Expr::tt(),
    }
}

/// Effect formula: post-state equalities for every non-identity entry.
pub fn effect_formula(model: &Model, map: &SymbolicMap) -> Expr {
    let _ = model;
    let mut parts = Vec::new();
    for (f, e) in &map.scalars {
        if map.is_identity_scalar(f) {
            continue;
        }
        parts.push(equal_partial(Expr::self_field(&map.class, f), e));
    }
    for ((c, f), e) in &map.functions {
        if map.is_identity_function(c, f) {
            continue;
        }
        let mut taken = e.free_vars();
        taken.insert(map.point.clone());
        let x = fresh_name("x", &taken);
        let xv = Expr::var(&x, c);
        let body = equal_partial(Expr::field(xv.clone(), c, f), &e.subst_var(&map.point, &xv));
        if body != Expr::tt() {
            parts.push(Expr::forall(&x, c, Expr::All(c.clone()), body));
        }
    }
    Expr::and_all(parts)
}
