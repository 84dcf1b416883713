//! Resolved expressions and statements.
//!
//! Every name in an [`Expr`] is already resolved: bare field reads inside a
//! class are `self.f`, enum literals carry their enum, quantifier binders
//! carry the class they range over. The same tree doubles as the two-state
//! formula language used by contracts and verification conditions, where
//! [`Expr::Old`] marks pre-state evaluation.

use std::collections::BTreeSet;
use std::fmt;

/// Name of the implicit receiver inside class-local expressions.
pub const SELF: &str = "self";

/// Expression-level types.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Int,
    Bool,
    Enum(String),
    Timer,
    /// An object of the named class.
    Obj(String),
    /// `Set<C>`.
    Set(String),
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => write!(f, "Int"),
            Type::Bool => write!(f, "Bool"),
            Type::Enum(e) => write!(f, "{e}"),
            Type::Timer => write!(f, "Timer"),
            Type::Obj(c) => write!(f, "{c}"),
            Type::Set(c) => write!(f, "Set<{c}>"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnOp {
    Not,
    Neg,
    /// Set cardinality `|e|`.
    Card,
    /// `t.active` on timers.
    TimerActive,
    /// `t.remaining` on timers (0 when inactive).
    TimerRemaining,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
    Iff,
    /// `x in s`
    In,
    /// `a <= b` on sets.
    Subset,
    /// `a !! b`
    Disjoint,
    /// `a + b` on sets.
    Union,
}

impl BinOp {
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq
                | BinOp::Ne
                | BinOp::Lt
                | BinOp::Le
                | BinOp::Gt
                | BinOp::Ge
                | BinOp::In
                | BinOp::Subset
                | BinOp::Disjoint
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Forall,
    Exists,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    EnumLit {
        ty: String,
        value: String,
    },
    /// The inactive timer value.
    Inactive,
    /// The null object of a class; only produced by quantifier grounding.
    Null(String),
    /// A bound object variable (quantifier binder or `self`).
    Var {
        name: String,
        class: String,
    },
    /// `obj.field`, where `class` is the class of `obj`.
    Field {
        obj: Box<Expr>,
        class: String,
        field: String,
    },
    /// The scheduler phase.
    Phase,
    /// `All_C`.
    All(String),
    SetLit {
        class: String,
        elems: Vec<Expr>,
    },
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    Quant {
        q: Quantifier,
        var: String,
        class: String,
        set: Box<Expr>,
        body: Box<Expr>,
    },
    /// Pre-state marker.
    Old(Box<Expr>),
    /// Integer-to-timer conversion used when assigning `t := k`.
    TimerFrom(Box<Expr>),
    /// An unconstrained constant, used by the weakest-precondition encoding of havoc.
    Fresh {
        name: String,
        ty: Type,
    },
}

impl Expr {
    pub fn tt() -> Expr {
        Expr::Bool(true)
    }

    pub fn ff() -> Expr {
        Expr::Bool(false)
    }

    pub fn var(name: &str, class: &str) -> Expr {
        Expr::Var {
            name: name.to_string(),
            class: class.to_string(),
        }
    }

    pub fn self_var(class: &str) -> Expr {
        Expr::var(SELF, class)
    }

    pub fn field(obj: Expr, class: &str, field: &str) -> Expr {
        Expr::Field {
            obj: Box::new(obj),
            class: class.to_string(),
            field: field.to_string(),
        }
    }

    pub fn self_field(class: &str, field: &str) -> Expr {
        Expr::field(Expr::self_var(class), class, field)
    }

    pub fn enum_lit(ty: &str, value: &str) -> Expr {
        Expr::EnumLit {
            ty: ty.to_string(),
            value: value.to_string(),
        }
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        match e {
            Expr::Bool(b) => Expr::Bool(!b),
            e => Expr::Unary(UnOp::Not, Box::new(e)),
        }
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Eq, a, b)
    }

    pub fn ne(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Ne, a, b)
    }

    /// Conjunction that drops `true` operands.
    pub fn and(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Bool(true), e) | (e, Expr::Bool(true)) => e,
            (a, b) => Expr::bin(BinOp::And, a, b),
        }
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Bool(false), e) | (e, Expr::Bool(false)) => e,
            (a, b) => Expr::bin(BinOp::Or, a, b),
        }
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        match a {
            Expr::Bool(true) => b,
            a => Expr::bin(BinOp::Implies, a, b),
        }
    }

    pub fn ite(c: Expr, t: Expr, e: Expr) -> Expr {
        Expr::Ite(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn old(e: Expr) -> Expr {
        match e {
            e @ (Expr::Bool(_)
            | Expr::Int(_)
            | Expr::EnumLit { .. }
            | Expr::Inactive
            | Expr::Null(_)
            | Expr::Var { .. }) => e,
            Expr::Old(inner) => Expr::Old(inner),
            e => Expr::Old(Box::new(e)),
        }
    }

    pub fn forall(var: &str, class: &str, set: Expr, body: Expr) -> Expr {
        Expr::Quant {
            q: Quantifier::Forall,
            var: var.to_string(),
            class: class.to_string(),
            set: Box::new(set),
            body: Box::new(body),
        }
    }

    pub fn exists(var: &str, class: &str, set: Expr, body: Expr) -> Expr {
        Expr::Quant {
            q: Quantifier::Exists,
            var: var.to_string(),
            class: class.to_string(),
            set: Box::new(set),
            body: Box::new(body),
        }
    }

    /// Left-nested conjunction of all items; `true` when empty.
    pub fn and_all<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        items.into_iter().fold(Expr::tt(), Expr::and)
    }

    pub fn or_all<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        items.into_iter().fold(Expr::ff(), Expr::or)
    }

    /// Flattens a (possibly nested) conjunction.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        match self {
            Expr::Binary(BinOp::And, a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            e => vec![e],
        }
    }

    pub fn disjuncts(&self) -> Vec<&Expr> {
        match self {
            Expr::Binary(BinOp::Or, a, b) => {
                let mut v = a.disjuncts();
                v.extend(b.disjuncts());
                v
            }
            e => vec![e],
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Bool(_)
            | Expr::Int(_)
            | Expr::EnumLit { .. }
            | Expr::Inactive
            | Expr::Null(_)
            | Expr::Var { .. }
            | Expr::Phase
            | Expr::All(_)
            | Expr::Fresh { .. } => vec![],
            Expr::Field { obj, .. } => vec![obj],
            Expr::SetLit { elems, .. } => elems.iter().collect(),
            Expr::Unary(_, e) | Expr::Old(e) | Expr::TimerFrom(e) => vec![e],
            Expr::Binary(_, a, b) => vec![a, b],
            Expr::Ite(c, t, e) => vec![c, t, e],
            Expr::Quant { set, body, .. } => vec![set, body],
        }
    }

    /// Rebuilds the node with `f` applied to every direct child.
    pub fn map_children(&self, f: &mut impl FnMut(&Expr) -> Expr) -> Expr {
        match self {
            Expr::Bool(_)
            | Expr::Int(_)
            | Expr::EnumLit { .. }
            | Expr::Inactive
            | Expr::Null(_)
            | Expr::Var { .. }
            | Expr::Phase
            | Expr::All(_)
            | Expr::Fresh { .. } => self.clone(),
            Expr::Field { obj, class, field } => Expr::Field {
                obj: Box::new(f(obj)),
                class: class.clone(),
                field: field.clone(),
            },
            Expr::SetLit { class, elems } => Expr::SetLit {
                class: class.clone(),
                elems: elems.iter().map(&mut *f).collect(),
            },
            Expr::Unary(op, e) => Expr::Unary(*op, Box::new(f(e))),
            Expr::Old(e) => Expr::Old(Box::new(f(e))),
            Expr::TimerFrom(e) => Expr::TimerFrom(Box::new(f(e))),
            Expr::Binary(op, a, b) => Expr::Binary(*op, Box::new(f(a)), Box::new(f(b))),
            Expr::Ite(c, t, e) => Expr::Ite(Box::new(f(c)), Box::new(f(t)), Box::new(f(e))),
            Expr::Quant {
                q,
                var,
                class,
                set,
                body,
            } => Expr::Quant {
                q: *q,
                var: var.clone(),
                class: class.clone(),
                set: Box::new(f(set)),
                body: Box::new(f(body)),
            },
        }
    }

    /// Visits every node in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn contains(&self, pred: &impl Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        self.children().into_iter().any(|c| c.contains(pred))
    }

    pub fn has_old(&self) -> bool {
        self.contains(&|e| matches!(e, Expr::Old(_)))
    }

    /// Free object variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_vars(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var { name, .. } => {
                if !bound.contains(name) {
                    out.insert(name.clone());
                }
            }
            Expr::Quant { var, set, body, .. } => {
                set.collect_free_vars(bound, out);
                bound.push(var.clone());
                body.collect_free_vars(bound, out);
                bound.pop();
            }
            e => {
                for c in e.children() {
                    c.collect_free_vars(bound, out);
                }
            }
        }
    }

    /// Capture-avoiding substitution of the object variable `name` by `with`.
    pub fn subst_var(&self, name: &str, with: &Expr) -> Expr {
        let fv = with.free_vars();
        self.subst_var_inner(name, with, &fv)
    }

    fn subst_var_inner(&self, name: &str, with: &Expr, fv: &BTreeSet<String>) -> Expr {
        match self {
            Expr::Var { name: n, .. } if n == name => with.clone(),
            Expr::Quant {
                q,
                var,
                class,
                set,
                body,
            } => {
                let set = set.subst_var_inner(name, with, fv);
                if var == name {
                    return Expr::Quant {
                        q: *q,
                        var: var.clone(),
                        class: class.clone(),
                        set: Box::new(set),
                        body: body.clone(),
                    };
                }
                if fv.contains(var) {
                    let mut taken = fv.clone();
                    taken.extend(body.free_vars());
                    taken.insert(name.to_string());
                    let fresh = fresh_name(var, &taken);
                    let renamed = body.subst_var(var, &Expr::var(&fresh, class));
                    return Expr::Quant {
                        q: *q,
                        var: fresh,
                        class: class.clone(),
                        set: Box::new(set),
                        body: Box::new(renamed.subst_var_inner(name, with, fv)),
                    };
                }
                Expr::Quant {
                    q: *q,
                    var: var.clone(),
                    class: class.clone(),
                    set: Box::new(set),
                    body: Box::new(body.subst_var_inner(name, with, fv)),
                }
            }
            e => e.map_children(&mut |c| c.subst_var_inner(name, with, fv)),
        }
    }

    /// Instantiates the receiver of a class-local formula.
    pub fn instantiate_self(&self, with: &Expr) -> Expr {
        self.subst_var(SELF, with)
    }

    /// Removes every old-marker (used once a formula is known to be single-state).
    pub fn strip_old(&self) -> Expr {
        match self {
            Expr::Old(e) => e.strip_old(),
            e => e.map_children(&mut |c| c.strip_old()),
        }
    }
}

/// Returns `base` or `base_N` for the smallest N making it unused.
pub fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !taken.contains(n))
        .expect("unbounded")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    /// `self.field := value`
    Assign {
        field: String,
        value: Expr,
    },
    /// `self.field := *`
    Havoc {
        field: String,
    },
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Box<Stmt>,
    },
    /// `forall var in set { var.field := value; }` where `var` ranges over `class`.
    ForallAssign {
        var: String,
        class: String,
        set: Expr,
        field: String,
        value: Expr,
    },
    /// `target.field := value` on a grounded object reference; produced by grounding.
    ObjAssign {
        target: Expr,
        class: String,
        field: String,
        value: Expr,
    },
    Assume(Expr),
    Assert(Expr),
    Seq(Vec<Stmt>),
}

impl Stmt {
    pub fn skip() -> Stmt {
        Stmt::Seq(vec![])
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Stmt::Seq(v) if v.iter().all(Stmt::is_empty))
    }

    /// The block form the parser produces: nested sequences spliced and a
    /// one-statement block unwrapped.
    pub fn flattened(&self) -> Stmt {
        fn push(s: &Stmt, out: &mut Vec<Stmt>) {
            match s {
                Stmt::Seq(v) => v.iter().for_each(|x| push(x, out)),
                Stmt::If {
                    cond,
                    then_branch,
                    else_branch,
                } => out.push(Stmt::If {
                    cond: cond.clone(),
                    then_branch: Box::new(then_branch.flattened()),
                    else_branch: Box::new(else_branch.flattened()),
                }),
                other => out.push(other.clone()),
            }
        }
        let mut out = Vec::new();
        push(self, &mut out);
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Stmt::Seq(out)
        }
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        match self {
            Stmt::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.walk(f);
                else_branch.walk(f);
            }
            Stmt::Seq(v) => v.iter().for_each(|s| s.walk(f)),
            _ => {}
        }
    }

    /// All expressions appearing directly in the statement tree.
    pub fn exprs(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        self.walk(&mut |s| match s {
            Stmt::Assign { value, .. } => out.push(value),
            Stmt::If { cond, .. } => out.push(cond),
            Stmt::ForallAssign { set, value, .. } => {
                out.push(set);
                out.push(value);
            }
            Stmt::ObjAssign { target, value, .. } => {
                out.push(target);
                out.push(value);
            }
            Stmt::Assume(e) | Stmt::Assert(e) => out.push(e),
            Stmt::Havoc { .. } | Stmt::Seq(_) => {}
        });
        out
    }

    pub fn has_assume_or_assert(&self) -> bool {
        let mut found = false;
        self.walk(&mut |s| {
            if matches!(s, Stmt::Assume(_) | Stmt::Assert(_)) {
                found = true;
            }
        });
        found
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subst_avoids_capture() {
        // forall c in All_C : c.x == self.x   with self := c
        let body = Expr::eq(
            Expr::field(Expr::var("c", "C"), "C", "x"),
            Expr::self_field("C", "x"),
        );
        let e = Expr::forall("c", "C", Expr::All("C".into()), body);
        let r = e.instantiate_self(&Expr::var("c", "C"));
        let Expr::Quant { var, body, .. } = &r else {
            panic!()
        };
        assert_ne!(var, "c");
        assert!(body.free_vars().contains("c"));
        assert!(body.free_vars().contains(var));
    }

    #[test]
    fn and_all_drops_true() {
        assert_eq!(Expr::and_all(vec![]), Expr::tt());
        let a = Expr::Phase;
        assert_eq!(Expr::and_all(vec![Expr::tt(), a.clone()]), a);
    }
}
