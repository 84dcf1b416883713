//! Abstract syntax and semantic domain shared by every other module.

mod decl;
mod expr;
mod state;

use std::collections::BTreeSet;

pub use decl::*;
pub use expr::*;
pub use state::*;

/// Evaluation vintage of a symbol occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vintage {
    Pre,
    Post,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    /// Any member of a class: mutable field, executed flag, parameter, set or grounded field.
    Field {
        class: String,
        field: String,
    },
    All(String),
    Phase,
}

impl std::fmt::Display for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Symbol::Field { class, field } => write!(f, "{class}.{field}"),
            Symbol::All(c) => write!(f, "All_{c}"),
            Symbol::Phase => write!(f, "phase"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolRef {
    pub symbol: Symbol,
    pub vintage: Vintage,
}

/// Every state or configuration symbol referenced by `e`, tagged by old-marker scope.
pub fn free_symbols(e: &Expr) -> BTreeSet<SymbolRef> {
    let mut out = BTreeSet::new();
    collect_symbols(e, Vintage::Post, &mut out);
    out
}

fn collect_symbols(e: &Expr, vintage: Vintage, out: &mut BTreeSet<SymbolRef>) {
    let symbol = match e {
        Expr::Field { class, field, .. } => Some(Symbol::Field {
            class: class.clone(),
            field: field.clone(),
        }),
        Expr::All(c) => Some(Symbol::All(c.clone())),
        Expr::Phase => Some(Symbol::Phase),
        Expr::Old(inner) => {
            collect_symbols(inner, Vintage::Pre, out);
            return;
        }
        _ => None,
    };
    if let Some(symbol) = symbol {
        out.insert(SymbolRef { symbol, vintage });
    }
    for c in e.children() {
        collect_symbols(c, vintage, out);
    }
}

/// Own event variables listed as top-level conjuncts of a class guard.
pub fn guard_events(class: &ClassDecl, guard: &Expr) -> Vec<String> {
    let mut out = Vec::new();
    for c in guard.conjuncts() {
        if let Some(name) = own_event(class, c) {
            if !out.contains(&name) {
                out.push(name);
            }
        }
    }
    out
}

/// `Some(e)` when `expr` is exactly `self.e` for an event field `e` of `class`.
pub fn own_event(class: &ClassDecl, expr: &Expr) -> Option<String> {
    match expr {
        Expr::Field {
            obj,
            class: c,
            field,
        } if c == &class.name
            && matches!(obj.as_ref(), Expr::Var { name, .. } if name == SELF)
            && class.field(field).is_some_and(FieldDecl::is_event) =>
        {
            Some(field.clone())
        }
        _ => None,
    }
}

/// Fields possibly written by `exec(phase)` on an instance of `class`,
/// including the executed flag set by the scheduler.
pub fn write_footprint(class: &ClassDecl, phase: &str) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    out.insert((class.name.clone(), EXECUTED.to_string()));
    for t in class.transitions_in(phase) {
        out.insert((class.name.clone(), LOCATION.to_string()));
        for e in guard_events(class, &t.guard) {
            out.insert((class.name.clone(), e));
        }
        t.effect.walk(&mut |s| match s {
            Stmt::Assign { field, .. } | Stmt::Havoc { field } => {
                out.insert((class.name.clone(), field.clone()));
            }
            Stmt::ForallAssign {
                class: c, field, ..
            }
            | Stmt::ObjAssign {
                class: c, field, ..
            } => {
                out.insert((c.clone(), field.clone()));
            }
            _ => {}
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_has_no_symbols() {
        assert!(free_symbols(&Expr::tt()).is_empty());
    }

    #[test]
    fn old_scope_tags_pre() {
        let e = Expr::and(
            Expr::old(Expr::self_field("C", "x")),
            Expr::self_field("C", "y"),
        );
        let syms = free_symbols(&e);
        assert!(syms.contains(&SymbolRef {
            symbol: Symbol::Field {
                class: "C".into(),
                field: "x".into()
            },
            vintage: Vintage::Pre
        }));
        assert!(syms.contains(&SymbolRef {
            symbol: Symbol::Field {
                class: "C".into(),
                field: "y".into()
            },
            vintage: Vintage::Post
        }));
    }
}
