//! Canonical surface-syntax printer for models and formulas.

use std::fmt::Write;

use crate::model::*;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Quant { .. } | Expr::Ite(..) => 0,
        Expr::Binary(op, ..) => match op {
            BinOp::Iff => 1,
            BinOp::Implies => 2,
            BinOp::Or => 3,
            BinOp::And => 4,
            BinOp::Add | BinOp::Sub | BinOp::Union => 6,
            BinOp::Mul => 7,
            _ => 5,
        },
        Expr::Unary(UnOp::Not | UnOp::Neg, _) => 8,
        Expr::Int(n) if *n < 0 => 8,
        Expr::Field { .. } | Expr::Unary(UnOp::TimerActive | UnOp::TimerRemaining, _) => 9,
        _ => 10,
    }
}

fn op_str(op: BinOp) -> &'static str {
    match op {
        BinOp::Add | BinOp::Union => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Eq => "==",
        BinOp::Ne => "!=",
        BinOp::Lt => "<",
        BinOp::Le | BinOp::Subset => "<=",
        BinOp::Gt => ">",
        BinOp::Ge => ">=",
        BinOp::And => "&&",
        BinOp::Or => "||",
        BinOp::Implies => "==>",
        BinOp::Iff => "<==>",
        BinOp::In => "in",
        BinOp::Disjoint => "!!",
    }
}

struct Printer {
    binders: Vec<String>,
}

impl Printer {
    fn wrap(&mut self, e: &Expr, parens: bool) -> String {
        let s = self.expr(e);
        if parens {
            format!("({s})")
        } else {
            s
        }
    }

    fn expr(&mut self, e: &Expr) -> String {
        match e {
            Expr::Bool(b) => b.to_string(),
            Expr::Int(n) => n.to_string(),
            Expr::EnumLit { value, .. } => value.clone(),
            Expr::Inactive => "inactive".into(),
            Expr::Null(_) => "null".into(),
            Expr::Var { name, .. } => name.clone(),
            Expr::Field { obj, field, .. } => {
                if let Expr::Var { name, .. } = obj.as_ref() {
                    if name == SELF && !self.binders.contains(field) {
                        return field.clone();
                    }
                }
                let o = self.wrap(obj, prec(obj) < 9);
                format!("{o}.{field}")
            }
            Expr::Phase => "phase".into(),
            Expr::All(c) => format!("All_{c}"),
            Expr::SetLit { elems, .. } => {
                let items: Vec<String> = elems.iter().map(|x| self.expr(x)).collect();
                format!("{{{}}}", items.join(", "))
            }
            Expr::Unary(op, a) => match op {
                // `!!` lexes as the disjointness operator.
                UnOp::Not => format!(
                    "!{}",
                    self.wrap(a, prec(a) < 8 || matches!(a.as_ref(), Expr::Unary(UnOp::Not, _)))
                ),
                UnOp::Neg => format!(
                    "-{}",
                    self.wrap(
                        a,
                        prec(a) < 8 || matches!(a.as_ref(), Expr::Int(n) if *n >= 0)
                    )
                ),
                UnOp::Card => format!("|{}|", self.expr(a)),
                UnOp::TimerActive => format!("{}.active", self.wrap(a, prec(a) < 9)),
                UnOp::TimerRemaining => format!("{}.remaining", self.wrap(a, prec(a) < 9)),
            },
            Expr::Binary(op, a, b) => {
                let p = prec(e);
                let (pa, pb) = (prec(a), prec(b));
                let (la, rb) = match op {
                    BinOp::Implies => (pa <= p, pb < p),
                    _ if p == 5 => (pa <= p, pb <= p),
                    _ => (pa < p, pb <= p),
                };
                let l = self.wrap(a, la);
                let r = self.wrap(b, rb);
                format!("{l} {} {r}", op_str(*op))
            }
            Expr::Ite(c, t, f) => {
                format!(
                    "if {} then {} else {}",
                    self.expr(c),
                    self.expr(t),
                    self.expr(f)
                )
            }
            Expr::Quant {
                q, var, set, body, ..
            } => {
                let kw = match q {
                    Quantifier::Forall => "forall",
                    Quantifier::Exists => "exists",
                };
                let range = self.wrap(set, prec(set) < 6);
                self.binders.push(var.clone());
                let b = self.expr(body);
                self.binders.pop();
                format!("{kw} {var} in {range} : {b}")
            }
            Expr::Old(a) => format!("old({})", self.expr(a)),
            Expr::TimerFrom(a) => format!("timer({})", self.expr(a)),
            Expr::Fresh { name, .. } => format!("?{name}"),
        }
    }

    fn stmt(&mut self, s: &Stmt, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match s {
            Stmt::Seq(v) => v.iter().for_each(|s| self.stmt(s, indent, out)),
            Stmt::Assign { field, value } => {
                let _ = writeln!(out, "{pad}{field} := {};", self.assigned(value));
            }
            Stmt::Havoc { field } => {
                let _ = writeln!(out, "{pad}{field} := *;");
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let _ = writeln!(out, "{pad}if {} {{", self.expr(cond));
                self.stmt(then_branch, indent + 1, out);
                if else_branch.is_empty() && !matches!(else_branch.as_ref(), Stmt::If { .. }) {
                    let _ = writeln!(out, "{pad}}}");
                } else {
                    let _ = writeln!(out, "{pad}}} else {{");
                    self.stmt(else_branch, indent + 1, out);
                    let _ = writeln!(out, "{pad}}}");
                }
            }
            Stmt::ForallAssign {
                var,
                set,
                field,
                value,
                ..
            } => {
                let range = self.wrap(set, prec(set) < 6);
                self.binders.push(var.clone());
                let v = self.assigned(value);
                self.binders.pop();
                let _ = writeln!(
                    out,
                    "{pad}forall {var} in {range} {{ {var}.{field} := {v}; }}"
                );
            }
            Stmt::ObjAssign {
                target,
                field,
                value,
                ..
            } => {
                let t = self.wrap(target, prec(target) < 9);
                let _ = writeln!(out, "{pad}{t}.{field} := {};", self.assigned(value));
            }
            Stmt::Assume(e) => {
                let _ = writeln!(out, "{pad}assume {};", self.expr(e));
            }
            Stmt::Assert(e) => {
                let _ = writeln!(out, "{pad}assert {};", self.expr(e));
            }
        }
    }

    fn assigned(&mut self, value: &Expr) -> String {
        match value {
            Expr::TimerFrom(v) => self.expr(v),
            v => self.expr(v),
        }
    }
}

/// Renders an expression or two-state formula.
pub fn print_expr(e: &Expr) -> String {
    Printer { binders: vec![] }.expr(e)
}

pub fn print_stmt(s: &Stmt) -> String {
    let mut out = String::new();
    Printer { binders: vec![] }.stmt(s, 0, &mut out);
    out
}

fn scalar(t: &ScalarType) -> String {
    match t {
        ScalarType::Int => "Int".into(),
        ScalarType::Bool => "Bool".into(),
        ScalarType::Enum(e) => e.clone(),
        ScalarType::Timer => "Timer".into(),
        ScalarType::Event => "Event".into(),
    }
}

/// Prints a model in canonical surface syntax; re-parsing yields an equal model.
pub fn print_model(m: &Model) -> String {
    let mut out = String::new();
    for e in &m.enums {
        let _ = writeln!(out, "enum {} {{ {} }}", e.name, e.values.join(", "));
    }
    for c in &m.classes {
        let _ = writeln!(out, "\nclass {} {{", c.name);
        for f in &c.fields {
            let line = match &f.ty {
                ScalarType::Event => format!("event {} : Event", f.name),
                ScalarType::Timer => format!("timer {} : Timer", f.name),
                ty => {
                    let kw = if f.input { "input" } else { "var" };
                    match &f.init {
                        Some(init) => {
                            format!("{kw} {} : {} = {}", f.name, scalar(ty), print_expr(init))
                        }
                        None => format!("{kw} {} : {}", f.name, scalar(ty)),
                    }
                }
            };
            let _ = writeln!(out, "  {line};");
        }
        for p in &c.params {
            let _ = writeln!(out, "  param {} : {};", p.name, scalar(&p.ty));
        }
        for s in &c.sets {
            let kw = if s.ghost { "ghost set" } else { "set" };
            let _ = writeln!(out, "  {kw} {} : Set<{}>;", s.name, s.elem);
        }
        for g in &c.grounded {
            let q = if g.nullable { "?" } else { "" };
            let _ = writeln!(
                out,
                "  grounded {} : {}{q} from {};",
                g.name, g.class, g.source
            );
        }
        for t in &c.transitions {
            let mut body = String::new();
            Printer { binders: vec![] }.stmt(&t.effect, 2, &mut body);
            let _ = writeln!(
                out,
                "  transition {} = ({}, {}, {}, {{",
                t.name,
                t.from,
                print_expr(&t.guard),
                t.to
            );
            out.push_str(&body);
            let _ = writeln!(out, "  }}, {});", t.phase);
        }
        let _ = writeln!(out, "}}");
    }
    let s = &m.scheduler;
    let _ = writeln!(out, "\nscheduler {{");
    let _ = writeln!(out, "  phases {{ {} }}", s.phases.join(", "));
    let _ = writeln!(out, "  initial {};", s.initial);
    let _ = writeln!(out, "  final {};", s.final_phase);
    for t in &s.transitions {
        let _ = writeln!(
            out,
            "  trans {} -> {} when {};",
            t.from,
            t.to,
            print_expr(&t.guard)
        );
    }
    let _ = writeln!(out, "}}");
    if !m.constraints.is_empty() {
        let _ = writeln!(out, "\nconstraints {{");
        for k in &m.constraints {
            let _ = writeln!(out, "  {}: {};", k.name, print_expr(&k.expr));
        }
        let _ = writeln!(out, "}}");
    }
    out
}
