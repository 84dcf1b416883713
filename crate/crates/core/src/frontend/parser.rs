//! Recursive-descent parser for model, invariant, local-condition and
//! configuration files.

use super::diag::{Code, Diagnostic, Diagnostics, SourceSpan};
use super::lexer::{lex, Tok, Token};
use super::syntax::*;

const RESERVED: &[&str] = &[
    "true", "false", "null", "inactive", "forall", "exists", "in", "if", "then", "else", "old",
];

pub struct Parser<'a> {
    file: &'a str,
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostics>;

impl<'a> Parser<'a> {
    pub fn new(file: &'a str, src: &'a str) -> PResult<Parser<'a>> {
        Ok(Parser {
            file,
            src,
            toks: lex(file, src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn start(&self) -> usize {
        self.toks[self.pos].start
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].end
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, msg: String) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(Diagnostics::single(Diagnostic::error(
            Code::Syntax,
            SourceSpan::new(self.file, self.src, t.start, t.end),
            msg,
        )))
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.error(format!("expected `{k}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let t = self.bump();
                Ok((s, (t.start, t.end)))
            }
            other => self.error(format!("expected identifier, found {other}")),
        }
    }

    fn semi(&mut self) {
        self.eat_sym(";");
    }

    // ---- model files ----

    pub fn file(&mut self) -> PResult<RFile> {
        let mut f = RFile::default();
        while !self.at_eof() {
            if self.is_kw("enum") {
                f.enums.push(self.enum_decl()?);
            } else if self.is_kw("class") {
                f.classes.push(self.class_decl()?);
            } else if self.is_kw("scheduler") {
                f.schedulers.push(self.scheduler()?);
            } else if self.is_kw("constraints") {
                self.bump();
                self.expect_sym("{")?;
                while !self.eat_sym("}") {
                    let start = self.start();
                    let label = match (self.peek().clone(), self.peek_at(1).clone()) {
                        (Tok::Ident(l), Tok::Sym(":")) if !RESERVED.contains(&l.as_str()) => {
                            self.bump();
                            self.bump();
                            Some(l)
                        }
                        _ => None,
                    };
                    let expr = self.expr()?;
                    self.expect_sym(";")?;
                    f.constraints.push(RConstraint {
                        label,
                        expr,
                        span: (start, self.prev_end()),
                    });
                }
            } else {
                return self.error(format!(
                    "expected `enum`, `class`, `scheduler` or `constraints`, found {}",
                    self.peek()
                ));
            }
        }
        Ok(f)
    }

    fn enum_decl(&mut self) -> PResult<REnum> {
        let start = self.start();
        self.expect_kw("enum")?;
        let (name, _) = self.ident()?;
        self.expect_sym("{")?;
        let mut values = Vec::new();
        while !self.is_sym("}") {
            values.push(self.ident()?);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("}")?;
        self.semi();
        Ok(REnum {
            name,
            values,
            span: (start, self.prev_end()),
        })
    }

    fn type_expr(&mut self) -> PResult<RType> {
        let (name, _) = self.ident()?;
        if name == "Set" && self.eat_sym("<") {
            let (elem, _) = self.ident()?;
            self.expect_sym(">")?;
            return Ok(RType::Set(elem));
        }
        Ok(RType::Named(name))
    }

    fn class_decl(&mut self) -> PResult<RClass> {
        let start = self.start();
        self.expect_kw("class")?;
        let (name, _) = self.ident()?;
        self.expect_sym("{")?;
        let mut members = Vec::new();
        let mut transitions = Vec::new();
        while !self.eat_sym("}") {
            let mstart = self.start();
            let kw = match self.peek() {
                Tok::Ident(k) => k.clone(),
                other => return self.error(format!("expected a class member, found {other}")),
            };
            if kw == "transition" {
                transitions.push(self.transition()?);
                continue;
            }
            let keyword = match kw.as_str() {
                "var" => MemberKeyword::Var,
                "input" => MemberKeyword::Input,
                "event" => MemberKeyword::Event,
                "timer" => MemberKeyword::Timer,
                "param" => MemberKeyword::Param,
                "set" => MemberKeyword::Set,
                "ghost" => MemberKeyword::GhostSet,
                "grounded" => MemberKeyword::Grounded,
                _ => return self.error(format!("expected a class member, found `{kw}`")),
            };
            self.bump();
            if keyword == MemberKeyword::GhostSet {
                self.expect_kw("set")?;
            }
            let (mname, _) = self.ident()?;
            let mut m = RMember {
                keyword,
                name: mname,
                ty: None,
                init: None,
                source: None,
                nullable: false,
                span: (mstart, mstart),
            };
            match keyword {
                MemberKeyword::Event | MemberKeyword::Timer => {
                    if self.eat_sym(":") {
                        m.ty = Some(self.type_expr()?);
                    }
                }
                MemberKeyword::Grounded => {
                    self.expect_sym(":")?;
                    let (cls, _) = self.ident()?;
                    m.nullable = self.eat_sym("?");
                    m.ty = Some(RType::Named(cls));
                    self.expect_kw("from")?;
                    m.source = Some(self.ident()?.0);
                }
                _ => {
                    self.expect_sym(":")?;
                    m.ty = Some(self.type_expr()?);
                    if matches!(keyword, MemberKeyword::Var | MemberKeyword::Input)
                        && self.eat_sym("=")
                    {
                        m.init = Some(self.expr()?);
                    }
                }
            }
            self.semi();
            m.span = (mstart, self.prev_end());
            members.push(m);
        }
        self.semi();
        Ok(RClass {
            name,
            members,
            transitions,
            span: (start, self.prev_end()),
        })
    }

    fn transition(&mut self) -> PResult<RTransition> {
        let start = self.start();
        self.expect_kw("transition")?;
        let (name, _) = self.ident()?;
        self.expect_sym("=")?;
        self.expect_sym("(")?;
        let from = self.ident()?;
        self.expect_sym(",")?;
        let guard = self.expr()?;
        self.expect_sym(",")?;
        let to = self.ident()?;
        self.expect_sym(",")?;
        let body = self.block()?;
        self.expect_sym(",")?;
        let phase = self.ident()?;
        self.expect_sym(")")?;
        self.semi();
        Ok(RTransition {
            name,
            from,
            guard,
            to,
            body,
            phase,
            span: (start, self.prev_end()),
        })
    }

    fn scheduler(&mut self) -> PResult<RScheduler> {
        let start = self.start();
        self.expect_kw("scheduler")?;
        self.expect_sym("{")?;
        let mut s = RScheduler::default();
        while !self.eat_sym("}") {
            if self.eat_kw("phases") {
                self.expect_sym("{")?;
                while !self.is_sym("}") {
                    s.phases.push(self.ident()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("}")?;
                self.semi();
            } else if self.eat_kw("initial") {
                s.initial = Some(self.ident()?);
                self.semi();
            } else if self.eat_kw("final") {
                s.final_phase = Some(self.ident()?);
                self.semi();
            } else if self.is_kw("trans") {
                let tstart = self.start();
                self.bump();
                let from = self.ident()?;
                self.expect_sym("->")?;
                let to = self.ident()?;
                let guard = if self.eat_kw("when") {
                    Some(self.expr()?)
                } else {
                    None
                };
                self.semi();
                s.transitions.push(RSchedTrans {
                    from,
                    to,
                    guard,
                    span: (tstart, self.prev_end()),
                });
            } else {
                return self.error(format!(
                    "expected `phases`, `initial`, `final` or `trans`, found {}",
                    self.peek()
                ));
            }
        }
        self.semi();
        s.span = (start, self.prev_end());
        Ok(s)
    }

    // ---- statements ----

    fn block(&mut self) -> PResult<Vec<RStmt>> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        while !self.eat_sym("}") {
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn stmt(&mut self) -> PResult<RStmt> {
        let start = self.start();
        let kind = if self.eat_kw("if") {
            let cond = self.expr()?;
            let then_branch = self.block()?;
            let else_branch = if self.eat_kw("else") {
                if self.is_kw("if") {
                    vec![self.stmt()?]
                } else {
                    self.block()?
                }
            } else {
                vec![]
            };
            RStmtKind::If {
                cond,
                then_branch,
                else_branch,
            }
        } else if self.eat_kw("forall") {
            let (var, _) = self.ident()?;
            self.expect_kw("in")?;
            let range = self.additive()?;
            let body = self.block()?;
            RStmtKind::Forall { var, range, body }
        } else if self.eat_kw("assume") {
            let e = self.expr()?;
            self.expect_sym(";")?;
            RStmtKind::Assume(e)
        } else if self.eat_kw("assert") {
            let e = self.expr()?;
            self.expect_sym(";")?;
            RStmtKind::Assert(e)
        } else {
            let target = self.postfix()?;
            self.expect_sym(":=")?;
            let value = if self.eat_sym("*") {
                None
            } else {
                Some(self.expr()?)
            };
            self.expect_sym(";")?;
            RStmtKind::Assign { target, value }
        };
        Ok(RStmt {
            kind,
            span: (start, self.prev_end()),
        })
    }

    // ---- expressions ----

    fn mk(&self, kind: RExprKind, start: usize) -> RExpr {
        RExpr {
            kind,
            span: (start, self.prev_end()),
        }
    }

    pub fn expr(&mut self) -> PResult<RExpr> {
        let start = self.start();
        let mut lhs = self.implies()?;
        while self.eat_sym("<==>") {
            let rhs = self.implies()?;
            lhs = self.mk(
                RExprKind::Binary(RBin::Iff, Box::new(lhs), Box::new(rhs)),
                start,
            );
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> PResult<RExpr> {
        let start = self.start();
        let lhs = self.or()?;
        if self.eat_sym("==>") {
            let rhs = self.implies()?;
            return Ok(self.mk(
                RExprKind::Binary(RBin::Implies, Box::new(lhs), Box::new(rhs)),
                start,
            ));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<RExpr> {
        let start = self.start();
        let mut lhs = self.and()?;
        while self.eat_sym("||") {
            let rhs = self.and()?;
            lhs = self.mk(
                RExprKind::Binary(RBin::Or, Box::new(lhs), Box::new(rhs)),
                start,
            );
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<RExpr> {
        let start = self.start();
        let mut lhs = self.comparison()?;
        while self.eat_sym("&&") {
            let rhs = self.comparison()?;
            lhs = self.mk(
                RExprKind::Binary(RBin::And, Box::new(lhs), Box::new(rhs)),
                start,
            );
        }
        Ok(lhs)
    }

    fn comparison_op(&self) -> Option<RBin> {
        match self.peek() {
            Tok::Sym("==") => Some(RBin::Eq),
            Tok::Sym("!=") => Some(RBin::Ne),
            Tok::Sym("<") => Some(RBin::Lt),
            Tok::Sym("<=") => Some(RBin::Le),
            Tok::Sym(">") => Some(RBin::Gt),
            Tok::Sym(">=") => Some(RBin::Ge),
            Tok::Sym("!!") => Some(RBin::Disjoint),
            Tok::Ident(k) if k == "in" => Some(RBin::In),
            _ => None,
        }
    }

    fn comparison(&mut self) -> PResult<RExpr> {
        let start = self.start();
        let lhs = self.additive()?;
        if let Some(op) = self.comparison_op() {
            self.bump();
            let rhs = self.additive()?;
            if self.comparison_op().is_some() {
                return self.error("comparison operators do not associate; add parentheses".into());
            }
            return Ok(self.mk(RExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), start));
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> PResult<RExpr> {
        let start = self.start();
        let mut lhs = self.multiplicative()?;
        loop {
            let op = if self.eat_sym("+") {
                RBin::Add
            } else if self.eat_sym("-") {
                RBin::Sub
            } else {
                break;
            };
            let rhs = self.multiplicative()?;
            lhs = self.mk(RExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), start);
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> PResult<RExpr> {
        let start = self.start();
        let mut lhs = self.unary()?;
        while self.eat_sym("*") {
            let rhs = self.unary()?;
            lhs = self.mk(
                RExprKind::Binary(RBin::Mul, Box::new(lhs), Box::new(rhs)),
                start,
            );
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<RExpr> {
        let start = self.start();
        if self.eat_sym("!") {
            let e = self.unary()?;
            return Ok(self.mk(RExprKind::Unary(RUn::Not, Box::new(e)), start));
        }
        if self.eat_sym("-") {
            if let Tok::Int(n) = *self.peek() {
                self.bump();
                return Ok(self.mk(RExprKind::Int(-n), start));
            }
            let e = self.unary()?;
            return Ok(self.mk(RExprKind::Unary(RUn::Neg, Box::new(e)), start));
        }
        if self.is_kw("forall") || self.is_kw("exists") {
            let forall = self.is_kw("forall");
            self.bump();
            let (var, _) = self.ident()?;
            self.expect_kw("in")?;
            let range = self.additive()?;
            self.expect_sym(":")?;
            let body = self.expr()?;
            return Ok(self.mk(
                RExprKind::Quant {
                    forall,
                    var,
                    range: Box::new(range),
                    body: Box::new(body),
                },
                start,
            ));
        }
        if self.eat_kw("if") {
            let c = self.expr()?;
            self.expect_kw("then")?;
            let t = self.expr()?;
            self.expect_kw("else")?;
            let e = self.expr()?;
            return Ok(self.mk(RExprKind::Ite(Box::new(c), Box::new(t), Box::new(e)), start));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<RExpr> {
        let start = self.start();
        let mut e = self.primary()?;
        while self.eat_sym(".") {
            let (f, _) = self.ident()?;
            e = self.mk(RExprKind::Field(Box::new(e), f), start);
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<RExpr> {
        let start = self.start();
        let kind = match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                RExprKind::Int(n)
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                return Ok(RExpr {
                    kind: e.kind,
                    span: (start, self.prev_end()),
                });
            }
            Tok::Sym("|") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym("|")?;
                RExprKind::Card(Box::new(e))
            }
            Tok::Sym("{") => {
                self.bump();
                let mut elems = Vec::new();
                while !self.is_sym("}") {
                    elems.push(self.expr()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("}")?;
                RExprKind::SetLit(elems)
            }
            Tok::Ident(k) => match k.as_str() {
                "true" => {
                    self.bump();
                    RExprKind::Bool(true)
                }
                "false" => {
                    self.bump();
                    RExprKind::Bool(false)
                }
                "null" => {
                    self.bump();
                    RExprKind::Null
                }
                "inactive" => {
                    self.bump();
                    RExprKind::Inactive
                }
                "old" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let e = self.expr()?;
                    self.expect_sym(")")?;
                    RExprKind::Old(Box::new(e))
                }
                _ => RExprKind::Ident(self.ident()?.0),
            },
            other => return self.error(format!("expected an expression, found {other}")),
        };
        Ok(self.mk(kind, start))
    }

    // ---- invariant, local-condition and configuration files ----

    /// `expr (';' expr)* ';'?`
    pub fn expr_list(&mut self) -> PResult<Vec<RExpr>> {
        let mut out = Vec::new();
        while !self.at_eof() {
            out.push(self.expr()?);
            if !self.eat_sym(";") && !self.at_eof() {
                return self.error(format!("expected `;`, found {}", self.peek()));
            }
        }
        Ok(out)
    }

    /// `Phase (',' Class)? ':' expr ';'`
    pub fn gprime_entries(&mut self) -> PResult<Vec<RGPrime>> {
        let mut out = Vec::new();
        while !self.at_eof() {
            let start = self.start();
            let phase = self.ident()?;
            let class = if self.eat_sym(",") {
                Some(self.ident()?)
            } else {
                None
            };
            self.expect_sym(":")?;
            let expr = self.expr()?;
            self.expect_sym(";")?;
            out.push(RGPrime {
                phase,
                class,
                expr,
                span: (start, self.prev_end()),
            });
        }
        Ok(out)
    }

    pub fn config_items(&mut self) -> PResult<Vec<RConfigItem>> {
        let mut out = Vec::new();
        while !self.at_eof() {
            let start = self.start();
            if self.eat_kw("instances") {
                let class = self.ident()?;
                self.expect_sym("{")?;
                let mut names = Vec::new();
                while !self.is_sym("}") {
                    names.push(self.ident()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("}")?;
                self.semi();
                out.push(RConfigItem::Instances {
                    class,
                    names,
                    span: (start, self.prev_end()),
                });
            } else {
                let owner = self.ident()?;
                self.expect_sym(".")?;
                let field = self.ident()?;
                self.expect_sym("=")?;
                let value = self.expr()?;
                self.expect_sym(";")?;
                out.push(RConfigItem::Assign {
                    owner,
                    field,
                    value,
                    span: (start, self.prev_end()),
                });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RGPrime {
    pub phase: (String, Span),
    pub class: Option<(String, Span)>,
    pub expr: RExpr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RConfigItem {
    Instances {
        class: (String, Span),
        names: Vec<(String, Span)>,
        span: Span,
    },
    Assign {
        owner: (String, Span),
        field: (String, Span),
        value: RExpr,
        span: Span,
    },
}

pub fn parse_file(file: &str, src: &str) -> Result<RFile, Diagnostics> {
    Parser::new(file, src)?.file()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expr(s: &str) -> RExpr {
        let mut p = Parser::new("t", s).unwrap();
        let e = p.expr().unwrap();
        assert!(p.at_eof(), "trailing input in {s}");
        e
    }

    #[test]
    fn implication_is_right_associative() {
        let e = expr("a ==> b ==> c");
        let RExprKind::Binary(RBin::Implies, _, rhs) = e.kind else {
            panic!()
        };
        assert!(matches!(rhs.kind, RExprKind::Binary(RBin::Implies, _, _)));
    }

    #[test]
    fn quantifier_body_extends_right() {
        let e = expr("forall s in c.left + c.right : s.x && s.y");
        let RExprKind::Quant { range, body, .. } = e.kind else {
            panic!()
        };
        assert!(matches!(range.kind, RExprKind::Binary(RBin::Add, _, _)));
        assert!(matches!(body.kind, RExprKind::Binary(RBin::And, _, _)));
    }

    #[test]
    fn cardinality_and_comparison() {
        let e = expr("|c.leftSensors| >= 1");
        let RExprKind::Binary(RBin::Ge, lhs, _) = e.kind else {
            panic!()
        };
        assert!(matches!(lhs.kind, RExprKind::Card(_)));
    }

    #[test]
    fn chained_comparison_rejected() {
        let mut p = Parser::new("t", "a < b < c").unwrap();
        let err = p.expr().unwrap_err();
        assert!(err.has(Code::Syntax));
    }

    #[test]
    fn transition_parses() {
        let src = "class S { var location : L = A; transition t = (A, x && !y, B, { z := 1; w := *; }, P) }";
        let f = parse_file("t", src).unwrap();
        assert_eq!(f.classes[0].transitions[0].body.len(), 2);
    }
}
