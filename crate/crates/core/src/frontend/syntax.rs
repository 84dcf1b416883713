//! Unresolved syntax trees with byte spans, as produced by the parser.

pub type Span = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RBin {
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
    In,
    Disjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RUn {
    Not,
    Neg,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RExprKind {
    Bool(bool),
    Int(i64),
    Null,
    Inactive,
    Ident(String),
    Field(Box<RExpr>, String),
    Unary(RUn, Box<RExpr>),
    Binary(RBin, Box<RExpr>, Box<RExpr>),
    Ite(Box<RExpr>, Box<RExpr>, Box<RExpr>),
    Card(Box<RExpr>),
    Old(Box<RExpr>),
    SetLit(Vec<RExpr>),
    Quant {
        forall: bool,
        var: String,
        range: Box<RExpr>,
        body: Box<RExpr>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RExpr {
    pub kind: RExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RStmtKind {
    /// `target := value`; `None` is havoc.
    Assign {
        target: RExpr,
        value: Option<RExpr>,
    },
    If {
        cond: RExpr,
        then_branch: Vec<RStmt>,
        else_branch: Vec<RStmt>,
    },
    Forall {
        var: String,
        range: RExpr,
        body: Vec<RStmt>,
    },
    Assume(RExpr),
    Assert(RExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RStmt {
    pub kind: RStmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RType {
    Named(String),
    Set(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemberKeyword {
    Var,
    Input,
    Event,
    Timer,
    Param,
    Set,
    GhostSet,
    Grounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RMember {
    pub keyword: MemberKeyword,
    pub name: String,
    pub ty: Option<RType>,
    pub init: Option<RExpr>,
    /// Source set of a grounded field.
    pub source: Option<String>,
    pub nullable: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RTransition {
    pub name: String,
    pub from: (String, Span),
    pub guard: RExpr,
    pub to: (String, Span),
    pub body: Vec<RStmt>,
    pub phase: (String, Span),
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RClass {
    pub name: String,
    pub members: Vec<RMember>,
    pub transitions: Vec<RTransition>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct REnum {
    pub name: String,
    pub values: Vec<(String, Span)>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RSchedTrans {
    pub from: (String, Span),
    pub to: (String, Span),
    pub guard: Option<RExpr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RScheduler {
    pub phases: Vec<(String, Span)>,
    pub initial: Option<(String, Span)>,
    pub final_phase: Option<(String, Span)>,
    pub transitions: Vec<RSchedTrans>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RConstraint {
    pub label: Option<String>,
    pub expr: RExpr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RFile {
    pub enums: Vec<REnum>,
    pub classes: Vec<RClass>,
    pub schedulers: Vec<RScheduler>,
    pub constraints: Vec<RConstraint>,
}
