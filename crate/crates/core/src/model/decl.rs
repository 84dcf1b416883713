//! Declarations making up a configurable system.

use super::expr::{BinOp, Expr, Stmt, Type, UnOp};

/// Name of the built-in executed flag.
pub const EXECUTED: &str = "executed";
/// Name of the distinguished control-location variable.
pub const LOCATION: &str = "location";
/// Type name of the scheduler phase enumeration.
pub const PHASE_ENUM: &str = "PhaseEnum";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ScalarType {
    Int,
    Bool,
    Enum(String),
    Timer,
    Event,
}

impl ScalarType {
    /// Type of the field when read in an expression. Events read as booleans.
    pub fn value_type(&self) -> Type {
        match self {
            ScalarType::Int => Type::Int,
            ScalarType::Bool | ScalarType::Event => Type::Bool,
            ScalarType::Enum(e) => Type::Enum(e.clone()),
            ScalarType::Timer => Type::Timer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumDecl {
    pub name: String,
    pub values: Vec<String>,
}

/// A mutable scalar field: plain var, input, event or timer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub ty: ScalarType,
    pub input: bool,
    pub init: Option<Expr>,
}

impl FieldDecl {
    pub fn is_event(&self) -> bool {
        self.ty == ScalarType::Event
    }

    pub fn is_timer(&self) -> bool {
        self.ty == ScalarType::Timer
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: String,
    pub ty: ScalarType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetDecl {
    pub name: String,
    pub elem: String,
    /// Retained for specifications only after grounding.
    pub ghost: bool,
}

/// Object-valued field standing for the unique member (or null) of a unit set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundedDecl {
    pub name: String,
    pub class: String,
    pub source: String,
    pub nullable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    pub from: String,
    pub guard: Expr,
    pub to: String,
    pub effect: Stmt,
    pub phase: String,
    /// Position among the class transitions; lower fires first.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    pub fields: Vec<FieldDecl>,
    pub params: Vec<ParamDecl>,
    pub sets: Vec<SetDecl>,
    pub grounded: Vec<GroundedDecl>,
    pub transitions: Vec<Transition>,
}

/// How a member of a class is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemberKind<'a> {
    Field(&'a FieldDecl),
    Executed,
    Param(&'a ParamDecl),
    Set(&'a SetDecl),
    Grounded(&'a GroundedDecl),
}

impl MemberKind<'_> {
    pub fn is_mutable(&self) -> bool {
        matches!(self, MemberKind::Field(_) | MemberKind::Executed)
    }

    pub fn value_type(&self) -> Type {
        match self {
            MemberKind::Field(f) => f.ty.value_type(),
            MemberKind::Executed => Type::Bool,
            MemberKind::Param(p) => p.ty.value_type(),
            MemberKind::Set(s) => Type::Set(s.elem.clone()),
            MemberKind::Grounded(g) => Type::Obj(g.class.clone()),
        }
    }
}

impl ClassDecl {
    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn set(&self, name: &str) -> Option<&SetDecl> {
        self.sets.iter().find(|s| s.name == name)
    }

    pub fn grounded_field(&self, name: &str) -> Option<&GroundedDecl> {
        self.grounded.iter().find(|g| g.name == name)
    }

    pub fn member(&self, name: &str) -> Option<MemberKind<'_>> {
        if name == EXECUTED {
            return Some(MemberKind::Executed);
        }
        if let Some(f) = self.field(name) {
            return Some(MemberKind::Field(f));
        }
        if let Some(p) = self.params.iter().find(|p| p.name == name) {
            return Some(MemberKind::Param(p));
        }
        if let Some(s) = self.set(name) {
            return Some(MemberKind::Set(s));
        }
        self.grounded_field(name).map(MemberKind::Grounded)
    }

    /// The enum of the `location` variable.
    pub fn location_enum(&self) -> &str {
        match self.field(LOCATION).map(|f| &f.ty) {
            Some(ScalarType::Enum(e)) => e,
            _ => "",
        }
    }

    /// Mutable state names: declared fields plus the executed flag.
    pub fn mutable_names(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.fields.iter().map(|f| f.name.as_str()).collect();
        v.push(EXECUTED);
        v
    }

    pub fn events(&self) -> impl Iterator<Item = &FieldDecl> {
        self.fields.iter().filter(|f| f.is_event())
    }

    pub fn timers(&self) -> impl Iterator<Item = &FieldDecl> {
        self.fields.iter().filter(|f| f.is_timer())
    }

    pub fn transitions_in(&self, phase: &str) -> impl Iterator<Item = &Transition> {
        let phase = phase.to_string();
        self.transitions.iter().filter(move |t| t.phase == phase)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedTransition {
    pub from: String,
    pub to: String,
    pub guard: Expr,
}

impl SchedTransition {
    pub fn is_self_loop(&self) -> bool {
        self.from == self.to
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulerDecl {
    pub phases: Vec<String>,
    pub initial: String,
    pub final_phase: String,
    pub transitions: Vec<SchedTransition>,
}

impl SchedulerDecl {
    pub fn self_loops(&self) -> impl Iterator<Item = &SchedTransition> {
        self.transitions.iter().filter(|t| t.is_self_loop())
    }

    pub fn phase_changes(&self) -> impl Iterator<Item = &SchedTransition> {
        self.transitions.iter().filter(|t| !t.is_self_loop())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub expr: Expr,
}

/// A configurable system: classes, scheduler and configuration constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub enums: Vec<EnumDecl>,
    pub classes: Vec<ClassDecl>,
    pub scheduler: SchedulerDecl,
    pub constraints: Vec<Constraint>,
}

impl Model {
    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Panicking lookup for names already validated by the checker.
    pub fn class_decl(&self, name: &str) -> &ClassDecl {
        self.class(name)
            .unwrap_or_else(|| panic!("unknown class {name}"))
    }

    pub fn enum_decl(&self, name: &str) -> Option<&EnumDecl> {
        self.enums.iter().find(|e| e.name == name)
    }

    /// Values of an enum, including the phase enum.
    pub fn enum_values(&self, name: &str) -> Vec<String> {
        if name == PHASE_ENUM {
            return self.scheduler.phases.clone();
        }
        self.enum_decl(name)
            .map(|e| e.values.clone())
            .unwrap_or_default()
    }

    pub fn member(&self, class: &str, name: &str) -> Option<MemberKind<'_>> {
        self.class(class)?.member(name)
    }

    pub fn is_mutable(&self, class: &str, field: &str) -> bool {
        self.member(class, field).is_some_and(|m| m.is_mutable())
    }

    pub fn is_input(&self, class: &str, field: &str) -> bool {
        matches!(self.member(class, field), Some(MemberKind::Field(f)) if f.input)
    }

    /// Syntax-directed type of a resolved expression.
    pub fn type_of(&self, e: &Expr) -> Type {
        match e {
            Expr::Bool(_) => Type::Bool,
            Expr::Int(_) => Type::Int,
            Expr::EnumLit { ty, .. } => Type::Enum(ty.clone()),
            Expr::Inactive | Expr::TimerFrom(_) => Type::Timer,
            Expr::Null(c) | Expr::Var { class: c, .. } => Type::Obj(c.clone()),
            Expr::Field { class, field, .. } => self
                .member(class, field)
                .map(|m| m.value_type())
                .unwrap_or(Type::Bool),
            Expr::Phase => Type::Enum(PHASE_ENUM.to_string()),
            Expr::All(c) => Type::Set(c.clone()),
            Expr::SetLit { class, .. } => Type::Set(class.clone()),
            Expr::Unary(op, _) => match op {
                UnOp::Not | UnOp::TimerActive => Type::Bool,
                UnOp::Neg | UnOp::Card | UnOp::TimerRemaining => Type::Int,
            },
            Expr::Binary(op, a, _) => match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul => Type::Int,
                BinOp::Union => self.type_of(a),
                _ => Type::Bool,
            },
            Expr::Ite(_, t, _) => self.type_of(t),
            Expr::Quant { .. } => Type::Bool,
            Expr::Old(e) => self.type_of(e),
            Expr::Fresh { ty, .. } => ty.clone(),
        }
    }

    /// Element class of a set-typed expression.
    pub fn set_elem(&self, e: &Expr) -> Option<String> {
        match self.type_of(e) {
            Type::Set(c) => Some(c),
            _ => None,
        }
    }
}
