//! Name and type resolution from raw syntax to [`Model`].

use std::collections::{BTreeSet, HashMap};

use super::diag::{Code, Diagnostic, SourceSpan};
use super::syntax::*;
use crate::model::*;

/// Declaration whose span is remembered for later diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DeclKey {
    Enum(String),
    Class(String),
    Member(String, String),
    Transition(String, String),
    Scheduler,
    SchedTrans(usize),
    Constraint(usize),
}

/// Spans of the declarations of one source file.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    pub file: String,
    pub src: String,
    pub decls: HashMap<DeclKey, Span>,
}

impl SourceMap {
    pub fn new(file: &str, src: &str) -> SourceMap {
        SourceMap {
            file: file.to_string(),
            src: src.to_string(),
            decls: HashMap::new(),
        }
    }

    pub fn span(&self, key: &DeclKey) -> SourceSpan {
        match self.decls.get(key) {
            Some((s, e)) => SourceSpan::new(&self.file, &self.src, *s, *e),
            None => SourceSpan::unknown(&self.file),
        }
    }

    pub fn at(&self, span: Span) -> SourceSpan {
        SourceSpan::new(&self.file, &self.src, span.0, span.1)
    }
}

/// Lexical context of an expression.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    /// Class of the implicit receiver, if any.
    pub this: Option<String>,
    pub binders: Vec<(String, String)>,
    pub allow_old: bool,
}

impl Scope {
    pub fn global() -> Scope {
        Scope::default()
    }

    pub fn class(c: &str) -> Scope {
        Scope {
            this: Some(c.to_string()),
            ..Scope::default()
        }
    }

    fn binder(&self, name: &str) -> Option<&str> {
        self.binders
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
    }
}

pub struct Resolver<'a> {
    pub map: &'a SourceMap,
    pub diags: Vec<Diagnostic>,
}

impl<'a> Resolver<'a> {
    pub fn new(map: &'a SourceMap) -> Resolver<'a> {
        Resolver {
            map,
            diags: Vec::new(),
        }
    }

    fn err(&mut self, code: Code, span: Span, msg: impl Into<String>) {
        self.diags
            .push(Diagnostic::error(code, self.map.at(span), msg));
    }

    // ---- declarations ----

    pub fn model(&mut self, file: &RFile, decls: &mut HashMap<DeclKey, Span>) -> Model {
        let mut enums: Vec<EnumDecl> = Vec::new();
        for e in &file.enums {
            if enums.iter().any(|x| x.name == e.name) || e.name == PHASE_ENUM {
                self.err(
                    Code::DuplicateDecl,
                    e.span,
                    format!("duplicate enum `{}`", e.name),
                );
                continue;
            }
            decls.insert(DeclKey::Enum(e.name.clone()), e.span);
            let mut values = Vec::new();
            for (v, span) in &e.values {
                if values.contains(v) {
                    self.err(
                        Code::BadEnum,
                        *span,
                        format!("duplicate value `{v}` in enum `{}`", e.name),
                    );
                } else {
                    values.push(v.clone());
                }
            }
            enums.push(EnumDecl {
                name: e.name.clone(),
                values,
            });
        }

        let scheduler = self.scheduler_shell(file, decls);
        let class_names: Vec<String> = file.classes.iter().map(|c| c.name.clone()).collect();
        let mut classes: Vec<ClassDecl> = Vec::new();
        for c in &file.classes {
            if classes.iter().any(|x| x.name == c.name) {
                self.err(
                    Code::DuplicateDecl,
                    c.span,
                    format!("duplicate class `{}`", c.name),
                );
                continue;
            }
            if enums.iter().any(|e| e.name == c.name) {
                self.err(
                    Code::DuplicateDecl,
                    c.span,
                    format!("`{}` is already an enum", c.name),
                );
                continue;
            }
            decls.insert(DeclKey::Class(c.name.clone()), c.span);
            classes.push(self.class_shell(c, &enums, &class_names, decls));
        }

        let mut model = Model {
            enums,
            classes,
            scheduler,
            constraints: Vec::new(),
        };

        // Initial values, transitions.
        for rc in &file.classes {
            let Some(ci) = model.classes.iter().position(|c| c.name == rc.name) else {
                continue;
            };
            if decls.get(&DeclKey::Class(rc.name.clone())) != Some(&rc.span) {
                continue;
            }
            let mut inits = Vec::new();
            for m in &rc.members {
                if let (Some(init), Some(f)) = (&m.init, model.classes[ci].field(&m.name)) {
                    let ty = f.ty.clone();
                    inits.push((m.name.clone(), self.init_value(&model, init, &ty)));
                }
            }
            let mut transitions = Vec::new();
            for rt in &rc.transitions {
                if transitions.iter().any(|t: &Transition| t.name == rt.name) {
                    self.err(
                        Code::DuplicateDecl,
                        rt.span,
                        format!("duplicate transition `{}`", rt.name),
                    );
                    continue;
                }
                decls.insert(
                    DeclKey::Transition(rc.name.clone(), rt.name.clone()),
                    rt.span,
                );
                if let Some(t) = self.transition(&model, &rc.name, rt, transitions.len()) {
                    transitions.push(t);
                }
            }
            let class = &mut model.classes[ci];
            for (name, v) in inits {
                if let Some(f) = class.fields.iter_mut().find(|f| f.name == name) {
                    f.init = v;
                }
            }
            class.transitions = transitions;
        }

        // Scheduler guards.
        if let Some(rs) = file.schedulers.first() {
            let mut ts = Vec::new();
            for (i, rt) in rs.transitions.iter().enumerate() {
                decls.insert(DeclKey::SchedTrans(i), rt.span);
                let mut ok = true;
                for (p, span) in [&rt.from, &rt.to] {
                    if !model.scheduler.phases.contains(p) {
                        self.err(Code::UnknownName, *span, format!("unknown phase `{p}`"));
                        ok = false;
                    }
                }
                let guard = match &rt.guard {
                    Some(g) => self.bool_expr(&model, g, &mut Scope::global()),
                    None => Some(Expr::tt()),
                };
                if let (true, Some(guard)) = (ok, guard) {
                    ts.push(SchedTransition {
                        from: rt.from.0.clone(),
                        to: rt.to.0.clone(),
                        guard,
                    });
                }
            }
            model.scheduler.transitions = ts;
        }

        // Constraints.
        let mut constraints = Vec::new();
        for (i, rc) in file.constraints.iter().enumerate() {
            decls.insert(DeclKey::Constraint(constraints.len()), rc.span);
            let name = rc
                .label
                .clone()
                .unwrap_or_else(|| format!("Gamma{}", i + 1));
            if constraints.iter().any(|c: &Constraint| c.name == name) {
                self.err(
                    Code::DuplicateDecl,
                    rc.span,
                    format!("duplicate constraint label `{name}`"),
                );
                continue;
            }
            if let Some(expr) = self.bool_expr(&model, &rc.expr, &mut Scope::global()) {
                constraints.push(Constraint { name, expr });
            }
        }
        model.constraints = constraints;
        model
    }

    fn scheduler_shell(
        &mut self,
        file: &RFile,
        decls: &mut HashMap<DeclKey, Span>,
    ) -> SchedulerDecl {
        let mut sched = SchedulerDecl {
            phases: vec![],
            initial: String::new(),
            final_phase: String::new(),
            transitions: vec![],
        };
        let Some(rs) = file.schedulers.first() else {
            return sched;
        };
        for extra in &file.schedulers[1..] {
            self.err(Code::DuplicateDecl, extra.span, "duplicate scheduler block");
        }
        decls.insert(DeclKey::Scheduler, rs.span);
        for (p, span) in &rs.phases {
            if sched.phases.contains(p) {
                self.err(Code::DuplicateDecl, *span, format!("duplicate phase `{p}`"));
            } else {
                sched.phases.push(p.clone());
            }
        }
        for (slot, target, what) in [
            (&rs.initial, &mut sched.initial, "initial"),
            (&rs.final_phase, &mut sched.final_phase, "final"),
        ] {
            match slot {
                Some((p, span)) => {
                    if sched.phases.contains(p) {
                        *target = p.clone();
                    } else {
                        self.err(
                            Code::UnknownName,
                            *span,
                            format!("unknown {what} phase `{p}`"),
                        );
                    }
                }
                None => self.err(
                    Code::SchedulerShape,
                    rs.span,
                    format!("scheduler has no {what} phase"),
                ),
            }
        }
        sched
    }

    fn scalar_type(
        &mut self,
        ty: &RType,
        enums: &[EnumDecl],
        classes: &[String],
        span: Span,
    ) -> Option<ScalarType> {
        match ty {
            RType::Named(n) => match n.as_str() {
                "Int" => Some(ScalarType::Int),
                "Bool" => Some(ScalarType::Bool),
                "Timer" => Some(ScalarType::Timer),
                "Event" => Some(ScalarType::Event),
                _ if enums.iter().any(|e| e.name == *n) => Some(ScalarType::Enum(n.clone())),
                _ if classes.contains(n) => {
                    self.err(
                        Code::TypeMismatch,
                        span,
                        format!("object-valued field of type `{n}` must be declared as a set"),
                    );
                    None
                }
                _ => {
                    self.err(Code::UnknownName, span, format!("unknown type `{n}`"));
                    None
                }
            },
            RType::Set(_) => {
                self.err(
                    Code::TypeMismatch,
                    span,
                    "set-valued fields are declared with `set`",
                );
                None
            }
        }
    }

    fn class_shell(
        &mut self,
        rc: &RClass,
        enums: &[EnumDecl],
        classes: &[String],
        decls: &mut HashMap<DeclKey, Span>,
    ) -> ClassDecl {
        let mut c = ClassDecl {
            name: rc.name.clone(),
            fields: vec![],
            params: vec![],
            sets: vec![],
            grounded: vec![],
            transitions: vec![],
        };
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for m in &rc.members {
            if m.name == EXECUTED {
                // The executed flag is built in; an explicit Bool declaration is accepted as sugar.
                let is_bool = matches!(&m.ty, Some(RType::Named(t)) if t == "Bool");
                if !(m.keyword == MemberKeyword::Var && is_bool && m.init.is_none()) {
                    self.err(
                        Code::DuplicateDecl,
                        m.span,
                        "`executed` is a built-in Bool flag",
                    );
                }
                continue;
            }
            if !seen.insert(m.name.clone()) {
                self.err(
                    Code::DuplicateDecl,
                    m.span,
                    format!("duplicate member `{}` in class `{}`", m.name, rc.name),
                );
                continue;
            }
            decls.insert(DeclKey::Member(rc.name.clone(), m.name.clone()), m.span);
            match m.keyword {
                MemberKeyword::Var | MemberKeyword::Input => {
                    let Some(ty) = self.scalar_type(m.ty.as_ref().unwrap(), enums, classes, m.span)
                    else {
                        continue;
                    };
                    if m.keyword == MemberKeyword::Input
                        && matches!(ty, ScalarType::Event | ScalarType::Timer)
                    {
                        self.err(
                            Code::TypeMismatch,
                            m.span,
                            "inputs must be Int, Bool or enum typed",
                        );
                        continue;
                    }
                    c.fields.push(FieldDecl {
                        name: m.name.clone(),
                        ty,
                        input: m.keyword == MemberKeyword::Input,
                        init: None,
                    });
                }
                MemberKeyword::Event | MemberKeyword::Timer => {
                    let want = if m.keyword == MemberKeyword::Event {
                        "Event"
                    } else {
                        "Timer"
                    };
                    if let Some(RType::Named(t)) = &m.ty {
                        if t != want && !(want == "Event" && t == "Bool") {
                            self.err(
                                Code::TypeMismatch,
                                m.span,
                                format!("expected type `{want}`"),
                            );
                            continue;
                        }
                    } else if m.ty.is_some() {
                        self.err(
                            Code::TypeMismatch,
                            m.span,
                            format!("expected type `{want}`"),
                        );
                        continue;
                    }
                    let ty = if want == "Event" {
                        ScalarType::Event
                    } else {
                        ScalarType::Timer
                    };
                    c.fields.push(FieldDecl {
                        name: m.name.clone(),
                        ty,
                        input: false,
                        init: None,
                    });
                }
                MemberKeyword::Param => {
                    let Some(ty) = self.scalar_type(m.ty.as_ref().unwrap(), enums, classes, m.span)
                    else {
                        continue;
                    };
                    if matches!(ty, ScalarType::Event | ScalarType::Timer) {
                        self.err(
                            Code::TypeMismatch,
                            m.span,
                            "parameters must be Int, Bool or enum typed",
                        );
                        continue;
                    }
                    c.params.push(ParamDecl {
                        name: m.name.clone(),
                        ty,
                    });
                }
                MemberKeyword::Set | MemberKeyword::GhostSet => match m.ty.as_ref().unwrap() {
                    RType::Set(elem) if classes.contains(elem) => c.sets.push(SetDecl {
                        name: m.name.clone(),
                        elem: elem.clone(),
                        ghost: m.keyword == MemberKeyword::GhostSet,
                    }),
                    RType::Set(elem) => {
                        self.err(Code::UnknownName, m.span, format!("unknown class `{elem}`"))
                    }
                    RType::Named(_) => {
                        self.err(Code::TypeMismatch, m.span, "expected `Set<Class>`")
                    }
                },
                MemberKeyword::Grounded => {
                    let Some(RType::Named(cls)) = &m.ty else {
                        continue;
                    };
                    if !classes.contains(cls) {
                        self.err(Code::UnknownName, m.span, format!("unknown class `{cls}`"));
                        continue;
                    }
                    c.grounded.push(GroundedDecl {
                        name: m.name.clone(),
                        class: cls.clone(),
                        source: m.source.clone().unwrap_or_default(),
                        nullable: m.nullable,
                    });
                }
            }
        }
        for g in &c.grounded {
            match c.sets.iter().find(|s| s.name == g.source) {
                Some(s) if s.elem == g.class => {}
                Some(_) => self.err(
                    Code::TypeMismatch,
                    rc.span,
                    format!("grounded field `{}` has the wrong element class", g.name),
                ),
                None => self.err(
                    Code::UnknownName,
                    rc.span,
                    format!("unknown source set `{}`", g.source),
                ),
            }
        }
        c
    }

    fn init_value(&mut self, model: &Model, e: &RExpr, ty: &ScalarType) -> Option<Expr> {
        let want = ty.value_type();
        let hint = if *ty == ScalarType::Timer {
            Type::Int
        } else {
            want.clone()
        };
        let v = self.expr(model, e, &mut Scope::global(), Some(&hint))?;
        if !free_symbols(&v).is_empty() {
            self.err(
                Code::TypeMismatch,
                e.span,
                "initial values must be constant",
            );
            return None;
        }
        let got = model.type_of(&v);
        if *ty == ScalarType::Timer && got == Type::Int {
            return Some(Expr::TimerFrom(Box::new(v)));
        }
        self.check(got, &want, e.span)?;
        Some(v)
    }

    fn transition(
        &mut self,
        model: &Model,
        class: &str,
        rt: &RTransition,
        index: usize,
    ) -> Option<Transition> {
        let c = model.class_decl(class);
        let loc_enum = c.location_enum().to_string();
        let locs = model.enum_values(&loc_enum);
        let mut ok = true;
        if !loc_enum.is_empty() {
            for (l, span) in [&rt.from, &rt.to] {
                if !locs.contains(l) {
                    self.err(
                        Code::UnknownName,
                        *span,
                        format!("unknown location `{l}` of class `{class}`"),
                    );
                    ok = false;
                }
            }
        }
        if !model.scheduler.phases.contains(&rt.phase.0) {
            self.err(
                Code::UnknownName,
                rt.phase.1,
                format!("unknown phase `{}`", rt.phase.0),
            );
            ok = false;
        }
        let guard = self.bool_expr(model, &rt.guard, &mut Scope::class(class));
        let effect = self.block(model, class, &rt.body);
        if !ok {
            return None;
        }
        Some(Transition {
            name: rt.name.clone(),
            from: rt.from.0.clone(),
            guard: guard?,
            to: rt.to.0.clone(),
            effect: effect?,
            phase: rt.phase.0.clone(),
            index,
        })
    }

    // ---- statements ----

    fn block(&mut self, model: &Model, class: &str, body: &[RStmt]) -> Option<Stmt> {
        let mut out = Vec::new();
        let mut ok = true;
        for s in body {
            match self.stmt(model, class, s) {
                Some(s) => out.push(s),
                None => ok = false,
            }
        }
        ok.then_some(if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Stmt::Seq(out)
        })
    }

    fn assigned_value(
        &mut self,
        model: &Model,
        ty: &Type,
        value: &RExpr,
        scope: &mut Scope,
    ) -> Option<Expr> {
        if *ty == Type::Timer {
            let v = self.expr(model, value, scope, Some(&Type::Int))?;
            return match model.type_of(&v) {
                Type::Int => Some(Expr::TimerFrom(Box::new(v))),
                Type::Timer => Some(v),
                other => {
                    self.err(
                        Code::TypeMismatch,
                        value.span,
                        format!("expected Timer or Int, found {other}"),
                    );
                    None
                }
            };
        }
        let v = self.expr(model, value, scope, Some(ty))?;
        self.check(model.type_of(&v), ty, value.span)?;
        Some(v)
    }

    fn stmt(&mut self, model: &Model, class: &str, s: &RStmt) -> Option<Stmt> {
        match &s.kind {
            RStmtKind::Assign { target, value } => match &target.kind {
                RExprKind::Ident(f) => {
                    let Some(member) = model.member(class, f) else {
                        self.err(
                            Code::UnknownName,
                            target.span,
                            format!("unknown field `{f}` of class `{class}`"),
                        );
                        return None;
                    };
                    let ty = member.value_type();
                    match value {
                        None => Some(Stmt::Havoc { field: f.clone() }),
                        Some(v) => {
                            let value =
                                self.assigned_value(model, &ty, v, &mut Scope::class(class))?;
                            Some(Stmt::Assign {
                                field: f.clone(),
                                value,
                            })
                        }
                    }
                }
                RExprKind::Field(obj, f) => {
                    let target_obj = self.expr(model, obj, &mut Scope::class(class), None)?;
                    let is_grounded = matches!(&target_obj, Expr::Field { obj, class: c, field }
                        if c == class
                            && matches!(obj.as_ref(), Expr::Var { name, .. } if name == SELF)
                            && matches!(model.member(class, field), Some(MemberKind::Grounded(_))));
                    if !is_grounded {
                        self.err(
                            Code::QuantifiedAssign,
                            s.span,
                            "fields of other objects may only be assigned inside a quantified assignment",
                        );
                        return None;
                    }
                    let Type::Obj(d) = model.type_of(&target_obj) else {
                        return None;
                    };
                    let Some(member) = model.member(&d, f) else {
                        self.err(
                            Code::UnknownName,
                            target.span,
                            format!("unknown field `{f}` of class `{d}`"),
                        );
                        return None;
                    };
                    let Some(v) = value else {
                        self.err(
                            Code::QuantifiedAssign,
                            s.span,
                            "havoc of another object's field",
                        );
                        return None;
                    };
                    let value = self.assigned_value(
                        model,
                        &member.value_type(),
                        v,
                        &mut Scope::class(class),
                    )?;
                    Some(Stmt::ObjAssign {
                        target: target_obj,
                        class: d,
                        field: f.clone(),
                        value,
                    })
                }
                _ => {
                    self.err(Code::Syntax, target.span, "invalid assignment target");
                    None
                }
            },
            RStmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = self.bool_expr(model, cond, &mut Scope::class(class));
                let t = self.block(model, class, then_branch);
                let e = self.block(model, class, else_branch);
                Some(Stmt::If {
                    cond: c?,
                    then_branch: Box::new(t?),
                    else_branch: Box::new(e?),
                })
            }
            RStmtKind::Forall { var, range, body } => {
                let mut scope = Scope::class(class);
                let set = self.expr(model, range, &mut scope, None)?;
                let Type::Set(d) = model.type_of(&set) else {
                    self.err(
                        Code::QuantifierRange,
                        range.span,
                        "quantified assignment must range over a set",
                    );
                    return None;
                };
                let single = match body.as_slice() {
                    [RStmt {
                        kind:
                            RStmtKind::Assign {
                                target,
                                value: Some(v),
                            },
                        ..
                    }] => match &target.kind {
                        RExprKind::Field(obj, f) if matches!(&obj.kind, RExprKind::Ident(x) if x == var) => {
                            Some((f.clone(), v))
                        }
                        _ => None,
                    },
                    _ => None,
                };
                let Some((field, v)) = single else {
                    self.err(
                        Code::QuantifiedAssign,
                        s.span,
                        format!("quantified assignment body must be a single `{var}.f := e;`"),
                    );
                    return None;
                };
                let Some(member) = model.member(&d, &field) else {
                    self.err(
                        Code::UnknownName,
                        s.span,
                        format!("unknown field `{field}` of class `{d}`"),
                    );
                    return None;
                };
                scope.binders.push((var.clone(), d.clone()));
                let value = self.assigned_value(model, &member.value_type(), v, &mut scope)?;
                Some(Stmt::ForallAssign {
                    var: var.clone(),
                    class: d,
                    set,
                    field,
                    value,
                })
            }
            RStmtKind::Assume(e) => Some(Stmt::Assume(self.bool_expr(
                model,
                e,
                &mut Scope::class(class),
            )?)),
            RStmtKind::Assert(e) => Some(Stmt::Assert(self.bool_expr(
                model,
                e,
                &mut Scope::class(class),
            )?)),
        }
    }

    // ---- expressions ----

    fn check(&mut self, got: Type, want: &Type, span: Span) -> Option<()> {
        if got == *want {
            Some(())
        } else {
            self.err(
                Code::TypeMismatch,
                span,
                format!("expected {want}, found {got}"),
            );
            None
        }
    }

    pub fn bool_expr(&mut self, model: &Model, e: &RExpr, scope: &mut Scope) -> Option<Expr> {
        let v = self.expr(model, e, scope, Some(&Type::Bool))?;
        self.check(model.type_of(&v), &Type::Bool, e.span)?;
        Some(v)
    }

    /// True when `e` is a bare name that can only be an enum literal.
    fn is_bare_literal(&self, model: &Model, e: &RExpr, scope: &Scope) -> bool {
        match &e.kind {
            RExprKind::Ident(n) => {
                scope.binder(n).is_none()
                    && !(n == SELF && scope.this.is_some())
                    && !scope
                        .this
                        .as_ref()
                        .is_some_and(|c| model.member(c, n).is_some())
                    && n != "phase"
                    && !n.starts_with("All")
            }
            RExprKind::Null | RExprKind::SetLit(_) => true,
            _ => false,
        }
    }

    pub fn expr(
        &mut self,
        model: &Model,
        e: &RExpr,
        scope: &mut Scope,
        hint: Option<&Type>,
    ) -> Option<Expr> {
        match &e.kind {
            RExprKind::Bool(b) => Some(Expr::Bool(*b)),
            RExprKind::Int(n) => Some(Expr::Int(*n)),
            RExprKind::Inactive => Some(Expr::Inactive),
            RExprKind::Null => match hint {
                Some(Type::Obj(c)) => Some(Expr::Null(c.clone())),
                _ => {
                    self.err(
                        Code::TypeMismatch,
                        e.span,
                        "`null` needs an object-typed context",
                    );
                    None
                }
            },
            RExprKind::Ident(n) => self.ident(model, n, e.span, scope, hint),
            RExprKind::Field(obj, f) => {
                let o = self.expr(model, obj, scope, None)?;
                match model.type_of(&o) {
                    Type::Obj(c) => {
                        if model.member(&c, f).is_none() {
                            self.err(
                                Code::UnknownName,
                                e.span,
                                format!("unknown field `{f}` of class `{c}`"),
                            );
                            return None;
                        }
                        Some(Expr::field(o, &c, f))
                    }
                    Type::Timer => match f.as_str() {
                        "active" => Some(Expr::Unary(UnOp::TimerActive, Box::new(o))),
                        "remaining" => Some(Expr::Unary(UnOp::TimerRemaining, Box::new(o))),
                        _ => {
                            self.err(
                                Code::UnknownName,
                                e.span,
                                format!("timers have `active` and `remaining`, not `{f}`"),
                            );
                            None
                        }
                    },
                    other => {
                        self.err(
                            Code::TypeMismatch,
                            e.span,
                            format!("field access on a value of type {other}"),
                        );
                        None
                    }
                }
            }
            RExprKind::Unary(op, a) => {
                let (want, uop) = match op {
                    RUn::Not => (Type::Bool, UnOp::Not),
                    RUn::Neg => (Type::Int, UnOp::Neg),
                };
                let v = self.expr(model, a, scope, Some(&want))?;
                self.check(model.type_of(&v), &want, a.span)?;
                Some(Expr::Unary(uop, Box::new(v)))
            }
            RExprKind::Binary(op, a, b) => self.binary(model, *op, a, b, e.span, scope),
            RExprKind::Ite(c, t, f) => {
                let c = self.bool_expr(model, c, scope);
                let (t, f) = if self.is_bare_literal(model, t, scope)
                    && !self.is_bare_literal(model, f, scope)
                {
                    let f = self.expr(model, f, scope, hint)?;
                    let ty = model.type_of(&f);
                    (self.expr(model, t, scope, Some(&ty))?, f)
                } else {
                    let t = self.expr(model, t, scope, hint)?;
                    let ty = model.type_of(&t);
                    (t, self.expr(model, f, scope, Some(&ty))?)
                };
                self.check(model.type_of(&f), &model.type_of(&t), e.span)?;
                Some(Expr::ite(c?, t, f))
            }
            RExprKind::Card(a) => {
                let v = self.expr(model, a, scope, None)?;
                match model.type_of(&v) {
                    Type::Set(_) => Some(Expr::Unary(UnOp::Card, Box::new(v))),
                    other => {
                        self.err(
                            Code::TypeMismatch,
                            a.span,
                            format!("cardinality of a non-set ({other})"),
                        );
                        None
                    }
                }
            }
            RExprKind::Old(a) => {
                if !scope.allow_old {
                    self.err(
                        Code::OldInSource,
                        e.span,
                        "`old` is only allowed in contracts",
                    );
                    return self.expr(model, a, scope, hint);
                }
                Some(Expr::old(self.expr(model, a, scope, hint)?))
            }
            RExprKind::SetLit(elems) => {
                let elem_hint = match hint {
                    Some(Type::Set(c)) => Some(Type::Obj(c.clone())),
                    _ => None,
                };
                let mut out = Vec::new();
                let mut class = elem_hint.as_ref().map(|t| match t {
                    Type::Obj(c) => c.clone(),
                    _ => unreachable!(),
                });
                for x in elems {
                    let h = class.clone().map(Type::Obj);
                    let v = self.expr(model, x, scope, h.as_ref())?;
                    match (model.type_of(&v), &class) {
                        (Type::Obj(c), None) => class = Some(c),
                        (Type::Obj(c), Some(k)) if c == *k => {}
                        (other, _) => {
                            self.err(
                                Code::TypeMismatch,
                                x.span,
                                format!("set elements must be objects of one class, found {other}"),
                            );
                            return None;
                        }
                    }
                    out.push(v);
                }
                match class {
                    Some(class) => Some(Expr::SetLit { class, elems: out }),
                    None => {
                        self.err(
                            Code::TypeMismatch,
                            e.span,
                            "cannot infer the element class of an empty set literal",
                        );
                        None
                    }
                }
            }
            RExprKind::Quant {
                forall,
                var,
                range,
                body,
            } => {
                let all_range = matches!(&range.kind, RExprKind::Ident(n) if n == "All" && scope.binder("All").is_none());
                if all_range {
                    let mut parts = Vec::new();
                    for c in &model.classes {
                        scope.binders.push((var.clone(), c.name.clone()));
                        let b = self.bool_expr(model, body, scope);
                        scope.binders.pop();
                        let b = b?;
                        parts.push(if *forall {
                            Expr::forall(var, &c.name, Expr::All(c.name.clone()), b)
                        } else {
                            Expr::exists(var, &c.name, Expr::All(c.name.clone()), b)
                        });
                    }
                    let folded = parts.into_iter().reduce(|a, b| {
                        Expr::bin(if *forall { BinOp::And } else { BinOp::Or }, a, b)
                    });
                    return Some(folded.unwrap_or(Expr::Bool(*forall)));
                }
                let set = self.expr(model, range, scope, None)?;
                let Type::Set(c) = model.type_of(&set) else {
                    self.err(
                        Code::QuantifierRange,
                        range.span,
                        "quantifiers must range over a set",
                    );
                    return None;
                };
                scope.binders.push((var.clone(), c.clone()));
                let b = self.bool_expr(model, body, scope);
                scope.binders.pop();
                let b = b?;
                Some(if *forall {
                    Expr::forall(var, &c, set, b)
                } else {
                    Expr::exists(var, &c, set, b)
                })
            }
        }
    }

    fn ident(
        &mut self,
        model: &Model,
        n: &str,
        span: Span,
        scope: &Scope,
        hint: Option<&Type>,
    ) -> Option<Expr> {
        if let Some(c) = scope.binder(n) {
            return Some(Expr::var(n, c));
        }
        if let Some(c) = &scope.this {
            if n == SELF {
                return Some(Expr::self_var(c));
            }
            if model.member(c, n).is_some() {
                return Some(Expr::self_field(c, n));
            }
        }
        if n == "phase" {
            return Some(Expr::Phase);
        }
        if let Some(c) = n.strip_prefix("All_") {
            if model.class(c).is_some() {
                return Some(Expr::All(c.to_string()));
            }
        }
        if n == "All" {
            self.err(
                Code::UnknownName,
                span,
                "`All` may only be used as a quantifier range",
            );
            return None;
        }
        if let Some(Type::Enum(en)) = hint {
            if model.enum_values(en).iter().any(|v| v == n) {
                return Some(Expr::enum_lit(en, n));
            }
        }
        let mut owners: Vec<String> = model
            .enums
            .iter()
            .filter(|e| e.values.iter().any(|v| v == n))
            .map(|e| e.name.clone())
            .collect();
        if model.scheduler.phases.iter().any(|p| p == n) {
            owners.push(PHASE_ENUM.to_string());
        }
        match owners.len() {
            1 => Some(Expr::enum_lit(&owners[0], n)),
            0 => {
                self.err(Code::UnknownName, span, format!("unknown name `{n}`"));
                None
            }
            _ => {
                self.err(
                    Code::TypeMismatch,
                    span,
                    format!("ambiguous enum value `{n}` (one of {})", owners.join(", ")),
                );
                None
            }
        }
    }

    fn binary(
        &mut self,
        model: &Model,
        op: RBin,
        a: &RExpr,
        b: &RExpr,
        span: Span,
        scope: &mut Scope,
    ) -> Option<Expr> {
        use RBin::*;
        match op {
            And | Or | Implies | Iff => {
                let x = self.bool_expr(model, a, scope);
                let y = self.bool_expr(model, b, scope);
                let bop = match op {
                    And => BinOp::And,
                    Or => BinOp::Or,
                    Implies => BinOp::Implies,
                    _ => BinOp::Iff,
                };
                Some(Expr::bin(bop, x?, y?))
            }
            Eq | Ne => {
                let (x, y) = if self.is_bare_literal(model, a, scope)
                    && !self.is_bare_literal(model, b, scope)
                {
                    let y = self.expr(model, b, scope, None)?;
                    let ty = model.type_of(&y);
                    (self.expr(model, a, scope, Some(&ty))?, y)
                } else {
                    let x = self.expr(model, a, scope, None)?;
                    let ty = model.type_of(&x);
                    let y = self.expr(model, b, scope, Some(&ty))?;
                    (x, y)
                };
                self.check(model.type_of(&y), &model.type_of(&x), span)?;
                Some(Expr::bin(
                    if op == Eq { BinOp::Eq } else { BinOp::Ne },
                    x,
                    y,
                ))
            }
            Add | Sub | Mul | Lt | Le | Gt | Ge => {
                let x = self.expr(model, a, scope, Some(&Type::Int))?;
                let tx = model.type_of(&x);
                if let Type::Set(_) = &tx {
                    let bop = match op {
                        Add => BinOp::Union,
                        Le => BinOp::Subset,
                        _ => {
                            self.err(Code::TypeMismatch, span, "only `+` and `<=` apply to sets");
                            return None;
                        }
                    };
                    let y = self.expr(model, b, scope, Some(&tx))?;
                    self.check(model.type_of(&y), &tx, b.span)?;
                    return Some(Expr::bin(bop, x, y));
                }
                self.check(tx, &Type::Int, a.span)?;
                let y = self.expr(model, b, scope, Some(&Type::Int))?;
                self.check(model.type_of(&y), &Type::Int, b.span)?;
                let bop = match op {
                    Add => BinOp::Add,
                    Sub => BinOp::Sub,
                    Mul => BinOp::Mul,
                    Lt => BinOp::Lt,
                    Le => BinOp::Le,
                    Gt => BinOp::Gt,
                    _ => BinOp::Ge,
                };
                Some(Expr::bin(bop, x, y))
            }
            In => {
                let y = self.expr(model, b, scope, None)?;
                let Type::Set(c) = model.type_of(&y) else {
                    self.err(
                        Code::TypeMismatch,
                        b.span,
                        "right operand of `in` must be a set",
                    );
                    return None;
                };
                let x = self.expr(model, a, scope, Some(&Type::Obj(c.clone())))?;
                self.check(model.type_of(&x), &Type::Obj(c), a.span)?;
                Some(Expr::bin(BinOp::In, x, y))
            }
            Disjoint => {
                let x = self.expr(model, a, scope, None)?;
                let tx = model.type_of(&x);
                if !matches!(tx, Type::Set(_)) {
                    self.err(Code::TypeMismatch, a.span, "operands of `!!` must be sets");
                    return None;
                }
                let y = self.expr(model, b, scope, Some(&tx))?;
                self.check(model.type_of(&y), &tx, b.span)?;
                Some(Expr::bin(BinOp::Disjoint, x, y))
            }
        }
    }
}
