//! Surface syntax: parsing, resolution, restriction checks and printing.

mod check;
mod diag;
mod lexer;
mod parser;
mod print;
mod resolve;
mod syntax;

use std::collections::{BTreeMap, BTreeSet};

pub use diag::{Code, Diagnostic, Diagnostics, Severity, SourceSpan};
pub use print::{print_expr, print_model, print_stmt};
pub use resolve::{DeclKey, Scope, SourceMap};

use crate::model::*;
use crate::sim;
use parser::{parse_file, Parser, RConfigItem};
use resolve::Resolver;
use syntax::{RExpr, RExprKind};

/// A model together with the spans of its declarations and any warnings.
#[derive(Debug, Clone)]
pub struct ParsedModel {
    pub model: Model,
    pub source_map: SourceMap,
    pub warnings: Vec<Diagnostic>,
}

fn split(diags: Vec<Diagnostic>) -> (Vec<Diagnostic>, Vec<Diagnostic>) {
    diags.into_iter().partition(|d| d.is_error())
}

/// Parses, resolves and checks a model file. All errors are reported together.
pub fn parse_model(file: &str, src: &str) -> Result<ParsedModel, Diagnostics> {
    let raw = parse_file(file, src)?;
    let mut map = SourceMap::new(file, src);
    let mut decls = std::mem::take(&mut map.decls);
    let (model, mut diags) = {
        let mut r = Resolver::new(&map);
        let model = r.model(&raw, &mut decls);
        (model, r.diags)
    };
    map.decls = decls;
    diags.extend(check::check(&model, &map));
    let mut seen = BTreeSet::new();
    diags.retain(|d| seen.insert((d.code.as_str(), d.span.start, d.span.end, d.message.clone())));
    let (errors, warnings) = split(diags);
    if !errors.is_empty() {
        return Err(Diagnostics(errors));
    }
    Ok(ParsedModel {
        model,
        source_map: map,
        warnings,
    })
}

/// Re-checks the language restrictions on a model (for example one built or
/// transformed programmatically). Returns the warnings on success.
pub fn check_model(model: &Model, map: Option<&SourceMap>) -> Result<Vec<Diagnostic>, Diagnostics> {
    let fallback = SourceMap::new("<model>", "");
    let (errors, warnings) = split(check::check(model, map.unwrap_or(&fallback)));
    if errors.is_empty() {
        Ok(warnings)
    } else {
        Err(Diagnostics(errors))
    }
}

fn finish<T>(r: Resolver<'_>, v: Option<T>) -> Result<T, Diagnostics> {
    match v {
        Some(v) if r.diags.iter().all(|d| !d.is_error()) => Ok(v),
        _ => Err(Diagnostics(r.diags)),
    }
}

/// Parses a closed global formula: `;`-separated conjuncts.
pub fn parse_invariant(file: &str, src: &str, model: &Model) -> Result<Expr, Diagnostics> {
    let exprs = Parser::new(file, src)?.expr_list()?;
    let map = SourceMap::new(file, src);
    let mut r = Resolver::new(&map);
    let mut parts = Vec::new();
    let mut ok = true;
    for e in &exprs {
        match r.bool_expr(model, e, &mut Scope::global()) {
            Some(x) => parts.push(x),
            None => ok = false,
        }
    }
    let v = ok.then(|| Expr::and_all(parts));
    finish(r, v)
}

/// Parses a class-local formula over `class` (used for the `g'` conditions).
pub fn parse_local_formula(
    file: &str,
    src: &str,
    model: &Model,
    class: &str,
) -> Result<Expr, Diagnostics> {
    let exprs = Parser::new(file, src)?.expr_list()?;
    let map = SourceMap::new(file, src);
    let mut r = Resolver::new(&map);
    let mut parts = Vec::new();
    for e in &exprs {
        if let Some(x) = r.bool_expr(model, e, &mut Scope::class(class)) {
            parts.push(x);
        }
    }
    let v = Some(Expr::and_all(parts));
    finish(r, v)
}

/// Per-(phase, class) local conditions. Absent entries default to `!executed`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocalConditions {
    pub entries: BTreeMap<(String, String), Expr>,
}

impl LocalConditions {
    pub fn get(&self, phase: &str, class: &str) -> Expr {
        self.entries
            .get(&(phase.to_string(), class.to_string()))
            .cloned()
            .unwrap_or_else(|| Expr::not(Expr::self_field(class, EXECUTED)))
    }
}

/// Parses a local-condition file: `Phase: expr;` (every class) or `Phase, Class: expr;`.
pub fn parse_gprime(file: &str, src: &str, model: &Model) -> Result<LocalConditions, Diagnostics> {
    let entries = Parser::new(file, src)?.gprime_entries()?;
    let map = SourceMap::new(file, src);
    let mut r = Resolver::new(&map);
    let mut out = LocalConditions::default();
    for en in &entries {
        if !model.scheduler.phases.contains(&en.phase.0) {
            r.diags.push(Diagnostic::error(
                Code::UnknownName,
                map.at(en.phase.1),
                format!("unknown phase `{}`", en.phase.0),
            ));
            continue;
        }
        let classes: Vec<String> = match &en.class {
            Some((c, span)) => {
                if model.class(c).is_none() {
                    r.diags.push(Diagnostic::error(
                        Code::UnknownName,
                        map.at(*span),
                        format!("unknown class `{c}`"),
                    ));
                    continue;
                }
                vec![c.clone()]
            }
            None => model.classes.iter().map(|c| c.name.clone()).collect(),
        };
        for c in classes {
            if let Some(e) = r.bool_expr(model, &en.expr, &mut Scope::class(&c)) {
                out.entries.insert((en.phase.0.clone(), c), e);
            }
        }
    }
    finish(r, Some(out))
}

/// A configuration plus the evaluation of every constraint on it.
#[derive(Debug, Clone)]
pub struct ParsedConfiguration {
    pub config: Configuration,
    pub constraints: Vec<(String, bool)>,
}

impl ParsedConfiguration {
    pub fn satisfies_all(&self) -> bool {
        self.constraints.iter().all(|(_, b)| *b)
    }
}

fn config_value(
    model: &Model,
    cfg: &Configuration,
    ty: &Type,
    e: &RExpr,
    map: &SourceMap,
) -> Result<Value, Diagnostic> {
    let bad = |msg: String| Diagnostic::error(Code::BadConfiguration, map.at(e.span), msg);
    match (ty, &e.kind) {
        (Type::Set(elem), RExprKind::SetLit(items)) => {
            let mut s = BTreeSet::new();
            for it in items {
                let RExprKind::Ident(n) = &it.kind else {
                    return Err(bad("set elements must be instance names".into()));
                };
                let o = cfg.lookup(n).ok_or_else(|| {
                    Diagnostic::error(
                        Code::UnknownName,
                        map.at(it.span),
                        format!("unknown instance `{n}`"),
                    )
                })?;
                if cfg.class_of(o) != elem {
                    return Err(Diagnostic::error(
                        Code::TypeMismatch,
                        map.at(it.span),
                        format!("`{n}` is a {}, expected a {elem}", cfg.class_of(o)),
                    ));
                }
                s.insert(o);
            }
            Ok(Value::Set(s))
        }
        (Type::Int, RExprKind::Int(n)) => Ok(Value::Int(*n)),
        (Type::Bool, RExprKind::Bool(b)) => Ok(Value::Bool(*b)),
        (Type::Enum(en), RExprKind::Ident(v)) if model.enum_values(en).contains(v) => {
            Ok(Value::Enum(v.clone()))
        }
        _ => Err(Diagnostic::error(
            Code::TypeMismatch,
            map.at(e.span),
            format!("expected a value of type {ty}"),
        )),
    }
}

/// Parses a configuration file and evaluates every constraint on it.
pub fn parse_configuration(
    file: &str,
    src: &str,
    model: &Model,
) -> Result<ParsedConfiguration, Diagnostics> {
    let items = Parser::new(file, src)?.config_items()?;
    let map = SourceMap::new(file, src);
    let mut diags = Vec::new();
    let mut cfg = Configuration::default();
    for it in &items {
        if let RConfigItem::Instances { class, names, .. } = it {
            if model.class(&class.0).is_none() {
                diags.push(Diagnostic::error(
                    Code::UnknownName,
                    map.at(class.1),
                    format!("unknown class `{}`", class.0),
                ));
                continue;
            }
            for (n, span) in names {
                if cfg.lookup(n).is_some() {
                    diags.push(Diagnostic::error(
                        Code::DuplicateDecl,
                        map.at(*span),
                        format!("instance `{n}` listed twice"),
                    ));
                } else {
                    cfg.add_instance(n, &class.0);
                }
            }
        }
    }
    let mut assigned = BTreeSet::new();
    for it in &items {
        let RConfigItem::Assign {
            owner,
            field,
            value,
            span,
        } = it
        else {
            continue;
        };
        let Some(o) = cfg.lookup(&owner.0) else {
            diags.push(Diagnostic::error(
                Code::UnknownName,
                map.at(owner.1),
                format!("unknown instance `{}`", owner.0),
            ));
            continue;
        };
        let class = cfg.class_of(o).to_string();
        let member = model.member(&class, &field.0);
        let ty = match member {
            Some(MemberKind::Set(_)) | Some(MemberKind::Param(_)) => member.unwrap().value_type(),
            _ => {
                diags.push(Diagnostic::error(
                    Code::UnknownName,
                    map.at(field.1),
                    format!("`{}` is not a set or parameter of class `{class}`", field.0),
                ));
                continue;
            }
        };
        if !assigned.insert((o, field.0.clone())) {
            diags.push(Diagnostic::error(
                Code::DuplicateDecl,
                map.at(*span),
                format!("`{}.{}` assigned twice", owner.0, field.0),
            ));
            continue;
        }
        match config_value(model, &cfg, &ty, value, &map) {
            Ok(Value::Set(s)) => {
                cfg.sets.insert((o, field.0.clone()), s);
            }
            Ok(v) => {
                cfg.params.insert((o, field.0.clone()), v);
            }
            Err(d) => diags.push(d),
        }
    }
    for o in cfg.ids() {
        let class = model.class_decl(cfg.class_of(o));
        for p in &class.params {
            if cfg.param(o, &p.name).is_none() {
                diags.push(Diagnostic::error(
                    Code::BadConfiguration,
                    SourceSpan::unknown(file),
                    format!("parameter `{}.{}` has no value", cfg.name(o), p.name),
                ));
            }
        }
    }
    if !diags.is_empty() {
        return Err(Diagnostics(diags));
    }
    let constraints = sim::eval_constraints(model, &cfg)
        .into_iter()
        .map(|(n, r)| (n, matches!(r, Ok(true))))
        .collect();
    Ok(ParsedConfiguration {
        config: cfg,
        constraints,
    })
}

/// Renders a configuration in `.sracfg` syntax. Classes appear in the order
/// of their first instance, so re-parsing yields the same instance ids.
pub fn print_configuration(model: &Model, cfg: &Configuration) -> String {
    let mut out = String::new();
    let mut classes: Vec<&str> = Vec::new();
    for o in cfg.ids() {
        let c = cfg.class_of(o);
        if !classes.contains(&c) {
            classes.push(c);
        }
    }
    for c in classes.into_iter().filter(|c| model.class(c).is_some()) {
        let names: Vec<&str> = cfg.universe(c).into_iter().map(|o| cfg.name(o)).collect();
        out.push_str(&format!("instances {c} {{ {} }}\n", names.join(", ")));
    }
    for ((o, f), s) in &cfg.sets {
        let names: Vec<&str> = s.iter().map(|x| cfg.name(*x)).collect();
        out.push_str(&format!(
            "{}.{f} = {{ {} }};\n",
            cfg.name(*o),
            names.join(", ")
        ));
    }
    for ((o, f), v) in &cfg.params {
        out.push_str(&format!("{}.{f} = {v};\n", cfg.name(*o)));
    }
    out
}
