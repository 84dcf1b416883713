//! Symbolic maps of effects compared with concrete execution.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use super::gen::{random_config, random_state, ConfigGen};
use super::OracleError;
use crate::contract::{equal_partial, transform_effect, SymbolicMap};
use crate::frontend::parse_model;
use crate::model::*;
use crate::sim::{run_effect, Env, SimRng};

/// Declarations random effects are generated over. Every statement form of
/// the effect language has a target here: scalar fields of each type, a
/// timer, a foreign set, an own-class set (so quantified writes may hit the
/// receiver) and a nullable grounded reference.
pub const EFFECT_TEST_MODEL: &str = r#"
enum Loc { L0 }
enum Mode { A, B, C }

class P {
  var location : Loc = L0
  var executed : Bool
  var x : Int = 0
  var y : Int = 0
  var b : Bool = false
  var c : Bool = false
  var mode : Mode = A
  timer t
  set peers : Set<Q>
  set others : Set<P>
  set buddies : Set<Q>
  grounded buddy : Q? from buddies

  transition idle = (L0, true, L0, { }, Run)
}

class Q {
  var location : Loc = L0
  var executed : Bool
  var v : Int = 0
  var w : Bool = false

  transition idle = (L0, true, L0, { }, Run)
}

scheduler {
  phases { Run, End }
  initial Run;
  final End;
  trans Run -> Run when forall x in All : !x.executed;
  trans Run -> End when forall x in All : x.executed;
}

constraints {
  OneBuddy: forall p in All_P : |p.buddies| <= 1;
}
"#;

pub fn effect_test_model() -> Model {
    parse_model("effects.sra", EFFECT_TEST_MODEL)
        .expect("built-in effect model parses")
        .model
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EffectMismatch {
    pub effect: String,
    pub sample_seed: u64,
    pub instance: String,
    pub field: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EffectReport {
    pub effects: usize,
    pub samples: usize,
    /// Samples where the concrete run failed (for example a null access).
    pub skipped: usize,
    pub mismatches: Vec<EffectMismatch>,
}

impl EffectReport {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} effects, {} samples, {} skipped, {} mismatches\n",
            self.effects,
            self.samples,
            self.skipped,
            self.mismatches.len()
        );
        for m in self.mismatches.iter().take(20) {
            out.push_str(&format!(
                "  {} [{}] {}.{}: {}\n",
                m.effect, m.sample_seed, m.instance, m.field, m.detail
            ));
        }
        out
    }
}

/// Random well-typed effects over [`EFFECT_TEST_MODEL`].
pub struct EffectGen<'r> {
    rng: &'r mut SimRng,
    /// Loop variables in scope, with their classes.
    scope: Vec<(String, String)>,
}

const P: &str = "P";
const Q: &str = "Q";

impl<'r> EffectGen<'r> {
    pub fn new(rng: &'r mut SimRng) -> Self {
        EffectGen {
            rng,
            scope: Vec::new(),
        }
    }

    pub fn int(&mut self, depth: usize) -> Expr {
        let leaf = depth == 0 || self.rng.gen_bool(0.3);
        if leaf {
            let vars: Vec<(String, String)> = self.scope.clone();
            return match self.rng.gen_range(0..6) {
                0 => Expr::Int(self.rng.gen_range(-2..=3)),
                1 => Expr::self_field(P, "x"),
                2 => Expr::self_field(P, "y"),
                3 => Expr::Unary(UnOp::TimerRemaining, Box::new(Expr::self_field(P, "t"))),
                _ => match vars.choose(self.rng) {
                    Some((v, c)) if c == Q => Expr::field(Expr::var(v, Q), Q, "v"),
                    Some((v, _)) => Expr::field(Expr::var(v, P), P, "x"),
                    None => Expr::Unary(UnOp::Card, Box::new(Expr::self_field(P, "peers"))),
                },
            };
        }
        match self.rng.gen_range(0..4) {
            0 => Expr::bin(BinOp::Add, self.int(depth - 1), self.int(depth - 1)),
            1 => Expr::bin(BinOp::Sub, self.int(depth - 1), self.int(depth - 1)),
            2 => Expr::bin(
                BinOp::Mul,
                self.int(depth - 1),
                Expr::Int(self.rng.gen_range(-1..=2)),
            ),
            _ => Expr::ite(
                self.boolean(depth - 1),
                self.int(depth - 1),
                self.int(depth - 1),
            ),
        }
    }

    pub fn boolean(&mut self, depth: usize) -> Expr {
        let leaf = depth == 0 || self.rng.gen_bool(0.3);
        if leaf {
            return match self.rng.gen_range(0..7) {
                0 => Expr::self_field(P, "b"),
                1 => Expr::self_field(P, "c"),
                2 => Expr::eq(
                    Expr::self_field(P, "mode"),
                    Expr::enum_lit("Mode", ["A", "B", "C"].choose(self.rng).unwrap()),
                ),
                3 => Expr::Unary(UnOp::TimerActive, Box::new(Expr::self_field(P, "t"))),
                4 => {
                    let body = Expr::field(Expr::var("q", Q), Q, "w");
                    Expr::exists("q", Q, Expr::self_field(P, "peers"), body)
                }
                5 => {
                    let body = Expr::field(Expr::var("o", P), P, "b");
                    Expr::forall("o", P, Expr::self_field(P, "others"), body)
                }
                _ => Expr::Bool(self.rng.gen()),
            };
        }
        match self.rng.gen_range(0..5) {
            0 => Expr::not(self.boolean(depth - 1)),
            1 => Expr::and(self.boolean(depth - 1), self.boolean(depth - 1)),
            2 => Expr::or(self.boolean(depth - 1), self.boolean(depth - 1)),
            3 => Expr::bin(BinOp::Lt, self.int(depth - 1), self.int(depth - 1)),
            _ => Expr::eq(self.int(depth - 1), self.int(depth - 1)),
        }
    }

    fn assign(&mut self) -> Stmt {
        let (field, value) = match self.rng.gen_range(0..6) {
            0 => ("x", self.int(2)),
            1 => ("y", self.int(2)),
            2 => ("b", self.boolean(2)),
            3 => ("c", self.boolean(2)),
            4 => (
                "mode",
                Expr::enum_lit("Mode", ["A", "B", "C"].choose(self.rng).unwrap()),
            ),
            _ => {
                let v = if self.rng.gen_bool(0.3) {
                    Expr::Inactive
                } else {
                    Expr::TimerFrom(Box::new(self.int(1)))
                };
                ("t", v)
            }
        };
        Stmt::Assign {
            field: field.into(),
            value,
        }
    }

    /// A random statement of nesting depth at most `depth`.
    pub fn stmt(&mut self, depth: usize) -> Stmt {
        let choice = if depth <= 1 {
            self.rng.gen_range(0..4)
        } else {
            self.rng.gen_range(0..8)
        };
        match choice {
            0 | 1 => self.assign(),
            2 => Stmt::Havoc {
                field: ["x", "b", "mode", "t"]
                    .choose(self.rng)
                    .unwrap()
                    .to_string(),
            },
            3 => {
                // Quantified write over a foreign or an own-class set.
                if self.rng.gen_bool(0.5) {
                    self.scope.push(("q".into(), Q.into()));
                    let (field, value) = if self.rng.gen_bool(0.5) {
                        ("v", self.int(2))
                    } else {
                        ("w", self.boolean(2))
                    };
                    self.scope.pop();
                    Stmt::ForallAssign {
                        var: "q".into(),
                        class: Q.into(),
                        set: Expr::self_field(P, "peers"),
                        field: field.into(),
                        value,
                    }
                } else {
                    self.scope.push(("o".into(), P.into()));
                    let (field, value) = if self.rng.gen_bool(0.5) {
                        ("x", self.int(2))
                    } else {
                        ("b", self.boolean(2))
                    };
                    self.scope.pop();
                    Stmt::ForallAssign {
                        var: "o".into(),
                        class: P.into(),
                        set: Expr::self_field(P, "others"),
                        field: field.into(),
                        value,
                    }
                }
            }
            4 | 5 => {
                let cond = self.boolean(2);
                let a = self.stmt(depth - 1);
                let b = if self.rng.gen_bool(0.7) {
                    self.stmt(depth - 1)
                } else {
                    Stmt::Seq(vec![])
                };
                Stmt::If {
                    cond,
                    then_branch: Box::new(a),
                    else_branch: Box::new(b),
                }
            }
            6 => {
                let target = Expr::self_field(P, "buddy");
                let (field, value) = if self.rng.gen_bool(0.5) {
                    ("v", self.int(2))
                } else {
                    ("w", self.boolean(2))
                };
                let write = Stmt::ObjAssign {
                    target: target.clone(),
                    class: Q.into(),
                    field: field.into(),
                    value,
                };
                let guard = Expr::ne(target, Expr::Null(Q.into()));
                Stmt::If {
                    cond: guard,
                    then_branch: Box::new(write),
                    else_branch: Box::new(Stmt::Seq(vec![])),
                }
            }
            _ => {
                let n = self.rng.gen_range(2..=3);
                Stmt::Seq((0..n).map(|_| self.stmt(depth - 1)).collect())
            }
        }
    }
}

fn point_check(map: &SymbolicMap, class: &str, field: &str, entry: &Expr, x: &Expr) -> Expr {
    let at = entry.subst_var(&map.point, x);
    equal_partial(Expr::field(x.clone(), class, field), &at)
}

/// Compares the symbolic map of `t.effect` with concrete runs on `samples`
/// random pre-states of random configurations.
#[allow(clippy::too_many_arguments)]
fn check_effect(
    model: &Model,
    class: &str,
    t: &Transition,
    label: &str,
    cfgs: &[Configuration],
    samples: usize,
    seed: u64,
    report: &mut EffectReport,
) -> Result<(), OracleError> {
    let map = transform_effect(model, class, &t.effect)?;
    report.effects += 1;
    for i in 0..samples {
        let s = seed
            .wrapping_mul(0x2545_F491_4F6C_DD1D)
            .wrapping_add(i as u64);
        let mut rng = SimRng::seed_from_u64(s);
        let cfg = &cfgs[rng.gen_range(0..cfgs.len())];
        let Some(&o) = cfg.universe(class).choose(&mut rng) else {
            continue;
        };
        let pre = random_state(model, cfg, &t.phase, &mut rng);
        report.samples += 1;
        let Ok(post) = run_effect(model, cfg, &pre, o, t, &mut rng) else {
            report.skipped += 1;
            continue;
        };
        let mut mismatch = |inst: ObjId, field: &str, detail: String| {
            report.mismatches.push(EffectMismatch {
                effect: label.to_string(),
                sample_seed: s,
                instance: cfg.name(inst).to_string(),
                field: field.to_string(),
                detail,
            });
        };
        let check = |e: &Expr, bind: &[(&str, Value)]| -> Result<bool, String> {
            let mut env = Env::new(model, cfg, &post)
                .with_pre(&pre)
                .bind(SELF, Value::Obj(o));
            for (n, v) in bind {
                env.vars.push((n.to_string(), v.clone()));
            }
            env.eval_bool(e).map_err(|err| err.to_string())
        };
        for z in cfg.ids() {
            let zc = cfg.class_of(z).to_string();
            for f in model.class_decl(&zc).fields.iter().map(|f| f.name.clone()) {
                let key = (zc.clone(), f.clone());
                let verdict = if let Some(entry) = map.functions.get(&key) {
                    let xv = Expr::var("obj!", &zc);
                    check(
                        &point_check(&map, &zc, &f, entry, &xv),
                        &[("obj!", Value::Obj(z))],
                    )
                } else if z == o && map.scalars.contains_key(&f) {
                    check(
                        &equal_partial(Expr::self_field(class, &f), &map.scalars[&f]),
                        &[],
                    )
                } else if pre.read(z, &f) == post.read(z, &f) {
                    Ok(true)
                } else {
                    Err("changed outside the map's domain".into())
                };
                match verdict {
                    Ok(true) => {}
                    Ok(false) => mismatch(
                        z,
                        &f,
                        format!("post value {:?} disagrees with the map", post.read(z, &f)),
                    ),
                    Err(e) => mismatch(z, &f, e),
                }
            }
        }
    }
    Ok(())
}

fn configs(model: &Model, n: usize, seed: u64) -> Result<Vec<Configuration>, OracleError> {
    let mut rng = SimRng::seed_from_u64(seed);
    (0..n)
        .map(|_| random_config(model, &ConfigGen::default(), &mut rng))
        .collect()
}

/// Checks every effect of the given models plus `random_effects` generated
/// effects of nesting depth at most `depth`, each on `samples` pre-states.
pub fn effect_oracle(
    models: &[&Model],
    random_effects: usize,
    depth: usize,
    samples: usize,
    seed: u64,
) -> Result<EffectReport, OracleError> {
    let mut report = EffectReport::default();
    for (mi, m) in models.iter().enumerate() {
        let cfgs = configs(m, 6, seed.wrapping_add(mi as u64))?;
        for c in &m.classes {
            for t in &c.transitions {
                let label = format!("{}.{}", c.name, t.name);
                check_effect(
                    m,
                    &c.name,
                    t,
                    &label,
                    &cfgs,
                    samples,
                    seed ^ (report.effects as u64 + 1),
                    &mut report,
                )?;
            }
        }
    }
    let em = effect_test_model();
    let cfgs = configs(&em, 6, seed)?;
    let mut rng = SimRng::seed_from_u64(seed);
    for k in 0..random_effects {
        let effect = EffectGen::new(&mut rng).stmt(depth.max(1));
        let t = Transition {
            name: format!("random{k}"),
            from: "L0".into(),
            guard: Expr::tt(),
            to: "L0".into(),
            effect,
            phase: "Run".into(),
            index: 0,
        };
        check_effect(
            &em,
            P,
            &t,
            &t.name,
            &cfgs,
            samples,
            seed.wrapping_add(1000 + k as u64),
            &mut report,
        )?;
    }
    Ok(report)
}
