//! Bounded exploration of every interleaving and input choice.

use std::collections::{HashMap, HashSet};

use rand::SeedableRng;
use serde::Serialize;
use serde_json::Value as Json;

use super::OracleError;
use crate::model::*;
use crate::sim::{
    apply_phase_change, enabled_sched, exec_local, init_state, Env, InputProvider, SimError, SimRng,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReachOptions {
    /// Number of complete cycles explored; 0 checks the initial states only.
    pub cycles: usize,
    /// Largest configuration explored.
    pub instance_cap: usize,
    /// Largest number of input combinations per reset.
    pub input_cap: usize,
    /// Seed for havoc choices.
    pub seed: u64,
    /// Stop after this many distinct states.
    pub max_states: usize,
}

impl Default for ReachOptions {
    fn default() -> Self {
        ReachOptions {
            cycles: 3,
            instance_cap: 8,
            input_cap: 4096,
            seed: 0,
            max_states: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Invariant,
    Property,
    Deadlock,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub label: String,
    pub state: Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachViolation {
    pub kind: ViolationKind,
    pub detail: String,
    /// From an initial state to the violating state.
    pub trace: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachReport {
    /// Distinct states at scheduler step boundaries.
    pub states: usize,
    /// States inside sweeps, after individual local steps.
    pub intermediate: usize,
    pub truncated: bool,
    pub violation: Option<ReachViolation>,
}

type Node = (GlobalState, usize);

/// One value per input field of every instance.
type InputCombo = Vec<(ObjId, String, Value)>;

/// Every assignment of values to the inputs of every instance.
fn input_combinations(
    model: &Model,
    cfg: &Configuration,
    cap: usize,
) -> Result<Vec<InputCombo>, OracleError> {
    let mut combos: Vec<InputCombo> = vec![vec![]];
    for o in cfg.ids() {
        for f in model
            .class_decl(cfg.class_of(o))
            .fields
            .iter()
            .filter(|f| f.input)
        {
            let domain: Vec<Value> = match &f.ty {
                ScalarType::Bool | ScalarType::Event => vec![Value::Bool(false), Value::Bool(true)],
                ScalarType::Int => (0..=2).map(Value::Int).collect(),
                ScalarType::Enum(e) => model.enum_values(e).into_iter().map(Value::Enum).collect(),
                ScalarType::Timer => vec![
                    Value::Timer(TimerValue::Inactive),
                    Value::Timer(TimerValue::Active(1)),
                ],
            };
            let mut next = Vec::with_capacity(combos.len() * domain.len());
            for c in &combos {
                for v in &domain {
                    let mut c2 = c.clone();
                    c2.push((o, f.name.clone(), v.clone()));
                    next.push(c2);
                }
            }
            combos = next;
            if combos.len() > cap {
                return Err(OracleError::TooManyInputs {
                    combinations: combos.len(),
                    cap,
                });
            }
        }
    }
    Ok(combos)
}

fn apply_inputs(s: &GlobalState, combo: &[(ObjId, String, Value)]) -> GlobalState {
    let mut n = s.clone();
    for (o, f, v) in combo {
        n.set(*o, f, v.clone());
    }
    n
}

struct Explorer<'a> {
    model: &'a Model,
    cfg: &'a Configuration,
    inv: &'a Expr,
    prop: &'a Expr,
    rng: SimRng,
    parent: HashMap<Node, (Option<Node>, String)>,
    intermediate: usize,
}

impl Explorer<'_> {
    fn holds(&self, s: &GlobalState, e: &Expr) -> Result<bool, SimError> {
        Env::new(self.model, self.cfg, s).eval_bool(e)
    }

    fn trace_to(&self, node: &Node) -> Vec<TraceStep> {
        let mut steps = Vec::new();
        let mut cur = Some(node.clone());
        while let Some(n) = cur {
            let (prev, label) = self
                .parent
                .get(&n)
                .cloned()
                .unwrap_or((None, "init".into()));
            steps.push(TraceStep {
                label,
                state: n.0.to_json(self.cfg),
            });
            cur = prev;
        }
        steps.reverse();
        steps
    }

    fn violation(
        &self,
        node: &Node,
        kind: ViolationKind,
        detail: String,
        extra: Option<TraceStep>,
    ) -> ReachViolation {
        let mut trace = self.trace_to(node);
        trace.extend(extra);
        ReachViolation {
            kind,
            detail,
            trace,
        }
    }

    /// Checks a boundary state; the invariant everywhere, the property at the final phase.
    fn check(&self, node: &Node) -> Option<ReachViolation> {
        let s = &node.0;
        match self.holds(s, self.inv) {
            Ok(true) => {}
            Ok(false) => {
                return Some(self.violation(
                    node,
                    ViolationKind::Invariant,
                    "invariant violated".into(),
                    None,
                ))
            }
            Err(e) => return Some(self.violation(node, ViolationKind::Error, e.to_string(), None)),
        }
        if s.phase == self.model.scheduler.final_phase {
            match self.holds(s, self.prop) {
                Ok(true) => {}
                Ok(false) => {
                    return Some(self.violation(
                        node,
                        ViolationKind::Property,
                        "property violated".into(),
                        None,
                    ))
                }
                Err(e) => {
                    return Some(self.violation(node, ViolationKind::Error, e.to_string(), None))
                }
            }
        }
        None
    }

    /// All end states of one sweep from `start`, over every instance order,
    /// each with one order producing it. Intermediate states are checked
    /// against the invariant.
    fn sweep_all(
        &mut self,
        start: &Node,
    ) -> Result<Vec<(GlobalState, Vec<ObjId>)>, ReachViolation> {
        let n = self.cfg.total();
        let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut seen: HashSet<(GlobalState, u64)> = HashSet::new();
        let mut ends: HashMap<GlobalState, Vec<ObjId>> = HashMap::new();
        let mut stack: Vec<(GlobalState, u64, Vec<ObjId>)> = vec![(start.0.clone(), 0, vec![])];
        let phase = start.0.phase.clone();
        while let Some((s, mask, order)) = stack.pop() {
            if mask == full {
                ends.entry(s).or_insert(order);
                continue;
            }
            for o in self.cfg.ids() {
                if mask & (1 << o.0) != 0 {
                    continue;
                }
                let mut order2 = order.clone();
                order2.push(o);
                let label = || {
                    format!(
                        "partial sweep {}",
                        order2
                            .iter()
                            .map(|x| self.cfg.name(*x))
                            .collect::<Vec<_>>()
                            .join(",")
                    )
                };
                let next = match exec_local(self.model, self.cfg, &s, o, &phase, &mut self.rng) {
                    Ok((mut next, _)) => {
                        next.executed[o.0] = true;
                        next
                    }
                    Err(e) => {
                        let step = TraceStep {
                            label: label(),
                            state: s.to_json(self.cfg),
                        };
                        return Err(self.violation(
                            start,
                            ViolationKind::Error,
                            e.to_string(),
                            Some(step),
                        ));
                    }
                };
                let m2 = mask | (1 << o.0);
                if !seen.insert((next.clone(), m2)) {
                    continue;
                }
                self.intermediate += 1;
                if m2 != full && !matches!(self.holds(&next, self.inv), Ok(true)) {
                    let step = TraceStep {
                        label: label(),
                        state: next.to_json(self.cfg),
                    };
                    return Err(self.violation(
                        start,
                        ViolationKind::Invariant,
                        "invariant violated inside a sweep".into(),
                        Some(step),
                    ));
                }
                stack.push((next, m2, order2));
            }
        }
        Ok(ends.into_iter().collect())
    }
}

/// Explores every run of `cfg` up to `opts.cycles` cycles: all instance
/// orders in every sweep and all input values at every reset. The invariant
/// is checked at every state, the property at every final-phase state.
pub fn bounded_reachability_check(
    model: &Model,
    cfg: &Configuration,
    inv: &Expr,
    prop: &Expr,
    opts: ReachOptions,
) -> Result<ReachReport, OracleError> {
    if cfg.total() > opts.instance_cap || cfg.total() > 63 {
        return Err(OracleError::TooManyInstances {
            instances: cfg.total(),
            cap: opts.instance_cap,
        });
    }
    let combos = input_combinations(model, cfg, opts.input_cap)?;
    let base = init_state(model, cfg, &mut InputProvider::defaults())?;
    let mut ex = Explorer {
        model,
        cfg,
        inv,
        prop,
        rng: SimRng::seed_from_u64(opts.seed),
        parent: HashMap::new(),
        intermediate: 0,
    };
    let mut visited: HashSet<Node> = HashSet::new();
    let mut stack: Vec<Node> = Vec::new();
    for c in &combos {
        let node = (apply_inputs(&base, c), 0);
        if visited.insert(node.clone()) {
            stack.push(node);
        }
    }
    let sched = &model.scheduler;
    let mut truncated = false;
    while let Some(node) = stack.pop() {
        if let Some(v) = ex.check(&node) {
            return Ok(ReachReport {
                states: visited.len(),
                intermediate: ex.intermediate,
                truncated,
                violation: Some(v),
            });
        }
        if opts.cycles == 0 {
            continue;
        }
        if visited.len() >= opts.max_states {
            truncated = true;
            break;
        }
        let (s, cycle) = &node;
        let mut succ: Vec<(Node, String)> = Vec::new();
        if s.phase == sched.final_phase {
            if cycle + 1 >= opts.cycles {
                continue;
            }
            for c in &combos {
                let mut n = apply_inputs(s, c);
                n.phase = sched.initial.clone();
                succ.push(((n, cycle + 1), "reset".into()));
            }
        } else {
            let t = match enabled_sched(model, cfg, s) {
                Ok(Some(t)) => t,
                Ok(None) => {
                    let v = ex.violation(
                        &node,
                        ViolationKind::Deadlock,
                        format!("no scheduler guard true in `{}`", s.phase),
                        None,
                    );
                    return Ok(ReachReport {
                        states: visited.len(),
                        intermediate: ex.intermediate,
                        truncated,
                        violation: Some(v),
                    });
                }
                Err(e) => {
                    let v = ex.violation(&node, ViolationKind::Error, e.to_string(), None);
                    return Ok(ReachReport {
                        states: visited.len(),
                        intermediate: ex.intermediate,
                        truncated,
                        violation: Some(v),
                    });
                }
            };
            if t.is_self_loop() {
                match ex.sweep_all(&node) {
                    Ok(ends) => {
                        for (n, order) in ends {
                            let names: Vec<&str> = order.iter().map(|o| cfg.name(*o)).collect();
                            succ.push((
                                (n, *cycle),
                                format!("sweep {} [{}]", s.phase, names.join(",")),
                            ));
                        }
                    }
                    Err(v) => {
                        return Ok(ReachReport {
                            states: visited.len(),
                            intermediate: ex.intermediate,
                            truncated,
                            violation: Some(v),
                        })
                    }
                }
            } else {
                let mut n = s.clone();
                apply_phase_change(model, cfg, &mut n, &t.to);
                succ.push(((n, *cycle), format!("phase {} -> {}", t.from, t.to)));
            }
        }
        for (n, label) in succ {
            if visited.insert(n.clone()) {
                ex.parent.insert(n.clone(), (Some(node.clone()), label));
                stack.push(n);
            }
        }
    }
    Ok(ReachReport {
        states: visited.len(),
        intermediate: ex.intermediate,
        truncated,
        violation: None,
    })
}
