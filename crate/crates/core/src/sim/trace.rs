use serde_json::{json, Value as Json};

use crate::model::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepLabel {
    Init,
    /// A sweep: instance order and, per instance, the fired transition (`None` = stutter).
    SelfLoop {
        phase: String,
        order: Vec<String>,
        fired: Vec<(String, Option<String>)>,
    },
    PhaseChange {
        from: String,
        to: String,
    },
    Reset,
}

impl StepLabel {
    pub fn to_json(&self) -> Json {
        match self {
            StepLabel::Init => json!({"kind": "init"}),
            StepLabel::SelfLoop {
                phase,
                order,
                fired,
            } => {
                let fired: serde_json::Map<String, Json> = fired
                    .iter()
                    .map(|(i, t)| (i.clone(), t.clone().map(Json::String).unwrap_or(Json::Null)))
                    .collect();
                json!({"kind": "self-loop", "phase": phase, "order": order, "fired": fired})
            }
            StepLabel::PhaseChange { from, to } => {
                json!({"kind": "phase-change", "from": from, "to": to})
            }
            StepLabel::Reset => json!({"kind": "reset"}),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub label: StepLabel,
    pub state: GlobalState,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn push(&mut self, label: StepLabel, state: GlobalState) {
        self.entries.push(TraceEntry { label, state });
    }

    /// One JSON object per line: `{label, phase, state, step}`.
    pub fn to_jsonl(&self, cfg: &Configuration) -> String {
        let mut out = String::new();
        for (i, e) in self.entries.iter().enumerate() {
            let line = json!({
                "step": i,
                "label": e.label.to_json(),
                "phase": e.state.phase,
                "state": e.state.to_json(cfg),
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}
