use std::fmt::Write as _;

use serde::Serialize;

use super::{VcResult, VcVerdict};

/// Overall outcome of a verification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Every obligation valid.
    Proven,
    /// Some obligation invalid: either the property fails or the supplied
    /// invariant (or local conditions) are too weak to show it.
    RefutedObligation,
    /// No obligation invalid but some unknown or timed out.
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Proven => 0,
            Verdict::RefutedObligation => 1,
            Verdict::Inconclusive => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Proven => "Proven",
            Verdict::RefutedObligation => "Refuted-obligation",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub verdict: Verdict,
    pub results: Vec<VcResult>,
}

pub fn report(results: Vec<VcResult>) -> Report {
    let verdict = if results.iter().all(|r| r.verdict == VcVerdict::Valid) {
        Verdict::Proven
    } else if results
        .iter()
        .any(|r| matches!(r.verdict, VcVerdict::Invalid { .. }))
    {
        Verdict::RefutedObligation
    } else {
        Verdict::Inconclusive
    };
    Report { verdict, results }
}

impl Report {
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        let mut c = (0, 0, 0, 0);
        for r in &self.results {
            match r.verdict {
                VcVerdict::Valid => c.0 += 1,
                VcVerdict::Invalid { .. } => c.1 += 1,
                VcVerdict::Unknown { .. } => c.2 += 1,
                VcVerdict::Timeout => c.3 += 1,
            }
        }
        c
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let steps = r.steps.map(|s| format!(", {s} steps")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{:<8} {} ({} ms{steps})",
                r.verdict.label(),
                r.id,
                r.wall_ms
            );
            match &r.verdict {
                VcVerdict::Invalid { model: Some(m) } => out.push_str(&m.render()),
                VcVerdict::Unknown { reason } => {
                    let _ = writeln!(out, "  {reason}");
                }
                _ => {}
            }
        }
        let (v, i, u, t) = self.counts();
        let _ = writeln!(
            out,
            "{} tasks: {v} valid, {i} invalid, {u} unknown, {t} timeout",
            self.results.len()
        );
        let _ = write!(out, "verdict: {}", self.verdict.label());
        if self.verdict == Verdict::RefutedObligation {
            out.push_str(
                " (the property may fail, or the invariant or local conditions may be too weak)",
            );
        }
        out.push('\n');
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
