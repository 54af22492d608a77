//! Pipeline event log: every quantifier move, split, elimination, pull-back,
//! and merge, with optional before/after snapshots so each step can be
//! validated against the oracle in isolation.

use std::io::Write;

use serde::Serialize;

use crate::dqbf::Dqbf;
use crate::rewrite::Receipt;
use crate::vars::VarId;

#[derive(Debug, Clone, Serialize)]
pub enum Event {
    /// A localization push (a fired rewrite moving or dropping a quantifier).
    Push(Receipt),
    /// A gate decomposition grouping children under a fresh gate.
    Decompose { gate: u32, new_gate: u32, moved: usize },
    /// Incoming-edge separation: `clone` took the edges without `var`.
    Split { gate: u32, clone: u32, var: VarId },
    /// A variable that could not be moved over or eliminated at a gate.
    Stuck { edge: u32, var: VarId, reason: String },
    /// An elimination-phase rewrite (drop or cofactor elimination).
    Eliminate(Receipt),
    /// A quantifier moved from an edge to the incoming edges of its source.
    PullBack { edge: u32, var: VarId, to: Vec<u32> },
    /// A copy re-pointed onto its base variable.
    Merge { edge: u32, kept: VarId, dropped: VarId },
    /// A merge that failed its legality check and kept the copies apart.
    MergeRefused { edge: u32, kept: VarId, dropped: VarId, reason: String },
    /// Constant folding or contraction of a gate during elimination.
    Simplify { gate: u32 },
}

impl Event {
    /// One-line rendering for `--trace-localize`.
    pub fn trace_line(&self) -> String {
        match self {
            Event::Push(r) => format!(
                "push {:?} var {} at edge {} (fresh: {:?})",
                r.rule, r.var, r.edge, r.fresh_vars
            ),
            Event::Decompose { gate, new_gate, moved } => {
                format!("decompose gate {} -> new gate {} ({} children)", gate, new_gate, moved)
            }
            Event::Split { gate, clone, var } => {
                format!("split gate {} on {} -> clone {}", gate, var, clone)
            }
            Event::Stuck { edge, var, reason } => {
                format!("stuck {} at edge {}: {}", var, edge, reason)
            }
            Event::Eliminate(r) => {
                format!("eliminate {:?} var {} at edge {}", r.rule, r.var, r.edge)
            }
            Event::PullBack { edge, var, to } => {
                format!("pull back {} from edge {} to {:?}", var, edge, to)
            }
            Event::Merge { edge, kept, dropped } => {
                format!("merge {} into {} at edge {}", dropped, kept, edge)
            }
            Event::MergeRefused { edge, kept, dropped, reason } => {
                format!("keep {} apart from {} at edge {}: {}", dropped, kept, edge, reason)
            }
            Event::Simplify { gate } => format!("simplify gate {}", gate),
        }
    }

    pub fn receipt(&self) -> Option<&Receipt> {
        match self {
            Event::Push(r) | Event::Eliminate(r) => Some(r),
            _ => None,
        }
    }
}

/// A recorded graph transformation with its surrounding states.
#[derive(Debug, Clone)]
pub struct Step {
    pub event_index: usize,
    pub before: Dqbf,
    pub after: Dqbf,
}

/// Collects events; with capture enabled it also snapshots the instance
/// around every mutating step.
#[derive(Debug, Default)]
pub struct EventLog {
    pub events: Vec<Event>,
    pub capture: bool,
    pub steps: Vec<Step>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn capturing() -> Self {
        EventLog {
            capture: true,
            ..Self::default()
        }
    }

    /// Snapshot hook before a mutating step; pair with [`EventLog::commit`].
    pub fn begin(&mut self, d: &Dqbf) -> Option<Dqbf> {
        self.capture.then(|| d.clone())
    }

    pub fn commit(&mut self, before: Option<Dqbf>, after: &Dqbf, ev: Event) {
        if let Some(b) = before {
            self.steps.push(Step {
                event_index: self.events.len(),
                before: b,
                after: after.clone(),
            });
        }
        self.events.push(ev);
    }

    /// Records a non-mutating observation.
    pub fn note(&mut self, ev: Event) {
        self.events.push(ev);
    }

    /// Serializes the event list as JSON lines.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for ev in &self.events {
            serde_json::to_writer(&mut w, ev)?;
            writeln!(w)?;
        }
        Ok(())
    }
}
