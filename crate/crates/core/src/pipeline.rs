//! End-to-end preprocessing pipeline: NNF, macrogates, localization, local
//! elimination, and the summary statistics of a run.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::dqbf::PrenexDqbf;
use crate::eliminate::{eliminate, ElimConfig};
use crate::event::{Event, EventLog};
use crate::localize::{build_macrogates, localize, normalize_to_nnf, LocalizeConfig};
use crate::rewrite::RuleId;
use crate::vars::VarId;

#[derive(Debug, Clone, Copy, Default)]
pub struct PipelineConfig {
    pub localize: LocalizeConfig,
    pub elim: ElimConfig,
    /// Snapshot the instance around every mutating step (for validation).
    pub capture_steps: bool,
}

/// The eliminator's summary record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Stats {
    /// Fired localization moves (scope moves and distributions).
    pub pushed: usize,
    /// Fired cofactor eliminations.
    pub local_eliminations: usize,
    /// Input prefix variables that are gone from the output entirely; a
    /// duplicated variable with surviving copies does not count.
    pub variables_eliminated: usize,
    /// Live nodes entering the elimination pass.
    pub nodes_before: usize,
    /// Live nodes of the output matrix.
    pub nodes_after: usize,
}

#[derive(Debug)]
pub struct PipelineResult {
    pub output: PrenexDqbf,
    pub stats: Stats,
    pub log: EventLog,
    /// `Some(value)` when the output matrix collapsed to a constant.
    pub decided: Option<bool>,
}

fn is_push_rule(rule: RuleId) -> bool {
    matches!(
        rule,
        RuleId::ForallAndDistribute
            | RuleId::ForallAndScope
            | RuleId::ForallOpScope
            | RuleId::ExistsOrDistribute
            | RuleId::ExistsOpScope
    )
}

/// Runs the whole preprocessing chain on a closed prenex instance.
pub fn run(input: &PrenexDqbf, cfg: &PipelineConfig) -> PipelineResult {
    let mut log = if cfg.capture_steps {
        EventLog::capturing()
    } else {
        EventLog::new()
    };
    let mut d = normalize_to_nnf(input);
    build_macrogates(&mut d);
    localize(&mut d, &cfg.localize, &mut log);
    let nodes_before = d.graph.live_node_count();
    let output = eliminate(&mut d, &cfg.elim, &mut log);
    let nodes_after = output.matrix.live_node_count();

    let pushed = log
        .events
        .iter()
        .filter(|e| matches!(e, Event::Push(r) if is_push_rule(r.rule)))
        .count();
    let local_eliminations = log
        .events
        .iter()
        .filter(|e| {
            matches!(e, Event::Eliminate(r)
                if matches!(r.rule, RuleId::ForallCofactor | RuleId::ExistsCofactor))
        })
        .count();

    let variables_eliminated = count_eliminated(input, &output);
    let decided = output.constant_matrix();

    PipelineResult {
        output,
        stats: Stats {
            pushed,
            local_eliminations,
            variables_eliminated,
            nodes_before,
            nodes_after,
        },
        log,
        decided,
    }
}

/// Input prefix variables with no trace (no copy either) in the output.
fn count_eliminated(input: &PrenexDqbf, output: &PrenexDqbf) -> usize {
    let out = output.to_dqbf();
    let survivors: BTreeSet<VarId> = out
        .variable_universe()
        .into_iter()
        .map(|v| out.vars.root_base(v))
        .collect();
    input
        .prefix
        .iter()
        .filter(|&&v| !survivors.contains(&input.vars.root_base(v)))
        .count()
}
