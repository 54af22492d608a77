//! Bottom-up local quantifier elimination.
//!
//! Working from the terminals to the root, every annotated edge is visited:
//! vacuous quantifiers are dropped, existentials are replaced by the
//! disjunction of their cofactors where the support condition allows it,
//! universals by the conjunction of theirs once the subformula is
//! quantifier-free, and whatever remains is pulled back to the incoming
//! edges of the edge's source. Copies of one variable that meet again on an
//! edge are merged back into their base variable when that is legal. The
//! leftovers on the root edge become the output prefix.

use std::collections::BTreeSet;

use crate::dqbf::{Dqbf, PrenexDqbf};
use crate::event::{Event, EventLog};
use crate::graph::{linearize_prefix, Annotation, EdgeId, NodeId, NodeKind};
use crate::rewrite::{apply_rule, uocc_of, uocc_outside, RuleId};
use crate::vars::{VarId, VarKind};

#[derive(Debug, Clone, Copy)]
pub struct ElimConfig {
    /// Elimination may not grow the live graph beyond this factor of its
    /// size at the start of the pass; a breach rolls the step back.
    pub growth_limit: f64,
}

impl Default for ElimConfig {
    fn default() -> Self {
        ElimConfig { growth_limit: 2.0 }
    }
}

/// Eliminates locally, pulls the rest to the root, and returns the closed
/// prenex result.
pub fn eliminate(d: &mut Dqbf, cfg: &ElimConfig, log: &mut EventLog) -> PrenexDqbf {
    let start_nodes = d.graph.live_node_count().max(1);
    let cap = (cfg.growth_limit * start_nodes as f64).ceil() as usize;

    let order: Vec<NodeId> = d.graph.topo_inner().into_iter().rev().collect();
    for n in order {
        if !d.graph.is_reachable(n) {
            continue;
        }
        let kids: Vec<EdgeId> = d.graph.children(n).to_vec();
        for e in kids {
            if !d.graph.children(n).contains(&e) {
                continue; // removed by an earlier simplification
            }
            process_edge(d, e, cap, log);
        }
        simplify_gate(d, n, log);
    }
    let root = d.graph.root;
    process_root_edge(d, cap, log);

    let prefix = linearize_prefix(&d.graph.edge(root).ann, &d.vars);
    let b = d.graph.branch_of(root);
    let mut matrix = d.graph.clone();
    matrix.set_root(b, Annotation::new());
    let out = PrenexDqbf {
        vars: d.vars.clone(),
        prefix,
        matrix,
    };
    #[cfg(debug_assertions)]
    {
        if let Err(v) = crate::wellformed::well_formed(&out.to_dqbf()) {
            panic!("eliminate produced an ill-formed result: {:?}", v);
        }
    }
    out
}

fn process_edge(d: &mut Dqbf, e: EdgeId, cap: usize, log: &mut EventLog) {
    merge_duplicates(d, e, log);
    eliminate_at_edge(d, e, cap, log);
    if !d.graph.edge(e).ann.is_empty() {
        pull_back(d, e, log);
    }
}

fn process_root_edge(d: &mut Dqbf, cap: usize, log: &mut EventLog) {
    let root = d.graph.root;
    merge_duplicates(d, root, log);
    eliminate_at_edge(d, root, cap, log);
    // leftovers on the root edge become the output prefix
}

/// Tries drops and cofactor eliminations on every variable of the edge until
/// nothing fires anymore. Existentials go first: they are innermost in any
/// legal linear order of the annotation.
fn eliminate_at_edge(d: &mut Dqbf, e: EdgeId, cap: usize, log: &mut EventLog) {
    loop {
        let mut progress = false;
        let exs: Vec<VarId> = d.graph.edge(e).ann.exists.iter().copied().collect();
        for y in exs {
            progress |= eliminate_var(d, e, y, RuleId::DropExists, RuleId::ExistsCofactor, cap, log);
        }
        let foralls: Vec<VarId> = d.graph.edge(e).ann.foralls.iter().copied().collect();
        for x in foralls {
            progress |= eliminate_var(d, e, x, RuleId::DropForall, RuleId::ForallCofactor, cap, log);
        }
        if !progress {
            break;
        }
    }
}

fn eliminate_var(
    d: &mut Dqbf,
    e: EdgeId,
    v: VarId,
    drop_rule: RuleId,
    cofactor_rule: RuleId,
    cap: usize,
    log: &mut EventLog,
) -> bool {
    if !d.graph.occurs_below(e, v) {
        let before = log.begin(d);
        return match apply_rule(d, e, drop_rule, v) {
            Ok(r) => {
                log.commit(before, d, Event::Eliminate(r));
                true
            }
            Err(refusal) => {
                log.note(Event::Stuck {
                    edge: e.0,
                    var: v,
                    reason: refusal.condition,
                });
                false
            }
        };
    }
    let saved_branch = d.graph.branch_of(e);
    let saved_ann = d.graph.edge(e).ann.clone();
    let before = log.begin(d);
    match apply_rule(d, e, cofactor_rule, v) {
        Ok(r) => {
            if d.graph.live_node_count() > cap {
                d.graph.retarget(e, saved_branch);
                d.graph.edge_mut(e).ann = saved_ann;
                log.note(Event::Stuck {
                    edge: e.0,
                    var: v,
                    reason: "growth limit reached; rolled back".into(),
                });
                false
            } else {
                log.commit(before, d, Event::Eliminate(r));
                true
            }
        }
        Err(refusal) => {
            log.note(Event::Stuck {
                edge: e.0,
                var: v,
                reason: refusal.condition,
            });
            false
        }
    }
}

/// Moves every leftover quantifier of `e` onto the incoming edges of its
/// source node. On the root edge this is a no-op: those quantifiers are the
/// output prefix.
pub fn pull_back(d: &mut Dqbf, e: EdgeId, log: &mut EventLog) {
    let Some(src) = d.graph.edge(e).source else {
        return;
    };
    let incoming: Vec<EdgeId> = d.graph.parents(src).to_vec();
    let ann = d.graph.edge(e).ann.clone();
    let before = log.begin(d);
    d.graph.edge_mut(e).ann = Annotation::new();
    for &p in &incoming {
        d.graph.edge_mut(p).ann.union_with(&ann);
    }
    let to: Vec<u32> = incoming.iter().map(|p| p.0).collect();
    let first = log.events.len();
    for v in ann.vars() {
        log.note(Event::PullBack {
            edge: e.0,
            var: v,
            to: to.clone(),
        });
    }
    if let Some(b) = before {
        log.steps.push(crate::event::Step {
            event_index: first,
            before: b,
            after: d.clone(),
        });
    }
    #[cfg(debug_assertions)]
    {
        if let Err(v) = crate::wellformed::well_formed(d) {
            panic!("pull back broke well-formedness: {:?}", v);
        }
    }
}

/// Merges same-origin copies that meet on one edge back into their base
/// variable, when re-pointing them is legal. Refused merges keep the copies
/// separate; they simply stay in the prefix.
pub fn merge_duplicates(d: &mut Dqbf, e: EdgeId, log: &mut EventLog) {
    let mut refused: BTreeSet<VarId> = BTreeSet::new();
    loop {
        let Some((base, members)) = find_merge_group(d, e, &refused) else {
            return;
        };
        match merge_group_legal(d, e, base, &members) {
            Ok(()) => {
                let before = log.begin(d);
                for &m in &members {
                    if m == base {
                        continue;
                    }
                    d.graph.rename_below(e, m, base, &mut d.vars);
                    let deps = d.vars.deps(m).clone();
                    d.vars.set_deps(base, deps);
                    let ann = &mut d.graph.edge_mut(e).ann;
                    ann.remove(m);
                    match d.vars.kind(base) {
                        VarKind::Universal => {
                            ann.foralls.insert(base);
                        }
                        _ => {
                            ann.exists.insert(base);
                        }
                    }
                }
                let first = log.events.len();
                for &m in &members {
                    if m != base {
                        log.note(Event::Merge {
                            edge: e.0,
                            kept: base,
                            dropped: m,
                        });
                    }
                }
                if let Some(b) = before {
                    log.steps.push(crate::event::Step {
                        event_index: first,
                        before: b,
                        after: d.clone(),
                    });
                }
                #[cfg(debug_assertions)]
                {
                    if let Err(v) = crate::wellformed::well_formed(d) {
                        panic!("merge broke well-formedness: {:?}", v);
                    }
                }
            }
            Err(reason) => {
                for &m in &members {
                    refused.insert(m);
                    if m != base {
                        log.note(Event::MergeRefused {
                            edge: e.0,
                            kept: base,
                            dropped: m,
                            reason: reason.clone(),
                        });
                    }
                }
            }
        }
    }
}

/// Finds two or more annotation variables on `e` sharing one base variable.
fn find_merge_group(
    d: &Dqbf,
    e: EdgeId,
    refused: &BTreeSet<VarId>,
) -> Option<(VarId, Vec<VarId>)> {
    let ann = &d.graph.edge(e).ann;
    let mut groups: std::collections::BTreeMap<(VarKind, VarId), Vec<VarId>> = Default::default();
    for v in ann.vars() {
        if refused.contains(&v) {
            continue;
        }
        let base = d.vars.root_base(v);
        groups.entry((d.vars.kind(v), base)).or_default().push(v);
    }
    groups
        .into_iter()
        .map(|((_, base), members)| (base, members))
        .find(|(_, members)| members.len() >= 2)
}

/// Legality of merging all `members` (bound on `e`) back into `base`:
/// no member or the base may be bound elsewhere, dependency sets must agree,
/// the occurrences of distinct members must live in disjoint children of the
/// gate below, the gate must match the quantifier kind, and for existential
/// merges the distribution conditions must hold on the merged shape.
fn merge_group_legal(d: &Dqbf, e: EdgeId, base: VarId, members: &[VarId]) -> Result<(), String> {
    let kind = d.vars.kind(members[0]);
    if binder_edges(d, base).into_iter().any(|be| be != e) {
        return Err("base variable is still bound elsewhere".into());
    }
    for &w in members {
        if binder_edges(d, w).into_iter().any(|be| be != e) {
            return Err(format!("{} is bound on another edge as well", w));
        }
    }
    if kind == VarKind::Existential {
        for &w in members {
            if d.vars.deps(w) != d.vars.deps(members[0]) {
                return Err("dependency sets of the copies diverged".into());
            }
        }
    }
    let target = d.graph.edge(e).target;
    let want_kind = match kind {
        VarKind::Universal => NodeKind::And,
        VarKind::Existential => NodeKind::Or,
        VarKind::Free => return Err("free variables are never merged".into()),
    };
    if *d.graph.kind(target) != want_kind {
        return Err("gate below does not match the quantifier kind".into());
    }
    // occurrence children per member must be pairwise disjoint
    let mut seen: BTreeSet<EdgeId> = BTreeSet::new();
    let mut occ_groups: Vec<Vec<EdgeId>> = Vec::new();
    for &w in members {
        let occ: Vec<EdgeId> = d
            .graph
            .children(target)
            .iter()
            .copied()
            .filter(|&c| d.graph.occurs_below(c, w))
            .collect();
        for &c in &occ {
            if !seen.insert(c) {
                return Err("copies occur in a shared child".into());
            }
        }
        occ_groups.push(occ);
    }
    if kind == VarKind::Existential {
        // the merged form must be distributable back: pairwise disjoint
        // occurrence closures and at most one group meeting the context
        let dy = d.vars.deps(members[0]).clone();
        let group_uocc: Vec<BTreeSet<VarId>> = occ_groups
            .iter()
            .map(|g| {
                let mut u = BTreeSet::new();
                for &c in g {
                    u.extend(uocc_of(d, c, &dy));
                }
                u
            })
            .collect();
        for i in 0..group_uocc.len() {
            for j in i + 1..group_uocc.len() {
                if group_uocc[i].intersection(&group_uocc[j]).next().is_some() {
                    return Err("occurrence closures of the copies intersect".into());
                }
            }
        }
        let all_children: Vec<EdgeId> = occ_groups.iter().flatten().copied().collect();
        let exclude: BTreeSet<VarId> = members.iter().copied().collect();
        let outside = uocc_outside(d, &all_children, &exclude);
        let non_disjoint = group_uocc
            .iter()
            .filter(|u| u.intersection(&outside).next().is_some())
            .count();
        if non_disjoint > 1 {
            return Err("more than one copy shares universals with the context".into());
        }
    }
    Ok(())
}

fn binder_edges(d: &Dqbf, v: VarId) -> Vec<EdgeId> {
    let g = &d.graph;
    let mut out = Vec::new();
    if g.edge(g.root).ann.contains(v) {
        out.push(g.root);
    }
    for e in g.edges_below_node(g.edge(g.root).target) {
        if g.edge(e).ann.contains(v) {
            out.push(e);
        }
    }
    out
}

/// Constant folding and contraction of a gate whose child edges have been
/// processed (and therefore carry no annotations).
fn simplify_gate(d: &mut Dqbf, n: NodeId, log: &mut EventLog) {
    if !matches!(d.graph.kind(n), NodeKind::And | NodeKind::Or) {
        return;
    }
    let is_and = matches!(d.graph.kind(n), NodeKind::And);
    let before = log.begin(d);
    let mut changed = false;

    let mut seen: BTreeSet<(NodeId, bool)> = BTreeSet::new();
    let mut absorbed = false;
    for &c in d.graph.children(n).to_vec().iter() {
        let cd = d.graph.edge(c);
        debug_assert!(cd.ann.is_empty(), "unprocessed annotation below a simplified gate");
        let value = match d.graph.kind(cd.target) {
            NodeKind::Const(b) => Some(*b != cd.negated),
            _ => None,
        };
        match value {
            Some(v) if v == is_and => {
                // neutral child
                d.graph.remove_child_edge(n, c);
                changed = true;
            }
            Some(_) => {
                absorbed = true;
                break;
            }
            None => {
                let key = (cd.target, cd.negated);
                if seen.contains(&(cd.target, !cd.negated)) {
                    absorbed = true; // complementary pair
                    break;
                }
                if !seen.insert(key) {
                    d.graph.remove_child_edge(n, c); // duplicate child
                    changed = true;
                }
            }
        }
    }
    if absorbed {
        d.graph.replace_node_with_const(n, !is_and);
        changed = true;
    } else {
        match d.graph.children(n).len() {
            0 => {
                d.graph.replace_node_with_const(n, is_and);
                changed = true;
            }
            1 => {
                d.graph.contract_single_child(n);
                changed = true;
            }
            _ => {}
        }
    }
    if changed {
        log.commit(before, d, Event::Simplify { gate: n.0 });
    }
}
