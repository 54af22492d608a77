//! Quantifier localization: NNF normalization, macrogate construction, and
//! the topological pushing pass that moves quantifiers from the root edge as
//! deep into the graph as the rewrite rules allow.

use std::collections::{BTreeSet, HashMap};

use crate::dqbf::{Dqbf, PrenexDqbf};
use crate::event::{Event, EventLog};
use crate::graph::{Annotation, Branch, EdgeId, Graph, NodeId, NodeKind};
use crate::rewrite::{apply_rule, uocc_of, uocc_outside, RuleId};
use crate::vars::{VarId, VarKind};

/// Which variable to separate the incoming edges on when a gate has leftover
/// variables that are not common to every incoming edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitHeuristic {
    /// The variable on the most incoming edges (the pseudocode's choice).
    #[default]
    MostIncoming,
    /// The variable on the fewest incoming edges (alternative, not claimed
    /// to match the published procedure).
    FewestIncoming,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LocalizeConfig {
    pub split: SplitHeuristic,
}

/// Pushes negations to the terminals and rebuilds the matrix; the root edge
/// receives the whole prefix as its annotation.
pub fn normalize_to_nnf(p: &PrenexDqbf) -> Dqbf {
    let mut graph = Graph::new();
    let mut memo: HashMap<(NodeId, bool), Branch> = HashMap::new();
    let src_root = p.matrix.branch_of(p.matrix.root);
    let b = nnf_rec(&p.matrix, src_root.target, src_root.negated, &mut graph, &mut memo);
    let mut ann = Annotation::new();
    for &v in &p.prefix {
        match p.vars.kind(v) {
            VarKind::Universal => {
                ann.foralls.insert(v);
            }
            VarKind::Existential => {
                ann.exists.insert(v);
            }
            VarKind::Free => {}
        }
    }
    graph.set_root(b, ann);
    Dqbf {
        vars: p.vars.clone(),
        graph,
    }
}

fn nnf_rec(
    src: &Graph,
    n: NodeId,
    flip: bool,
    dst: &mut Graph,
    memo: &mut HashMap<(NodeId, bool), Branch>,
) -> Branch {
    if let Some(&b) = memo.get(&(n, flip)) {
        return b;
    }
    let out = match src.kind(n) {
        NodeKind::Const(b) => Branch::plain(dst.constant(*b != flip)),
        NodeKind::Terminal(v) => Branch::new(dst.terminal(*v), flip),
        NodeKind::And | NodeKind::Or => {
            let is_and = matches!(src.kind(n), NodeKind::And) != flip;
            let kids: Vec<Branch> = src
                .children(n)
                .iter()
                .map(|&c| {
                    let d = src.edge(c);
                    debug_assert!(d.ann.is_empty(), "prenex matrix with annotations");
                    nnf_rec(src, d.target, flip != d.negated, dst, memo)
                })
                .collect();
            if is_and {
                dst.mk_and(kids)
            } else {
                dst.mk_or(kids)
            }
        }
    };
    memo.insert((n, flip), out);
    out
}

/// Merges fanout-free same-operation cones into single multi-input gates.
/// The search stops at nodes with more than one parent.
pub fn build_macrogates(d: &mut Dqbf) {
    let order = d.graph.topo_inner();
    for n in order {
        let mut i = 0;
        while i < d.graph.children(n).len() {
            let c = d.graph.children(n)[i];
            let cd = d.graph.edge(c);
            let t = cd.target;
            let mergeable = cd.ann.is_empty()
                && !cd.negated
                && d.graph.kind(t) == d.graph.kind(n)
                && d.graph.kind(t).is_inner()
                && d.graph.parents(t).len() == 1;
            if mergeable {
                d.graph.splice_child(n, c);
                // re-scan the spliced-in children at the same index
            } else {
                i += 1;
            }
        }
    }
}

/// Runs the full localization pass over the graph in topological order.
pub fn localize(d: &mut Dqbf, cfg: &LocalizeConfig, log: &mut EventLog) {
    let mut list: Vec<NodeId> = d.graph.topo_inner();
    let mut i = 0;
    while i < list.len() {
        let g = list[i];
        if !d.graph.kind(g).is_inner() || !d.graph.is_reachable(g) {
            i += 1;
            continue;
        }
        push_variables(d, g, &mut list, i, log);
        // distribution replaces children by renamed clones; queue any gate
        // below `g` that the initial order does not know about
        let mut insert_at = i + 1;
        for c in d.graph.children(g).to_vec() {
            let t = d.graph.edge(c).target;
            if d.graph.kind(t).is_inner() && !list.contains(&t) {
                list.insert(insert_at, t);
                insert_at += 1;
            }
        }
        if let Some(v) = split_var(d, g, cfg) {
            let incoming_before = d.graph.parents(g).len();
            let before = log.begin(d);
            let clone = separate_incomings(d, g, v).expect("split precondition checked");
            log.commit(
                before,
                d,
                Event::Split {
                    gate: g.0,
                    clone: clone.0,
                    var: v,
                },
            );
            debug_assert!(d.graph.parents(g).len() < incoming_before);
            list.insert(i + 1, clone);
            // reprocess the same gate: more splits may be needed
        } else {
            i += 1;
        }
    }
    #[cfg(debug_assertions)]
    {
        if let Err(v) = crate::wellformed::well_formed(d) {
            panic!("localize broke well-formedness: {:?}", v);
        }
    }
}

/// Depth-weighted annotation placement; localization pushes strictly
/// increase it.
pub fn annotation_depth_measure(d: &Dqbf) -> u64 {
    let g = &d.graph;
    let mut depth: HashMap<EdgeId, u64> = HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    depth.insert(g.root, 0);
    queue.push_back(g.root);
    while let Some(e) = queue.pop_front() {
        let dep = depth[&e];
        for &c in g.children(g.edge(e).target) {
            if let std::collections::hash_map::Entry::Vacant(slot) = depth.entry(c) {
                slot.insert(dep + 1);
                queue.push_back(c);
            }
        }
    }
    depth
        .iter()
        .map(|(&e, &dep)| (dep + 1) * g.edge(e).ann.len() as u64)
        .sum()
}

#[cfg(debug_assertions)]
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

fn try_rule(d: &mut Dqbf, e: EdgeId, rule: RuleId, v: VarId, log: &mut EventLog) -> bool {
    #[cfg(debug_assertions)]
    let measure = is_push_rule(rule).then(|| annotation_depth_measure(d));
    let before = log.begin(d);
    match apply_rule(d, e, rule, v) {
        Ok(r) => {
            #[cfg(debug_assertions)]
            if let Some(m) = measure {
                let after = annotation_depth_measure(d);
                debug_assert!(after > m, "push did not deepen the annotation placement");
            }
            log.commit(before, d, Event::Push(r));
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
    }
}

/// Child edges of the gate under `e` whose subtree contains `v`.
fn occ_children(d: &Dqbf, e: EdgeId, v: VarId) -> Vec<EdgeId> {
    d.graph
        .children(d.graph.edge(e).target)
        .iter()
        .copied()
        .filter(|&c| d.graph.occurs_below(c, v))
        .collect()
}

/// Child edges whose scope holds an existential depending on `x`.
fn dep_children(d: &Dqbf, e: EdgeId, x: VarId) -> Vec<EdgeId> {
    d.graph
        .children(d.graph.edge(e).target)
        .iter()
        .copied()
        .filter(|&c| {
            let mut ex: BTreeSet<VarId> = d.graph.edge(c).ann.exists.iter().copied().collect();
            ex.extend(d.graph.existentials_below(c, &d.vars));
            ex.iter().any(|&w| d.vars.deps(w).contains(&x))
        })
        .collect()
}

fn edge_blocked_universal(d: &Dqbf, e: EdgeId, x: VarId) -> bool {
    d.graph
        .edge(e)
        .ann
        .exists
        .iter()
        .any(|&w| d.vars.deps(w).contains(&x))
}

/// Groups the given child edges under a fresh gate of the same kind and
/// returns the connecting edge.
fn decompose(
    d: &mut Dqbf,
    g: NodeId,
    group: &[EdgeId],
    list: &mut Vec<NodeId>,
    i: usize,
    log: &mut EventLog,
) -> EdgeId {
    let idxs: Vec<usize> = d
        .graph
        .children(g)
        .iter()
        .enumerate()
        .filter(|(_, c)| group.contains(c))
        .map(|(i, _)| i)
        .collect();
    debug_assert_eq!(idxs.len(), group.len());
    let before = log.begin(d);
    let (sub, link) = d.graph.group_children(g, &idxs);
    log.commit(
        before,
        d,
        Event::Decompose {
            gate: g.0,
            new_gate: sub.0,
            moved: group.len(),
        },
    );
    list.insert(i + 1, sub);
    link
}

/// Pushes every variable common to all incoming edges of `g` over the gate,
/// existential variables first.
pub fn push_variables(d: &mut Dqbf, g: NodeId, list: &mut Vec<NodeId>, i: usize, log: &mut EventLog) {
    let incoming: Vec<EdgeId> = d.graph.parents(g).to_vec();
    if incoming.len() != 1 {
        // With per-variable binders a variable cannot be common to several
        // incoming edges; separation reduces gates to a single incoming edge.
        return;
    }
    let e = incoming[0];
    if matches!(d.graph.kind(g), NodeKind::And) {
        push_over_conjunction(d, e, g, list, i, log);
    } else {
        push_over_disjunction(d, e, g, list, i, log);
    }
}

fn push_over_conjunction(
    d: &mut Dqbf,
    e: EdgeId,
    g: NodeId,
    list: &mut Vec<NodeId>,
    i: usize,
    log: &mut EventLog,
) {
    let mut remaining: BTreeSet<VarId> = d.graph.edge(e).ann.exists.iter().copied().collect();
    while let Some(y) = find_best_variable_conj(d, e, &remaining) {
        remaining.remove(&y);
        let cy = occ_children(d, e, y);
        let nkids = d.graph.children(g).len();
        match cy.len() {
            0 => {
                try_rule(d, e, RuleId::DropExists, y, log);
            }
            1 => {
                try_rule(d, e, RuleId::ExistsOpScope, y, log);
            }
            n if n == nkids => {
                log.note(Event::Stuck {
                    edge: e.0,
                    var: y,
                    reason: "occurs in every child".into(),
                });
            }
            _ => {
                decompose(d, g, &cy, list, i, log);
                try_rule(d, e, RuleId::ExistsOpScope, y, log);
            }
        }
    }
    let universals: Vec<VarId> = d.graph.edge(e).ann.foralls.iter().copied().collect();
    for x in universals {
        if edge_blocked_universal(d, e, x) {
            log.note(Event::Stuck {
                edge: e.0,
                var: x,
                reason: "a dependent existential remains on the edge".into(),
            });
            continue;
        }
        let cx = occ_children(d, e, x);
        match cx.len() {
            0 => {
                try_rule(d, e, RuleId::DropForall, x, log);
            }
            1 => {
                try_rule(d, e, RuleId::ForallAndScope, x, log);
            }
            _ => {
                try_rule(d, e, RuleId::ForallAndDistribute, x, log);
            }
        }
    }
}

fn push_over_disjunction(
    d: &mut Dqbf,
    e: EdgeId,
    g: NodeId,
    list: &mut Vec<NodeId>,
    i: usize,
    log: &mut EventLog,
) {
    let mut remaining: BTreeSet<VarId> = d.graph.edge(e).ann.vars().collect();
    // distribute the existentials that pass the occurrence-set conditions
    let exs: Vec<VarId> = d.graph.edge(e).ann.exists.iter().copied().collect();
    for y in exs {
        if !is_var_pushable(d, e, y) {
            log.note(Event::Stuck {
                edge: e.0,
                var: y,
                reason: "distribution conditions over the disjunction fail".into(),
            });
            continue;
        }
        let cy = occ_children(d, e, y);
        let fired = match cy.len() {
            0 => try_rule(d, e, RuleId::DropExists, y, log),
            1 => try_rule(d, e, RuleId::ExistsOpScope, y, log),
            _ => try_rule(d, e, RuleId::ExistsOrDistribute, y, log),
        };
        if fired {
            remaining.remove(&y);
        }
    }
    // leftovers: decompose-and-scope; universals only once unblocked
    while let Some(v) = find_best_variable_disj(d, e, &remaining) {
        remaining.remove(&v);
        let nkids = d.graph.children(g).len();
        match d.vars.kind(v) {
            VarKind::Existential => {
                let cy = occ_children(d, e, v);
                match cy.len() {
                    0 => {
                        try_rule(d, e, RuleId::DropExists, v, log);
                    }
                    1 => {
                        try_rule(d, e, RuleId::ExistsOpScope, v, log);
                    }
                    n if n == nkids => {
                        log.note(Event::Stuck {
                            edge: e.0,
                            var: v,
                            reason: "occurs in every child".into(),
                        });
                    }
                    _ => {
                        decompose(d, g, &cy, list, i, log);
                        try_rule(d, e, RuleId::ExistsOpScope, v, log);
                    }
                }
            }
            VarKind::Universal => {
                let mut c: BTreeSet<EdgeId> = occ_children(d, e, v).into_iter().collect();
                c.extend(dep_children(d, e, v));
                let c: Vec<EdgeId> = c.into_iter().collect();
                match c.len() {
                    0 => {
                        try_rule(d, e, RuleId::DropForall, v, log);
                    }
                    1 => {
                        try_rule(d, e, RuleId::ForallOpScope, v, log);
                    }
                    n if n == nkids => {
                        log.note(Event::Stuck {
                            edge: e.0,
                            var: v,
                            reason: "occurs or is depended on in every child".into(),
                        });
                    }
                    _ => {
                        decompose(d, g, &c, list, i, log);
                        try_rule(d, e, RuleId::ForallOpScope, v, log);
                    }
                }
            }
            VarKind::Free => {}
        }
    }
}

/// The existential candidate occurring in the fewest children (ties: lowest
/// id). Used when pushing over conjunctions.
pub fn find_best_variable_conj(d: &Dqbf, e: EdgeId, candidates: &BTreeSet<VarId>) -> Option<VarId> {
    candidates
        .iter()
        .copied()
        .filter(|&v| d.vars.kind(v) == VarKind::Existential)
        .min_by_key(|&v| (occ_children(d, e, v).len(), v))
}

/// The eligible variable with the fewest children to split off over a
/// disjunction; universals are eligible only once no existential on the edge
/// depends on them.
pub fn find_best_variable_disj(d: &Dqbf, e: EdgeId, candidates: &BTreeSet<VarId>) -> Option<VarId> {
    candidates
        .iter()
        .copied()
        .filter(|&v| match d.vars.kind(v) {
            VarKind::Existential => true,
            VarKind::Universal => !edge_blocked_universal(d, e, v),
            VarKind::Free => false,
        })
        .min_by_key(|&v| {
            let mut c: BTreeSet<EdgeId> = occ_children(d, e, v).into_iter().collect();
            if d.vars.kind(v) == VarKind::Universal {
                c.extend(dep_children(d, e, v));
            }
            (c.len(), v)
        })
}

/// Can `y` be distributed over the disjunction under `e`? True when it
/// occurs in at most one child, or when the occurrence children have
/// pairwise disjoint universal occurrence sets of which at most one meets
/// the context's.
pub fn is_var_pushable(d: &Dqbf, e: EdgeId, y: VarId) -> bool {
    debug_assert!(matches!(d.graph.kind(d.graph.edge(e).target), NodeKind::Or));
    let cy = occ_children(d, e, y);
    if cy.len() <= 1 {
        return true;
    }
    let dy = d.vars.deps(y).clone();
    let uoccs: Vec<BTreeSet<VarId>> = cy.iter().map(|&c| uocc_of(d, c, &dy)).collect();
    for i in 0..uoccs.len() {
        for j in i + 1..uoccs.len() {
            if uoccs[i].intersection(&uoccs[j]).next().is_some() {
                return false;
            }
        }
    }
    let mut exclude = BTreeSet::new();
    exclude.insert(y);
    let outside = uocc_outside(d, &cy, &exclude);
    let non_disjoint = uoccs
        .iter()
        .filter(|u| u.intersection(&outside).next().is_some())
        .count();
    non_disjoint <= 1
}

/// Picks the variable to separate incoming edges on: present on at least one
/// but not all incoming edges, maximizing (or minimizing) the edge count.
fn split_var(d: &Dqbf, g: NodeId, cfg: &LocalizeConfig) -> Option<VarId> {
    let incoming = d.graph.parents(g);
    if incoming.len() < 2 {
        return None;
    }
    let mut counts: HashMap<VarId, usize> = HashMap::new();
    for &e in incoming {
        for v in d.graph.edge(e).ann.vars() {
            *counts.entry(v).or_insert(0) += 1;
        }
    }
    let partial: Vec<(VarId, usize)> = counts
        .into_iter()
        .filter(|&(_, c)| c < incoming.len())
        .collect();
    match cfg.split {
        SplitHeuristic::MostIncoming => partial
            .into_iter()
            .min_by_key(|&(v, c)| (std::cmp::Reverse(c), v))
            .map(|(v, _)| v),
        SplitHeuristic::FewestIncoming => {
            partial.into_iter().min_by_key(|&(v, c)| (c, v)).map(|(v, _)| v)
        }
    }
}

/// Splits the incoming edges of `g`: edges carrying `v` stay on `g`, the
/// rest move to a clone sharing the same children.
pub fn separate_incomings(d: &mut Dqbf, g: NodeId, v: VarId) -> Result<NodeId, String> {
    let incoming: Vec<EdgeId> = d.graph.parents(g).to_vec();
    let with: Vec<EdgeId> = incoming
        .iter()
        .copied()
        .filter(|&e| d.graph.edge(e).ann.contains(v))
        .collect();
    if with.is_empty() || with.len() == incoming.len() {
        return Err(format!(
            "{} occurs on {} of {} incoming edges",
            v,
            with.len(),
            incoming.len()
        ));
    }
    let clone = d.graph.clone_gate(g);
    for e in incoming {
        if !d.graph.edge(e).ann.contains(v) {
            d.graph.redirect_incoming(e, clone);
        }
    }
    Ok(clone)
}
