//! Structural invariants of the graph operations: variable partitions,
//! cofactor behavior, and the raw shape of the parsed running circuit.

use std::collections::{BTreeSet, HashMap};

use dqbfloc_core::fixtures;
use dqbfloc_core::formula::{exists, var, Builder};
use dqbfloc_core::generate::{random_nonprenex, random_prenex, GenConfig};
use dqbfloc_core::graph::NodeKind;
use dqbfloc_core::localize::normalize_to_nnf;
use dqbfloc_core::vars::VarId;
use proptest::prelude::*;

#[test]
fn running_circuit_parse_shape() {
    // nine gates, ten terminal edges, five of them negated (~x2 twice,
    // ~y1, ~x1, ~y2)
    let p = fixtures::running_circuit();
    let g = &p.matrix;
    let root = g.edge(g.root).target;
    let mut inner = 0;
    let mut terminal_edges = 0;
    let mut negated_terminal_edges = 0;
    let mut stack = vec![root];
    let mut seen = BTreeSet::new();
    while let Some(n) = stack.pop() {
        if !seen.insert(n) {
            continue;
        }
        if g.kind(n).is_inner() {
            inner += 1;
        }
        for &c in g.children(n) {
            let d = g.edge(c);
            if matches!(g.kind(d.target), NodeKind::Terminal(_)) {
                terminal_edges += 1;
                if d.negated {
                    negated_terminal_edges += 1;
                }
            }
            stack.push(d.target);
        }
    }
    assert_eq!(inner, 9);
    assert_eq!(terminal_edges, 10);
    assert_eq!(negated_terminal_edges, 5);
}

#[test]
fn partition_examples() {
    // (x1 xor y1) has no quantified variables and both in the free support
    let mut b = Builder::new();
    let x1 = b.universal("x1");
    let x2 = b.universal("x2");
    let y1 = b.existential("y1", [x2]);
    let d = b.finish(var(x1).xor(var(y1)));
    let p = d.graph.var_partition(d.graph.root);
    assert!(p.exists.is_empty() && p.foralls.is_empty());
    assert_eq!(p.free_supp, [x1, y1].into_iter().collect());

    // exists y1(x2) . (x1 xor y1) moves y1 into the existential set
    let mut b = Builder::new();
    let x1 = b.universal("x1");
    let x2 = b.universal("x2");
    let y1 = b.existential("y1", [x2]);
    let d = b.finish(exists(y1, var(x1).xor(var(y1))));
    let p = d.graph.var_partition(d.graph.root);
    assert_eq!(p.exists, [y1].into_iter().collect());
    assert!(p.foralls.is_empty());
    assert_eq!(p.free_supp, [x1].into_iter().collect());

    // a bare terminal
    let mut b = Builder::new();
    let v = b.free("v");
    let d = b.finish(var(v));
    let p = d.graph.var_partition(d.graph.root);
    assert!(p.exists.is_empty() && p.foralls.is_empty());
    assert_eq!(p.free_supp, [v].into_iter().collect());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The three partition sets are pairwise disjoint and jointly cover the
    /// occurring variables plus the quantifier annotations of the subformula.
    #[test]
    fn partition_sets_cover_and_partition(seed in 0u64..4000) {
        let d = random_nonprenex(seed, &GenConfig::default());
        let g = &d.graph;
        let top = g.edge(g.root).target;
        let mut edges = vec![g.root];
        edges.extend(g.edges_below_node(top));
        for e in edges {
            let p = g.var_partition(e);
            prop_assert!(p.exists.intersection(&p.foralls).next().is_none());
            prop_assert!(p.exists.intersection(&p.free_supp).next().is_none());
            prop_assert!(p.foralls.intersection(&p.free_supp).next().is_none());
            let mut union: BTreeSet<VarId> = p.exists.clone();
            union.extend(&p.foralls);
            union.extend(&p.free_supp);
            let mut expected: BTreeSet<VarId> = g.terminals_below(e);
            expected.extend(g.edge(e).ann.vars());
            expected.extend(g.bound_below(e));
            prop_assert_eq!(union, expected);
        }
    }

    /// Cofactors drop every occurrence of the variable and agree with the
    /// original under every assignment that matches the substituted value.
    #[test]
    fn cofactor_substitution_property(seed in 0u64..4000, c in any::<bool>()) {
        let p = random_prenex(seed, &GenConfig::default());
        let d = normalize_to_nnf(&p);
        let mut g = d.graph.clone();
        let vars: Vec<VarId> = d.vars.ids().collect();
        let v = vars[(seed as usize) % vars.len()];
        let b = g.branch_of(g.root);
        let cof = g.cofactor_branch(b, v, c);
        prop_assert!(!g.occurs_below_node(cof.target, v));
        // exhaustive agreement over the remaining variables
        let others: Vec<VarId> = vars.iter().copied().filter(|&w| w != v).collect();
        prop_assume!(others.len() <= 6);
        for row in 0..(1usize << others.len()) {
            let mut mu: HashMap<VarId, bool> = HashMap::new();
            for (i, &w) in others.iter().enumerate() {
                mu.insert(w, row & (1 << i) != 0);
            }
            mu.insert(v, c);
            prop_assert_eq!(g.eval_branch(b, &mu), g.eval_branch(cof, &mu));
        }
    }
}
