//! Seeded random instance generation for the property suites and benches.
//!
//! Sizes stay at desk scale on purpose: the oracle must be able to decide
//! every generated instance exactly.

use rand::prelude::IndexedRandom;
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dqbf::{Dqbf, PrenexDqbf};
use crate::formula::{exists, forall, var, Builder, Form};
use crate::graph::{Annotation, Branch, Graph};
use crate::vars::{VarId, VarKind, VarTable};

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_universals: usize,
    pub max_existentials: usize,
    pub max_dep: usize,
    pub max_inner: usize,
    pub free_vars: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_universals: 3,
            max_existentials: 2,
            max_dep: 2,
            max_inner: 8,
            free_vars: 0,
        }
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vars(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> (VarTable, Vec<VarId>) {
    let mut vt = VarTable::new();
    let nu = rng.random_range(1..=cfg.max_universals);
    let ne = rng.random_range(0..=cfg.max_existentials);
    let mut prefix = Vec::new();
    let mut universals = Vec::new();
    for i in 0..nu {
        let x = vt.add_universal(format!("x{}", i + 1));
        universals.push(x);
        prefix.push(x);
    }
    for i in 0..ne {
        let k = rng.random_range(0..=cfg.max_dep.min(universals.len()));
        let mut pool = universals.clone();
        let mut deps = Vec::new();
        for _ in 0..k {
            let idx = rng.random_range(0..pool.len());
            deps.push(pool.swap_remove(idx));
        }
        let y = vt.add_existential(format!("y{}", i + 1), deps);
        prefix.push(y);
    }
    for i in 0..cfg.free_vars {
        vt.add_free(format!("f{}", i + 1));
    }
    (vt, prefix)
}

/// A random closed prenex instance with an arbitrarily shaped matrix
/// (negations anywhere, shared subgraphs possible).
pub fn random_prenex(seed: u64, cfg: &GenConfig) -> PrenexDqbf {
    let mut rng = rng_for(seed);
    let (vt, prefix) = random_vars(&mut rng, cfg);
    let mut graph = Graph::new();
    let mut pool: Vec<Branch> = vt
        .ids()
        .map(|v| Branch::new(graph.terminal(v), rng.random_bool(0.3)))
        .collect();
    let inner = rng.random_range(1..=cfg.max_inner);
    let mut small = SmallRng::seed_from_u64(rng.random());
    for _ in 0..inner {
        let arity = rng.random_range(2..=3.min(pool.len().max(2)));
        let mut kids = Vec::new();
        for _ in 0..arity {
            let mut b = *pool.choose(&mut small).expect("nonempty pool");
            if rng.random_bool(0.2) {
                b = Branch::new(b.target, !b.negated);
            }
            kids.push(b);
        }
        let b = if rng.random_bool(0.5) {
            graph.mk_and(kids)
        } else {
            graph.mk_or(kids)
        };
        pool.push(b);
    }
    let root = *pool.last().unwrap();
    graph.set_root(root, Annotation::new());
    PrenexDqbf {
        vars: vt,
        prefix,
        matrix: graph,
    }
}

/// A random closed prenex instance whose matrix is a CNF (an AND of OR
/// clauses), directly writable as DQDIMACS.
pub fn random_cnf(seed: u64, cfg: &GenConfig) -> PrenexDqbf {
    let mut rng = rng_for(seed);
    let (vt, prefix) = random_vars(&mut rng, cfg);
    let all: Vec<VarId> = vt.ids().collect();
    let mut graph = Graph::new();
    let nclauses = rng.random_range(2..=5usize);
    let mut clauses = Vec::new();
    for _ in 0..nclauses {
        let width = rng.random_range(1..=3usize);
        let lits: Vec<Branch> = (0..width)
            .map(|_| {
                let v = all[rng.random_range(0..all.len())];
                Branch::new(graph.terminal(v), rng.random_bool(0.5))
            })
            .collect();
        clauses.push(graph.mk_or(lits));
    }
    let root = graph.mk_and(clauses);
    graph.set_root(root, Annotation::new());
    PrenexDqbf {
        vars: vt,
        prefix,
        matrix: graph,
    }
}

/// A random well-formed non-prenex instance: quantifiers are introduced on
/// the way down, each binding a fresh variable, so the sibling disjointness
/// conditions hold by construction.
pub fn random_nonprenex(seed: u64, cfg: &GenConfig) -> Dqbf {
    let mut rng = rng_for(seed);
    let mut b = Builder::new();
    let mut counters = (0usize, 0usize); // universals, existentials
    let free: Vec<VarId> = (0..cfg.free_vars.max(1))
        .map(|i| b.free(format!("f{}", i + 1).as_str()))
        .collect();
    let mut budget = rng.random_range(2..=cfg.max_inner);
    let f = gen_form(&mut rng, &mut b, cfg, &mut counters, &free, &[], &mut budget, 0);
    b.finish(f)
}

#[allow(clippy::too_many_arguments)]
fn gen_form(
    rng: &mut ChaCha8Rng,
    b: &mut Builder,
    cfg: &GenConfig,
    counters: &mut (usize, usize),
    in_scope: &[VarId],
    scoped_universals: &[VarId],
    budget: &mut usize,
    depth: usize,
) -> Form {
    let leaf_only = *budget == 0 || depth > 4;
    let choice = if leaf_only { 0 } else { rng.random_range(0..10) };
    match choice {
        // leaf literal
        0..=2 => {
            let pool: Vec<VarId> = in_scope.to_vec();
            let v = pool[rng.random_range(0..pool.len())];
            if rng.random_bool(0.4) {
                crate::formula::nnot(var(v))
            } else {
                var(v)
            }
        }
        // universal quantifier
        3 if counters.0 < cfg.max_universals => {
            counters.0 += 1;
            let x = b.universal(&format!("x{}", counters.0));
            let mut scope = in_scope.to_vec();
            scope.push(x);
            let mut su = scoped_universals.to_vec();
            su.push(x);
            *budget = budget.saturating_sub(1);
            forall([x], gen_form(rng, b, cfg, counters, &scope, &su, budget, depth + 1))
        }
        // existential quantifier
        4 if counters.1 < cfg.max_existentials => {
            counters.1 += 1;
            let k = rng.random_range(0..=cfg.max_dep.min(scoped_universals.len()));
            let mut pool = scoped_universals.to_vec();
            let mut deps = Vec::new();
            for _ in 0..k {
                let idx = rng.random_range(0..pool.len());
                deps.push(pool.swap_remove(idx));
            }
            let y = b.existential(&format!("y{}", counters.1), deps);
            let mut scope = in_scope.to_vec();
            scope.push(y);
            *budget = budget.saturating_sub(1);
            exists(y, gen_form(rng, b, cfg, counters, &scope, scoped_universals, budget, depth + 1))
        }
        // gates
        _ => {
            let arity = rng.random_range(2..=3);
            *budget = budget.saturating_sub(1);
            let kids: Vec<Form> = (0..arity)
                .map(|_| gen_form(rng, b, cfg, counters, in_scope, scoped_universals, budget, depth + 1))
                .collect();
            if rng.random_bool(0.5) {
                Form::And(kids)
            } else {
                Form::Or(kids)
            }
        }
    }
}

/// Random quantifier-free NNF formula over the given variables (for the
/// monotone-replacement property checks).
pub fn random_nnf_formula(seed: u64, vars: &[VarId], max_inner: usize) -> (Graph, Branch) {
    let mut rng = rng_for(seed);
    let mut graph = Graph::new();
    let mut pool: Vec<Branch> = vars
        .iter()
        .map(|&v| {
            let t = graph.terminal(v);
            Branch::new(t, rng.random_bool(0.5))
        })
        .collect();
    let inner = rng.random_range(1..=max_inner.max(1));
    for _ in 0..inner {
        let arity = rng.random_range(2..=3);
        let kids: Vec<Branch> = (0..arity)
            .map(|_| pool[rng.random_range(0..pool.len())])
            .collect();
        let b = if rng.random_bool(0.5) {
            graph.mk_and(kids)
        } else {
            graph.mk_or(kids)
        };
        pool.push(b);
    }
    let root = *pool.last().unwrap();
    graph.set_root(root, Annotation::new());
    (graph, root)
}

/// A random total assignment over the table's variables.
pub fn random_assignment(seed: u64, vt: &VarTable) -> std::collections::HashMap<VarId, bool> {
    let mut rng = rng_for(seed);
    vt.ids().map(|v| (v, rng.random_bool(0.5))).collect()
}

/// All variables of a table, by kind.
pub fn vars_by_kind(vt: &VarTable, kind: VarKind) -> Vec<VarId> {
    vt.ids().filter(|&v| vt.kind(v) == kind).collect()
}
