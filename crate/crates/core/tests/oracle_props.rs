//! Oracle correctness: the two semantics agree, the definitional semantics
//! matches an independent prenex evaluator, and the published worked values
//! hold exactly.

use std::collections::{BTreeSet, HashMap};

use dqbfloc_core::dqbf::{Dqbf, PrenexDqbf};
use dqbfloc_core::event::EventLog;
use dqbfloc_core::fixtures;
use dqbfloc_core::formula::{exists, forall, nnot, var, Builder};
use dqbfloc_core::generate::{random_nonprenex, random_prenex, GenConfig};
use dqbfloc_core::localize::{build_macrogates, localize, normalize_to_nnf, LocalizeConfig};
use dqbfloc_core::oracle::{
    candidate_universe, check_candidate, equisat, equivalent, is_sat, sem_def, sem_def_over,
    sem_rec, sem_rec_over, OracleConfig, OracleError, SkolemCandidate, Table,
};
use dqbfloc_core::vars::{VarId, VarKind};

/// Independent reference for closed prenex instances: enumerate every
/// assignment of Skolem tables directly over the matrix, no graph machinery
/// beyond plain evaluation.
fn prenex_brute_force_sat(p: &PrenexDqbf) -> bool {
    let universals: Vec<VarId> = p.universals();
    let existentials: Vec<VarId> = p.existentials();
    let nu = universals.len();
    // table sizes per existential
    let dep_lists: Vec<Vec<VarId>> = existentials
        .iter()
        .map(|&y| {
            p.vars
                .deps(y)
                .iter()
                .copied()
                .filter(|d| universals.contains(d))
                .collect()
        })
        .collect();
    let bits: Vec<u32> = dep_lists.iter().map(|d| 1u32 << d.len()).collect();
    let total: u64 = bits.iter().map(|&b| 1u64 << b).product();
    for mut cand_idx in 0..total {
        let mut tables: Vec<u64> = Vec::new();
        for &b in &bits {
            let space = 1u64 << b;
            tables.push(cand_idx % space);
            cand_idx /= space;
        }
        let mut all = true;
        for mu in 0..(1u64 << nu) {
            let mut assign: HashMap<VarId, bool> = HashMap::new();
            for (i, &x) in universals.iter().enumerate() {
                assign.insert(x, mu & (1 << i) != 0);
            }
            for (k, &y) in existentials.iter().enumerate() {
                let mut row = 0usize;
                for (j, dx) in dep_lists[k].iter().enumerate() {
                    if assign[dx] {
                        row |= 1 << j;
                    }
                }
                assign.insert(y, (tables[k] >> row) & 1 == 1);
            }
            if !p.matrix.eval(&assign) {
                all = false;
                break;
            }
        }
        if all {
            return true;
        }
    }
    total == 0
}

#[test]
fn def_matches_independent_prenex_evaluation() {
    let cfg = OracleConfig::default();
    let gen = GenConfig::default();
    for seed in 0..120u64 {
        let p = random_prenex(seed, &gen);
        let expected = prenex_brute_force_sat(&p);
        let got = is_sat(&p.to_dqbf(), &cfg).unwrap();
        assert_eq!(got, expected, "seed {}", seed);
    }
}

#[test]
fn def_equals_rec_on_random_prenex_and_localized() {
    let cfg = OracleConfig::default();
    let gen = GenConfig::default();
    for seed in 0..60u64 {
        let p = random_prenex(seed, &gen);
        // the recursive characterization is defined on NNF shapes only
        let d = normalize_to_nnf(&p);
        let a = sem_def(&d, &cfg).unwrap();
        let b = sem_rec(&d, &cfg).unwrap();
        assert_eq!(a.candidates, b.candidates, "prenex seed {}", seed);

        let mut loc = normalize_to_nnf(&p);
        build_macrogates(&mut loc);
        let mut log = EventLog::new();
        localize(&mut loc, &LocalizeConfig::default(), &mut log);
        let a = sem_def(&loc, &cfg).unwrap();
        let b = sem_rec(&loc, &cfg).unwrap();
        assert_eq!(a.candidates, b.candidates, "localized seed {}", seed);
    }
}

#[test]
fn def_equals_rec_on_random_nonprenex() {
    let cfg = OracleConfig::default();
    let gen = GenConfig::default();
    for seed in 0..60u64 {
        let d = random_nonprenex(seed, &gen);
        dqbfloc_core::wellformed::well_formed(&d).unwrap();
        let a = sem_def(&d, &cfg).unwrap();
        let b = sem_rec(&d, &cfg).unwrap();
        assert_eq!(a.candidates, b.candidates, "seed {}", seed);
    }
}

#[test]
fn xor_subformula_semantics_over_ambient_universe() {
    // the set of Skolem functions of (x1 xor y1) over {x1, x2, y1}: all
    // constant assignments with s(y1) != s(x1)
    let mut b = Builder::new();
    let x1 = b.free("x1");
    let x2 = b.free("x2");
    let y1 = b.free("y1");
    let d = b.finish(var(x1).xor(var(y1)));
    let universe: BTreeSet<VarId> = [x1, x2, y1].into_iter().collect();
    let cfg = OracleConfig::default();
    let s = sem_rec_over(&d, &universe, &cfg).unwrap();
    assert_eq!(s.len(), 4, "two x1/y1 combinations times free x2");
    for cand in &s.candidates {
        let vx = cand.get(x1).unwrap().is_constant().unwrap();
        let vy = cand.get(y1).unwrap().is_constant().unwrap();
        assert_ne!(vx, vy);
    }
    assert_eq!(
        s.candidates,
        sem_def_over(&d, &universe, &cfg).unwrap().candidates
    );
}

#[test]
fn single_universal_step_yields_four_recombinations() {
    // forall x2 . ((x1 <-> x2) | exists y1(x2) . (x1 xor y1)) over
    // {x1, x2, y1} with x1 free: exactly the four recombined functions
    // (0, x2), (0, 1), (1, 0), (1, x2) for (x1, y1)
    let mut b = Builder::new();
    let x1 = b.free("x1");
    let x2 = b.universal("x2");
    let y1 = b.existential("y1", [x2]);
    let f = forall(
        [x2],
        var(x1).iff(var(x2)).or(exists(y1, var(x1).xor(var(y1)))),
    );
    let d = b.finish(f);
    let cfg = OracleConfig::default();
    let s = sem_rec(&d, &cfg).unwrap();
    let expected: BTreeSet<(bool, Table)> = [
        (false, Table::identity(x2)),
        (false, Table::constant(true)),
        (true, Table::constant(false)),
        (true, Table::identity(x2)),
    ]
    .into_iter()
    .collect();
    let got: BTreeSet<(bool, Table)> = s
        .candidates
        .iter()
        .map(|c| {
            (
                c.get(x1).unwrap().is_constant().unwrap(),
                c.get(y1).unwrap().clone(),
            )
        })
        .collect();
    assert_eq!(got, expected);
    assert_eq!(s.candidates, sem_def(&d, &cfg).unwrap().candidates);
}

#[test]
fn cleared_dependency_instance_has_two_candidates_and_none_work() {
    let inst = dqbfloc_core::counterexamples::or_dep_localized();
    let cfg = OracleConfig::default();
    let n = candidate_universe(&inst.dqbf, &cfg).unwrap().count();
    assert_eq!(n, 2);
    let sem = sem_def(&inst.dqbf, &cfg).unwrap();
    assert!(sem.is_empty());
    assert_eq!(sem.universe_size, 2);
}

#[test]
fn closed_formula_without_choices_has_one_empty_candidate() {
    let mut b = Builder::new();
    let x = b.universal("x");
    let d = b.finish(forall([x], var(x).or(nnot(var(x)))));
    let cfg = OracleConfig::default();
    let cands: Vec<SkolemCandidate> = candidate_universe(&d, &cfg).unwrap().collect();
    assert_eq!(cands.len(), 1);
    assert!(cands[0].assignment.is_empty());
    assert!(check_candidate(&d, &cands[0]));
}

#[test]
fn and_chain_witness_verifies() {
    // the full-dependency conjunction instance is satisfied by
    // y1 = ~(x1 & x2), y2 = x1 & x2
    let inst = dqbfloc_core::counterexamples::and_chain_full_deps();
    let d = inst.dqbf;
    let ids: Vec<VarId> = d.vars.ids().collect();
    let (x1, x2, y1, y2) = (ids[0], ids[1], ids[2], ids[3]);
    let mut cand = SkolemCandidate::default();
    cand.assignment
        .insert(y1, Table::from_bits(&[x1, x2], 0b0111));
    cand.assignment
        .insert(y2, Table::from_bits(&[x1, x2], 0b1000));
    assert!(check_candidate(&d, &cand));
    // and the complementary pair does not
    let mut bad = cand.clone();
    bad.assignment.insert(y2, Table::constant(false));
    assert!(!check_candidate(&d, &bad));
}

#[test]
fn disjunction_with_disjoint_universals_taut_iff_one_side() {
    // for generated pairs with disjoint universal sets, the disjunction is
    // satisfiable exactly when one disjunct alone already is
    let cfg = OracleConfig::default();
    for seed in 0..40u64 {
        let mut b = Builder::new();
        let x1 = b.universal("x1");
        let x2 = b.universal("x2");
        let g1 = random_formula_over(&mut b, seed * 2 + 1, &[x1]);
        let g2 = random_formula_over(&mut b, seed * 2 + 2, &[x2]);
        let left = b.vars.clone();
        let _ = left;
        let whole = b.finish(forall([x1], g1.clone()).or(forall([x2], g2.clone())));
        let sat_whole = is_sat(&whole, &cfg).unwrap();

        let mut b1 = Builder::new();
        let x1b = b1.universal("x1");
        let g1b = rename_form(&g1, x1, x1b);
        let lhs = b1.finish(forall([x1b], g1b));
        let mut b2 = Builder::new();
        let x2b = b2.universal("x2");
        let g2b = rename_form(&g2, x2, x2b);
        let rhs = b2.finish(forall([x2b], g2b));
        let one_side = is_sat(&lhs, &cfg).unwrap() || is_sat(&rhs, &cfg).unwrap();
        assert_eq!(sat_whole, one_side, "seed {}", seed);
    }
}

fn random_formula_over(
    _b: &mut Builder,
    seed: u64,
    vars: &[VarId],
) -> dqbfloc_core::formula::Form {
    // tiny deterministic shapes over the given variables
    let v0 = var(vars[0]);
    match seed % 5 {
        0 => v0.clone().or(nnot(v0)),
        1 => v0.clone().and(nnot(v0)),
        2 => v0.clone(),
        3 => nnot(v0),
        _ => v0.clone().or(v0),
    }
}

fn rename_form(f: &dqbfloc_core::formula::Form, from: VarId, to: VarId) -> dqbfloc_core::formula::Form {
    use dqbfloc_core::formula::Form;
    match f {
        Form::Const(b) => Form::Const(*b),
        Form::Var(v) => Form::Var(if *v == from { to } else { *v }),
        Form::Not(inner) => Form::Not(Box::new(rename_form(inner, from, to))),
        Form::And(kids) => Form::And(kids.iter().map(|k| rename_form(k, from, to)).collect()),
        Form::Or(kids) => Form::Or(kids.iter().map(|k| rename_form(k, from, to)).collect()),
        Form::Exists(v, inner) => Form::Exists(*v, Box::new(rename_form(inner, from, to))),
        Form::Forall(vs, inner) => Form::Forall(
            vs.iter().map(|&v| if v == from { to } else { v }).collect(),
            Box::new(rename_form(inner, from, to)),
        ),
    }
}

#[test]
fn equisat_is_reflexive() {
    let (d, _, _, _) = fixtures::scoped_choice();
    let cfg = OracleConfig::default();
    assert!(equisat(&d, &d, &cfg).unwrap());
}

#[test]
fn equivalence_rejects_occurring_scope_mismatch() {
    // x universal in one formula, occurring free in the other: comparing the
    // Skolem sets is not meaningful
    let mut b1 = Builder::new();
    let x = b1.universal("x");
    let d1 = b1.finish(forall([x], var(x).or(nnot(var(x)))));
    let mut d2 = d1.clone();
    // the same table, but x loose and occurring
    let br = {
        let t = d2.graph.terminal(x);
        dqbfloc_core::Branch::plain(t)
    };
    d2.graph.set_root(br, dqbfloc_core::Annotation::new());
    let cfg = OracleConfig::default();
    match equivalent(&d1, &d2, &cfg) {
        Err(OracleError::VariableSetMismatch(v)) => assert_eq!(v, x),
        other => panic!("expected mismatch, got {:?}", other),
    }
}

#[test]
fn budget_error_reports_universe_size() {
    let mut b = Builder::new();
    let xs: Vec<VarId> = (0..3).map(|i| b.universal(&format!("x{}", i))).collect();
    let y1 = b.existential("y1", xs.iter().copied());
    let y2 = b.existential("y2", xs.iter().copied());
    let f = forall(
        xs.clone(),
        exists(y1, exists(y2, var(xs[0]).or(var(y1)).or(var(y2)))),
    );
    let d = b.finish(f);
    // universe = 2^(2^3) * 2^(2^3) = 2^16
    let cfg = OracleConfig { budget: 1 << 10 };
    match sem_def(&d, &cfg) {
        Err(OracleError::BudgetExceeded { universe, budget }) => {
            assert_eq!(universe, 1 << 16);
            assert_eq!(budget, 1 << 10);
        }
        other => panic!("expected budget error, got {:?}", other),
    }
}

#[test]
fn monotone_replacement_trials() {
    // random NNF formula, random positive-position subformula replacement:
    // whenever the whole formula flips 1 -> 0, the replaced subformula
    // flipped 1 -> 0 as well
    run_monotone_trials(1000, 0x11a);
}

pub fn run_monotone_trials(target: usize, seed0: u64) {
    use dqbfloc_core::generate::{random_assignment, random_nnf_formula};
    let mut hits = 0usize;
    let mut seed = seed0;
    while hits < target {
        seed += 1;
        let mut vt = dqbfloc_core::VarTable::new();
        let vars: Vec<VarId> = (0..4).map(|i| vt.add_free(format!("v{}", i))).collect();
        let (g, root) = random_nnf_formula(seed, &vars, 6);
        // choose a positive position: any edge of the graph (NNF keeps all
        // gate positions positive; negations sit on terminal edges)
        let edges = g.edges_below_node(root.target);
        if edges.is_empty() {
            continue;
        }
        let pos = edges[(seed as usize) % edges.len()];
        if g.edge(pos).negated {
            continue; // a negated literal edge is not a positive position
        }
        let phi1 = g.branch_of(pos);
        // build a replacement inside the same graph
        let (g2, phi2) = {
            let mut alt = g.clone();
            let (tmp_g, tmp_b) = random_nnf_formula(seed ^ 0xdead, &vars, 4);
            // import the replacement by rebuilding it into `alt`
            let b = import_branch(&tmp_g, tmp_b, &mut alt);
            (alt, b)
        };
        let mu = random_assignment(seed ^ 0xbeef, &vt);
        let val_phi = g.eval_branch(g.branch_of(g.root), &mu);
        let mut altg = g2.clone();
        altg.retarget(pos, phi2);
        if !altg.is_acyclic() {
            // hash-consing matched an ancestor of the position; the result
            // is not a formula, skip the trial
            continue;
        }
        let val_phi_prime = altg.eval_branch(altg.branch_of(altg.root), &mu);
        if !(val_phi && !val_phi_prime) {
            continue;
        }
        hits += 1;
        let v1 = g.eval_branch(phi1, &mu);
        let v2 = altg.eval_branch(phi2, &mu);
        assert!(v1, "seed {}: replaced subformula was false before", seed);
        assert!(!v2, "seed {}: replacement is true after", seed);
    }
}

fn import_branch(
    src: &dqbfloc_core::Graph,
    b: dqbfloc_core::Branch,
    dst: &mut dqbfloc_core::Graph,
) -> dqbfloc_core::Branch {
    use dqbfloc_core::NodeKind;
    let inner = match src.kind(b.target).clone() {
        NodeKind::Const(c) => dqbfloc_core::Branch::plain(dst.constant(c)),
        NodeKind::Terminal(v) => dqbfloc_core::Branch::plain(dst.terminal(v)),
        kind @ (NodeKind::And | NodeKind::Or) => {
            let kids: Vec<dqbfloc_core::Branch> = src
                .children(b.target)
                .iter()
                .map(|&c| import_branch(src, src.branch_of(c), dst))
                .collect();
            match kind {
                NodeKind::And => dst.mk_and(kids),
                _ => dst.mk_or(kids),
            }
        }
    };
    if b.negated {
        dqbfloc_core::Branch::new(inner.target, !inner.negated)
    } else {
        inner
    }
}

#[test]
fn candidate_enumeration_is_exact_and_duplicate_free() {
    let cfg = OracleConfig::default();
    let gen = GenConfig::default();
    for seed in 0..30u64 {
        let d = random_prenex(seed, &gen).to_dqbf();
        let cands: Vec<SkolemCandidate> = candidate_universe(&d, &cfg).unwrap().collect();
        let set: BTreeSet<&SkolemCandidate> = cands.iter().collect();
        assert_eq!(set.len(), cands.len(), "duplicates at seed {}", seed);
        let sem = sem_def(&d, &cfg).unwrap();
        assert_eq!(cands.len() as u128, sem.universe_size, "seed {}", seed);
        // supports respect the dependency sets
        let bound = d.bound_vars();
        for c in &cands {
            for (v, t) in &c.assignment {
                match d.vars.kind(*v) {
                    VarKind::Existential if bound.contains(v) => {
                        assert!(t
                            .support()
                            .iter()
                            .all(|s| d.vars.deps(*v).contains(s)));
                    }
                    _ => assert!(t.support().is_empty()),
                }
            }
        }
    }
}

#[test]
fn dump_lists_skolem_functions() {
    let (d, _x1, _x2, _y1) = fixtures::scoped_choice();
    let cfg = OracleConfig::default();
    let sem = sem_def(&d, &cfg).unwrap();
    let text = sem.dump(&d.vars);
    assert!(text.contains("1 of 4 candidates"));
    assert!(text.contains("y1 <- (x2):01"));
}

/// Candidate checks are read-only and safe to run concurrently on one
/// shared instance.
#[test]
fn concurrent_candidate_checks() {
    let (d, _, _, _) = fixtures::scoped_choice();
    let cfg = OracleConfig::default();
    let cands: Vec<SkolemCandidate> = candidate_universe(&d, &cfg).unwrap().collect();
    let sequential: Vec<bool> = cands.iter().map(|c| check_candidate(&d, c)).collect();
    let parallel: Vec<bool> = std::thread::scope(|s| {
        let handles: Vec<_> = cands
            .iter()
            .map(|c| s.spawn(|| check_candidate(&d, c)))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert_eq!(sequential, parallel);
}

/// The oracle decides annotated graphs directly; a prenex wrapper must agree
/// with its annotated twin.
#[test]
fn prenex_and_annotated_views_agree() {
    let gen = GenConfig::default();
    let cfg = OracleConfig::default();
    for seed in 200..230u64 {
        let p = random_prenex(seed, &gen);
        let via_prenex = is_sat(&p.to_dqbf(), &cfg).unwrap();
        let via_nnf = {
            let d: Dqbf = normalize_to_nnf(&p);
            is_sat(&d, &cfg).unwrap()
        };
        assert_eq!(via_prenex, via_nnf, "seed {}", seed);
    }
}
