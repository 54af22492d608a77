//! Definitional CNF encoding of circuit matrices, so that simplified
//! non-CNF results can still be written as DQDIMACS.
//!
//! Every inner gate receives a fresh defining variable; the definition
//! clauses assert both implications. Defining variables are existential and
//! depend on every universal of the prefix, which keeps the encoding
//! equisatisfiable for DQBF.

use std::collections::HashMap;

use crate::dqbf::PrenexDqbf;
use crate::graph::{Annotation, Branch, Graph, NodeId, NodeKind};
use crate::vars::VarId;

/// Re-encodes the matrix as an AND of clauses. CNF-shaped input is returned
/// unchanged (up to graph reconstruction).
pub fn tseitin_encode(p: &PrenexDqbf) -> PrenexDqbf {
    if super::dqdimacs::write_dqdimacs(p).is_ok() {
        return p.clone();
    }
    let mut vars = p.vars.clone();
    let mut prefix = p.prefix.clone();
    let universals: Vec<VarId> = p.universals();

    let g = &p.matrix;
    let mut defs: HashMap<NodeId, VarId> = HashMap::new();
    let mut clauses: Vec<Vec<(VarId, bool)>> = Vec::new();
    let mut counter = 0usize;

    // assign defining variables bottom-up
    let mut order = g.topo_inner();
    order.reverse();
    for n in &order {
        counter += 1;
        let t = vars.add_existential(format!("t{}", counter), universals.iter().copied());
        prefix.push(t);
        defs.insert(*n, t);
    }

    let lit_of = |b: Branch, defs: &HashMap<NodeId, VarId>| -> Option<(VarId, bool)> {
        match g.kind(b.target) {
            NodeKind::Terminal(v) => Some((*v, b.negated)),
            NodeKind::Const(_) => None,
            _ => Some((defs[&b.target], b.negated)),
        }
    };

    for n in &order {
        let t = defs[n];
        let is_and = matches!(g.kind(*n), NodeKind::And);
        // AND: long clause t | ~c1 | ... ; OR: long clause ~t | c1 | ...
        let mut long: Vec<(VarId, bool)> = vec![(t, !is_and)];
        for &c in g.children(*n) {
            let cb = g.branch_of(c);
            match lit_of(cb, &defs) {
                Some((v, neg)) => {
                    // t -> child (AND) / child -> t (OR)
                    if is_and {
                        clauses.push(vec![(t, true), (v, neg)]);
                        long.push((v, !neg));
                    } else {
                        clauses.push(vec![(t, false), (v, !neg)]);
                        long.push((v, neg));
                    }
                }
                None => {
                    // constants were folded during construction; a residual
                    // constant child only weakens the long clause
                    let val = matches!(g.kind(cb.target), NodeKind::Const(true)) != cb.negated;
                    if val == is_and {
                        continue;
                    }
                    if is_and {
                        clauses.push(vec![(t, true)]);
                    } else {
                        clauses.push(vec![(t, false)]);
                    }
                }
            }
        }
        clauses.push(long);
    }

    let root = g.edge(g.root);
    let rb = Branch::new(root.target, root.negated);
    match g.kind(rb.target) {
        NodeKind::Const(b) => {
            if *b == rb.negated {
                clauses.push(vec![]); // constant false
            }
        }
        _ => {
            let (v, neg) = lit_of(rb, &defs).expect("non-constant root literal");
            clauses.push(vec![(v, neg)]);
        }
    }

    let mut matrix = Graph::new();
    let clause_branches: Vec<Branch> = clauses
        .into_iter()
        .map(|clause| {
            let lits: Vec<Branch> = clause
                .into_iter()
                .map(|(v, neg)| Branch::new(matrix.terminal(v), neg))
                .collect();
            matrix.mk_or(lits)
        })
        .collect();
    let root = matrix.mk_and(clause_branches);
    matrix.set_root(root, Annotation::new());
    PrenexDqbf {
        vars,
        prefix,
        matrix,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{var, Builder};
    use crate::io::dqdimacs::write_dqdimacs;
    use crate::oracle::{equisat, OracleConfig};

    #[test]
    fn terminal_matrix_stays_unit() {
        let mut b = Builder::new();
        let x = b.universal("x1");
        let p = b.finish_prenex(var(x).or(var(x)));
        let enc = tseitin_encode(&p);
        assert!(write_dqdimacs(&enc).is_ok());
    }

    #[test]
    fn unsat_conjunction_is_preserved() {
        // forall x1 x2 . (x1 & x2) is false
        let mut b = Builder::new();
        let x1 = b.universal("x1");
        let x2 = b.universal("x2");
        let p = b.finish_prenex(var(x1).and(var(x2)));
        let enc = tseitin_encode(&p);
        assert!(write_dqdimacs(&enc).is_ok());
        let cfg = OracleConfig::default();
        assert!(equisat(&p.to_dqbf(), &enc.to_dqbf(), &cfg).unwrap());
        assert!(!crate::oracle::is_sat(&enc.to_dqbf(), &cfg).unwrap());
    }

    #[test]
    fn non_cnf_matrix_becomes_cnf_and_stays_equisat() {
        // forall x1 x2 . exists y(x2) . ((x1 & x2) | (~x1 & y))
        let mut b = Builder::new();
        let x1 = b.universal("x1");
        let x2 = b.universal("x2");
        let y = b.existential("y", [x2]);
        let f = var(x1)
            .and(var(x2))
            .or(crate::formula::nnot(var(x1)).and(var(y)));
        let p = b.finish_prenex(f);
        assert!(write_dqdimacs(&p).is_err());
        let enc = tseitin_encode(&p);
        assert!(write_dqdimacs(&enc).is_ok());
        let cfg = OracleConfig::default();
        assert!(equisat(&p.to_dqbf(), &enc.to_dqbf(), &cfg).unwrap());
    }
}
