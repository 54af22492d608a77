//! Well-formedness of annotated quantifier graphs.
//!
//! The checks correspond to the syntax rules for non-prenex NNF formulas:
//! negations only at terminals, each quantifier binds a variable that is not
//! quantified again inside its scope, every occurrence of a bound variable is
//! inside the scope of a binder, dependency sets never mention variables
//! quantified inside the bound subformula, and a dependency on a bound
//! universal requires that universal's binder to lie on every path to the
//! existential's binder (the sibling-scope condition on conjunctions and
//! disjunctions).
//!
//! Copies of one variable pulled back onto parallel edges during elimination
//! share their id; parallel binders on disjoint paths are therefore accepted,
//! while two binders of one variable on a common root path are rejected.

use std::collections::BTreeSet;
use std::fmt;

use crate::dqbf::Dqbf;
use crate::graph::{EdgeId, Graph, NodeId, NodeKind};
use crate::vars::{VarId, VarKind, VarTable};

/// A violated syntax rule, with the place it was detected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Cyclic,
    /// Negated edge into a non-terminal node.
    NegationInside { edge: EdgeId },
    /// Annotation kind disagrees with the variable registry.
    AnnotationKindMismatch { edge: EdgeId, var: VarId },
    /// A free variable carries a quantifier somewhere.
    FreeVarBound { edge: EdgeId, var: VarId },
    /// An occurrence of a bound variable is reachable without passing a
    /// binder of that variable.
    UnscopedOccurrence { var: VarId },
    /// Two binders of one variable on a common root path.
    NestedRebinding { outer: EdgeId, inner: EdgeId, var: VarId },
    /// A dependency set mentions a variable quantified inside the bound
    /// subformula.
    DepSetBoundInside { edge: EdgeId, var: VarId, dep: VarId },
    /// A dependency on a bound universal whose binder does not dominate the
    /// existential's binder (e.g. the universal is quantified in a sibling).
    DepSetOutsideScope { edge: EdgeId, var: VarId, dep: VarId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cyclic => write!(f, "graph is cyclic"),
            Violation::NegationInside { edge } => {
                write!(f, "negation on inner edge {:?}", edge)
            }
            Violation::AnnotationKindMismatch { edge, var } => {
                write!(f, "annotation kind mismatch for {} at {:?}", var, edge)
            }
            Violation::FreeVarBound { edge, var } => {
                write!(f, "free variable {} bound at {:?}", var, edge)
            }
            Violation::UnscopedOccurrence { var } => {
                write!(f, "occurrence of bound variable {} outside binder scope", var)
            }
            Violation::NestedRebinding { outer, inner, var } => {
                write!(f, "{} bound at {:?} and again at {:?} on one path", var, outer, inner)
            }
            Violation::DepSetBoundInside { edge, var, dep } => {
                write!(f, "dependency {} of {} is quantified below its binder {:?}", dep, var, edge)
            }
            Violation::DepSetOutsideScope { edge, var, dep } => {
                write!(f, "dependency {} of {} is not in scope at binder {:?}", dep, var, edge)
            }
        }
    }
}

/// All binder edges of a variable (root edge included).
fn binders_of(g: &Graph, v: VarId) -> Vec<EdgeId> {
    let mut out = Vec::new();
    let root = g.root;
    if g.edge(root).ann.contains(v) {
        out.push(root);
    }
    let top = g.edge(root).target;
    for e in g.edges_below_node(top) {
        if g.edge(e).ann.contains(v) {
            out.push(e);
        }
    }
    out
}

/// Nodes reachable from the root without traversing any of `avoid`.
fn reachable_avoiding(g: &Graph, avoid: &BTreeSet<EdgeId>) -> BTreeSet<NodeId> {
    let mut seen = BTreeSet::new();
    if avoid.contains(&g.root) {
        return seen;
    }
    let mut stack = vec![g.edge(g.root).target];
    while let Some(n) = stack.pop() {
        if !seen.insert(n) {
            continue;
        }
        for &c in g.children(n) {
            if !avoid.contains(&c) {
                stack.push(g.edge(c).target);
            }
        }
    }
    seen
}

/// Checks derivability of the formula under the non-prenex NNF syntax rules.
/// Returns every violation found.
pub fn well_formed(d: &Dqbf) -> Result<(), Vec<Violation>> {
    well_formed_graph(&d.graph, &d.vars)
}

pub fn well_formed_graph(g: &Graph, vt: &VarTable) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if !g.is_acyclic() {
        return Err(vec![Violation::Cyclic]);
    }

    let top = g.edge(g.root).target;
    let mut all_edges = vec![g.root];
    all_edges.extend(g.edges_below_node(top));

    for &e in &all_edges {
        let d = g.edge(e);
        if d.negated && !matches!(g.kind(d.target), NodeKind::Terminal(_)) {
            out.push(Violation::NegationInside { edge: e });
        }
        for &v in &d.ann.foralls {
            if vt.kind(v) != VarKind::Universal {
                out.push(Violation::AnnotationKindMismatch { edge: e, var: v });
            }
        }
        for &v in &d.ann.exists {
            if vt.kind(v) != VarKind::Existential {
                out.push(Violation::AnnotationKindMismatch { edge: e, var: v });
            }
        }
    }

    // binder placement per variable
    let mut vars: BTreeSet<VarId> = g.terminals_below_node(top);
    for &e in &all_edges {
        vars.extend(g.edge(e).ann.vars());
    }
    for &v in &vars {
        let binders = binders_of(g, v);
        let is_bound_kind = matches!(vt.kind(v), VarKind::Universal | VarKind::Existential);
        if !is_bound_kind {
            if let Some(&e) = binders.first() {
                out.push(Violation::FreeVarBound { edge: e, var: v });
            }
            continue;
        }
        if binders.is_empty() {
            // bound-kind variable with no binder: fine only если treated free
            // (intermediate states); occurrences are unconstrained then.
            continue;
        }
        let avoid: BTreeSet<EdgeId> = binders.iter().copied().collect();
        let reach = reachable_avoiding(g, &avoid);
        let occurs_at: Vec<NodeId> = g
            .reachable()
            .into_iter()
            .filter(|&n| matches!(g.kind(n), NodeKind::Terminal(w) if *w == v))
            .collect();
        if occurs_at.iter().any(|n| reach.contains(n)) {
            out.push(Violation::UnscopedOccurrence { var: v });
        }
        for &b in &binders {
            let below: BTreeSet<EdgeId> = g.edges_below_node(g.edge(b).target).into_iter().collect();
            if let Some(&inner) = binders.iter().find(|&&b2| b2 != b && below.contains(&b2)) {
                out.push(Violation::NestedRebinding { outer: b, inner, var: v });
            }
        }
    }

    // dependency-set side conditions at each existential binder
    for &e in &all_edges {
        let ys: Vec<VarId> = g.edge(e).ann.exists.iter().copied().collect();
        for y in ys {
            let bound_inside = g.bound_below(e);
            for &x in vt.deps(y) {
                if bound_inside.contains(&x) || g.edge(e).ann.exists.contains(&x) {
                    out.push(Violation::DepSetBoundInside { edge: e, var: y, dep: x });
                    continue;
                }
                let xbinders = binders_of(g, x);
                if xbinders.is_empty() {
                    continue;
                }
                let avoid: BTreeSet<EdgeId> = xbinders.iter().copied().collect();
                if avoid.contains(&e) {
                    continue; // binder on the same edge; universals linearize first
                }
                let covered = match g.edge(e).source {
                    None => false, // root edge reachable with no edges at all
                    Some(src) => !reachable_avoiding(g, &avoid).contains(&src),
                };
                if !covered {
                    out.push(Violation::DepSetOutsideScope { edge: e, var: y, dep: x });
                }
            }
        }
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{exists, forall, nnot, var, Builder};

    #[test]
    fn example_scoped_choice_is_well_formed() {
        // forall x1 x2 . ((x1 <-> x2) | exists y1(x2). (x1 xor y1))
        let mut b = Builder::new();
        let x1 = b.universal("x1");
        let x2 = b.universal("x2");
        let y1 = b.existential("y1", [x2]);
        let f = forall(
            [x1, x2],
            var(x1).iff(var(x2)).or(exists(y1, var(x1).xor(var(y1)))),
        );
        let d = b.finish(f);
        well_formed(&d).unwrap();
    }

    #[test]
    fn dep_on_sibling_bound_universal_rejected() {
        // forall x1 . ((forall x2 . (x1 <-> x2)) | exists y1(x2). (x1 xor y1))
        let mut b = Builder::new();
        let x1 = b.universal("x1");
        let x2 = b.universal("x2");
        let y1 = b.existential("y1", [x2]);
        let f = forall(
            [x1],
            forall([x2], var(x1).iff(var(x2))).or(exists(y1, var(x1).xor(var(y1)))),
        );
        let d = b.finish(f);
        let errs = well_formed(&d).unwrap_err();
        assert!(errs
            .iter()
            .any(|v| matches!(v, Violation::DepSetOutsideScope { var, dep, .. } if *var == y1 && *dep == x2)));
    }

    #[test]
    fn single_terminal_ok() {
        let mut b = Builder::new();
        let x = b.free("x");
        let d = b.finish(var(x));
        well_formed(&d).unwrap();
    }

    #[test]
    fn bound_occurrence_outside_scope_rejected() {
        // (exists y(). y) & y  -- second occurrence escapes the binder
        let mut b = Builder::new();
        let y = b.existential("y", []);
        let f = exists(y, var(y)).and(var(y));
        let d = b.finish(f);
        let errs = well_formed(&d).unwrap_err();
        assert!(errs
            .iter()
            .any(|v| matches!(v, Violation::UnscopedOccurrence { var } if *var == y)));
    }

    #[test]
    fn nested_rebinding_rejected() {
        let mut b = Builder::new();
        let x = b.universal("x");
        let y = b.free("z");
        let f = forall([x], forall([x], var(x).or(var(y))).and(var(y)));
        let d = b.finish(f);
        let errs = well_formed(&d).unwrap_err();
        assert!(errs
            .iter()
            .any(|v| matches!(v, Violation::NestedRebinding { var, .. } if *var == x)));
    }

    #[test]
    fn negation_inside_rejected() {
        let mut b = Builder::new();
        let x = b.free("x");
        let y = b.free("y");
        let f = nnot(var(x).and(var(y)));
        let d = b.finish(f);
        let errs = well_formed(&d).unwrap_err();
        assert!(errs.iter().any(|v| matches!(v, Violation::NegationInside { .. })));
    }
}
