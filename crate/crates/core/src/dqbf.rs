//! Instance wrappers: an annotated quantifier graph with its variable table,
//! and the closed prenex form used at the pipeline boundaries.

use std::collections::BTreeSet;

use crate::graph::{Annotation, Graph, NodeKind};
use crate::vars::{VarId, VarKind, VarTable};

/// A (possibly non-prenex) DQBF: quantifiers live on graph edges.
#[derive(Debug, Clone)]
pub struct Dqbf {
    pub vars: VarTable,
    pub graph: Graph,
}

impl Dqbf {
    /// Variables relevant to this formula: occurring at terminals, bound by
    /// an annotation, or mentioned in a dependency set of a bound existential.
    pub fn variable_universe(&self) -> BTreeSet<VarId> {
        let root = self.graph.edge(self.graph.root).target;
        let mut vs = self.graph.terminals_below_node(root);
        let mut bound = self.graph.bound_below_node(root);
        bound.extend(self.graph.edge(self.graph.root).ann.vars());
        for &v in &bound {
            if self.vars.kind(v) == VarKind::Existential {
                vs.extend(self.vars.deps(v).iter().copied());
            }
        }
        vs.extend(bound);
        vs
    }

    /// Variables bound by some annotation (root edge included).
    pub fn bound_vars(&self) -> BTreeSet<VarId> {
        let mut bound = self.graph.bound_below(self.graph.root);
        bound.extend(self.graph.edge(self.graph.root).ann.vars());
        bound
    }

    pub fn display(&self) -> String {
        self.graph.display_edge(self.graph.root, &self.vars)
    }
}

/// Closed prenex DQBF: an ordered prefix and an annotation-free matrix.
#[derive(Debug, Clone)]
pub struct PrenexDqbf {
    pub vars: VarTable,
    /// Universal entries first, then existential entries.
    pub prefix: Vec<VarId>,
    pub matrix: Graph,
}

impl PrenexDqbf {
    pub fn universals(&self) -> Vec<VarId> {
        self.prefix
            .iter()
            .copied()
            .filter(|&v| self.vars.kind(v) == VarKind::Universal)
            .collect()
    }

    pub fn existentials(&self) -> Vec<VarId> {
        self.prefix
            .iter()
            .copied()
            .filter(|&v| self.vars.kind(v) == VarKind::Existential)
            .collect()
    }

    /// The same instance as an annotated graph, prefix on the root edge.
    pub fn to_dqbf(&self) -> Dqbf {
        let mut graph = self.matrix.clone();
        let mut ann = Annotation::new();
        for &v in &self.prefix {
            match self.vars.kind(v) {
                VarKind::Universal => {
                    ann.foralls.insert(v);
                }
                VarKind::Existential => {
                    ann.exists.insert(v);
                }
                VarKind::Free => {}
            }
        }
        let b = graph.branch_of(graph.root);
        graph.set_root(b, ann);
        Dqbf {
            vars: self.vars.clone(),
            graph,
        }
    }

    /// Is the matrix a constant? Returns its value if so.
    pub fn constant_matrix(&self) -> Option<bool> {
        let d = self.matrix.edge(self.matrix.root);
        match self.matrix.kind(d.target) {
            NodeKind::Const(b) => Some(*b != d.negated),
            _ => None,
        }
    }

    pub fn display(&self) -> String {
        self.to_dqbf().display()
    }
}

/// Structural identity up to variable renumbering: prefixes must match in
/// kind and (mapped) dependency sets position by position, and the matrix
/// graphs must be isomorphic under the induced variable bijection.
pub fn structurally_equal(a: &PrenexDqbf, b: &PrenexDqbf) -> bool {
    if a.prefix.len() != b.prefix.len() {
        return false;
    }
    let mut map: std::collections::HashMap<VarId, VarId> = std::collections::HashMap::new();
    for (&va, &vb) in a.prefix.iter().zip(&b.prefix) {
        if a.vars.kind(va) != b.vars.kind(vb) {
            return false;
        }
        map.insert(va, vb);
    }
    for (&va, &vb) in a.prefix.iter().zip(&b.prefix) {
        let da: Option<BTreeSet<VarId>> = a
            .vars
            .deps(va)
            .iter()
            .map(|d| map.get(d).copied())
            .collect();
        match da {
            Some(da) if &da == b.vars.deps(vb) => {}
            _ => return false,
        }
    }
    iso_branch(
        a,
        b,
        a.matrix.branch_of(a.matrix.root),
        b.matrix.branch_of(b.matrix.root),
        &map,
    )
}

fn iso_branch(
    a: &PrenexDqbf,
    b: &PrenexDqbf,
    ba: crate::graph::Branch,
    bb: crate::graph::Branch,
    map: &std::collections::HashMap<VarId, VarId>,
) -> bool {
    if ba.negated != bb.negated {
        return false;
    }
    match (a.matrix.kind(ba.target), b.matrix.kind(bb.target)) {
        (NodeKind::Const(x), NodeKind::Const(y)) => x == y,
        (NodeKind::Terminal(va), NodeKind::Terminal(vb)) => map.get(va) == Some(vb),
        (NodeKind::And, NodeKind::And) | (NodeKind::Or, NodeKind::Or) => {
            let ca = a.matrix.children(ba.target);
            let cb = b.matrix.children(bb.target);
            if ca.len() != cb.len() {
                return false;
            }
            // children are ordered; compare as multisets via sorted rendering
            let mut keyed_a: Vec<(String, crate::graph::Branch)> = ca
                .iter()
                .map(|&e| {
                    let br = a.matrix.branch_of(e);
                    (render_key(a, br, map), br)
                })
                .collect();
            let mut keyed_b: Vec<(String, crate::graph::Branch)> = cb
                .iter()
                .map(|&e| {
                    let br = b.matrix.branch_of(e);
                    (render_ident(b, br), br)
                })
                .collect();
            keyed_a.sort_by(|l, r| l.0.cmp(&r.0));
            keyed_b.sort_by(|l, r| l.0.cmp(&r.0));
            keyed_a
                .iter()
                .zip(&keyed_b)
                .all(|((ka, bra), (kb, brb))| ka == kb && iso_branch(a, b, *bra, *brb, map))
        }
        _ => false,
    }
}

fn render_key(
    a: &PrenexDqbf,
    br: crate::graph::Branch,
    map: &std::collections::HashMap<VarId, VarId>,
) -> String {
    let neg = if br.negated { "~" } else { "" };
    match a.matrix.kind(br.target) {
        NodeKind::Const(x) => format!("{}c{}", neg, x),
        NodeKind::Terminal(v) => format!(
            "{}t{}",
            neg,
            map.get(v).map(|m| m.0).unwrap_or(u32::MAX)
        ),
        NodeKind::And => {
            let mut parts: Vec<String> = a
                .matrix
                .children(br.target)
                .iter()
                .map(|&e| render_key(a, a.matrix.branch_of(e), map))
                .collect();
            parts.sort();
            format!("{}&({})", neg, parts.join(","))
        }
        NodeKind::Or => {
            let mut parts: Vec<String> = a
                .matrix
                .children(br.target)
                .iter()
                .map(|&e| render_key(a, a.matrix.branch_of(e), map))
                .collect();
            parts.sort();
            format!("{}|({})", neg, parts.join(","))
        }
    }
}

fn render_ident(b: &PrenexDqbf, br: crate::graph::Branch) -> String {
    let neg = if br.negated { "~" } else { "" };
    match b.matrix.kind(br.target) {
        NodeKind::Const(x) => format!("{}c{}", neg, x),
        NodeKind::Terminal(v) => format!("{}t{}", neg, v.0),
        NodeKind::And => {
            let mut parts: Vec<String> = b
                .matrix
                .children(br.target)
                .iter()
                .map(|&e| render_ident(b, b.matrix.branch_of(e)))
                .collect();
            parts.sort();
            format!("{}&({})", neg, parts.join(","))
        }
        NodeKind::Or => {
            let mut parts: Vec<String> = b
                .matrix
                .children(br.target)
                .iter()
                .map(|&e| render_ident(b, b.matrix.branch_of(e)))
                .collect();
            parts.sort();
            format!("{}|({})", neg, parts.join(","))
        }
    }
}
