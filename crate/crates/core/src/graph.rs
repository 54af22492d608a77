//! Quantifier graph: a DAG of AND/OR nodes over literal terminals whose edges
//! carry quantifier annotations.
//!
//! Inner nodes hold an ordered child list (treated as a multiset by all
//! semantic operations; the order only makes output deterministic). Negation
//! lives on edges; after NNF normalization only edges into terminals may be
//! negated. Each edge carries a set of universally and a set of existentially
//! quantified variables; dependency sets live in the [`VarTable`].
//!
//! Constant true/false are distinguished leaf nodes so that elimination can
//! collapse subformulas to constants.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::vars::{VarId, VarKind, VarTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A target plus negation flag; an edge minus its annotation and wiring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Branch {
    pub target: NodeId,
    pub negated: bool,
}

impl Branch {
    pub fn new(target: NodeId, negated: bool) -> Self {
        Branch { target, negated }
    }

    pub fn plain(target: NodeId) -> Self {
        Branch {
            target,
            negated: false,
        }
    }
}

/// Set of quantified variables written on an edge.
///
/// Sets suffice because quantifiers of one kind commute and a universal and an
/// existential quantifier commute whenever the universal is not in the
/// existential's dependency set; a legal linear order is recovered by
/// [`linearize_prefix`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Annotation {
    pub foralls: BTreeSet<VarId>,
    pub exists: BTreeSet<VarId>,
}

impl Annotation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.foralls.is_empty() && self.exists.is_empty()
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.foralls.contains(&v) || self.exists.contains(&v)
    }

    pub fn remove(&mut self, v: VarId) -> bool {
        self.foralls.remove(&v) || self.exists.remove(&v)
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.foralls.iter().chain(self.exists.iter()).copied()
    }

    pub fn len(&self) -> usize {
        self.foralls.len() + self.exists.len()
    }

    pub fn union_with(&mut self, other: &Annotation) {
        self.foralls.extend(other.foralls.iter().copied());
        self.exists.extend(other.exists.iter().copied());
    }
}

/// Emits a legal linear quantifier order for an annotation set: all universal
/// variables first, then all existential ones, ascending ids within each kind.
/// Existential quantifiers can always be placed innermost, so this order is
/// legal for every annotation satisfying the dependency invariant.
pub fn linearize_prefix(ann: &Annotation, vt: &VarTable) -> Vec<VarId> {
    debug_assert!(ann.foralls.iter().all(|&x| !ann.exists.contains(&x)));
    // A universal left of an existential is fine both when it is in the
    // dependency set and when it is not; the reverse would require x ∉ D_y.
    let _ = vt;
    let mut out: Vec<VarId> = ann.foralls.iter().copied().collect();
    out.extend(ann.exists.iter().copied());
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    And,
    Or,
    Terminal(VarId),
    Const(bool),
}

impl NodeKind {
    pub fn is_inner(&self) -> bool {
        matches!(self, NodeKind::And | NodeKind::Or)
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    children: Vec<EdgeId>,
    parents: Vec<EdgeId>,
}

#[derive(Debug, Clone)]
pub struct EdgeData {
    pub source: Option<NodeId>,
    pub target: NodeId,
    pub negated: bool,
    pub ann: Annotation,
    dead: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CofactorError {
    #[error("quantifier annotation below the cofactored edge (edge {0:?})")]
    QuantifiedBelow(EdgeId),
}

type StrashKey = (bool, Vec<(NodeId, bool)>);

/// The graph arena. `root` is the edge whose subformula is the whole formula;
/// its annotation holds the not-yet-localized part of the prefix.
#[derive(Debug, Clone)]
pub struct Graph {
    nodes: Vec<Node>,
    edges: Vec<EdgeData>,
    pub root: EdgeId,
    const_nodes: [NodeId; 2],
    terminals: HashMap<VarId, NodeId>,
    strash: HashMap<StrashKey, NodeId>,
}

impl Default for Graph {
    fn default() -> Self {
        Self::new()
    }
}

impl Graph {
    /// Creates a graph whose formula is the constant true.
    pub fn new() -> Self {
        let mut g = Graph {
            nodes: Vec::new(),
            edges: Vec::new(),
            root: EdgeId(0),
            const_nodes: [NodeId(0), NodeId(1)],
            terminals: HashMap::new(),
            strash: HashMap::new(),
        };
        let f = g.push_node(NodeKind::Const(false));
        let t = g.push_node(NodeKind::Const(true));
        g.const_nodes = [f, t];
        g.root = g.push_edge(None, Branch::plain(t), Annotation::new());
        g
    }

    fn push_node(&mut self, kind: NodeKind) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            kind,
            children: Vec::new(),
            parents: Vec::new(),
        });
        id
    }

    fn push_edge(&mut self, source: Option<NodeId>, b: Branch, ann: Annotation) -> EdgeId {
        let id = EdgeId(self.edges.len() as u32);
        self.edges.push(EdgeData {
            source,
            target: b.target,
            negated: b.negated,
            ann,
            dead: false,
        });
        self.nodes[b.target.index()].parents.push(id);
        id
    }

    pub fn constant(&self, b: bool) -> NodeId {
        self.const_nodes[b as usize]
    }

    pub fn terminal(&mut self, v: VarId) -> NodeId {
        if let Some(&n) = self.terminals.get(&v) {
            return n;
        }
        let n = self.push_node(NodeKind::Terminal(v));
        self.terminals.insert(v, n);
        n
    }

    pub fn node(&self, n: NodeId) -> &Node {
        &self.nodes[n.index()]
    }

    pub fn edge(&self, e: EdgeId) -> &EdgeData {
        &self.edges[e.index()]
    }

    pub(crate) fn edge_mut(&mut self, e: EdgeId) -> &mut EdgeData {
        &mut self.edges[e.index()]
    }

    pub fn kind(&self, n: NodeId) -> &NodeKind {
        &self.nodes[n.index()].kind
    }

    pub fn children(&self, n: NodeId) -> &[EdgeId] {
        &self.nodes[n.index()].children
    }

    /// Incoming edges of a node; includes the root edge for the root node.
    pub fn parents(&self, n: NodeId) -> &[EdgeId] {
        &self.nodes[n.index()].parents
    }

    pub fn branch_of(&self, e: EdgeId) -> Branch {
        let d = self.edge(e);
        Branch::new(d.target, d.negated)
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Replaces the whole formula.
    pub fn set_root(&mut self, b: Branch, ann: Annotation) {
        let root = self.root;
        self.detach_target(root);
        let d = self.edge_mut(root);
        d.target = b.target;
        d.negated = b.negated;
        d.ann = ann;
        self.nodes[b.target.index()].parents.push(root);
    }

    fn detach_target(&mut self, e: EdgeId) {
        let t = self.edges[e.index()].target;
        self.nodes[t.index()].parents.retain(|&p| p != e);
    }

    /// Retargets an edge onto a new subformula, keeping its annotation.
    pub fn retarget(&mut self, e: EdgeId, b: Branch) {
        self.detach_target(e);
        let d = self.edge_mut(e);
        d.target = b.target;
        d.negated = b.negated;
        self.nodes[b.target.index()].parents.push(e);
    }

    /// Moves an edge under a different target node (used when splitting a
    /// gate's incoming edges). Annotation and negation stay with the edge.
    pub fn redirect_incoming(&mut self, e: EdgeId, new_target: NodeId) {
        self.detach_target(e);
        self.edge_mut(e).target = new_target;
        self.nodes[new_target.index()].parents.push(e);
    }

    pub(crate) fn remove_child_edge(&mut self, parent: NodeId, e: EdgeId) {
        self.nodes[parent.index()].children.retain(|&c| c != e);
        self.detach_target(e);
        self.edges[e.index()].dead = true;
    }

    /// Replaces `n` by a constant: all incoming edges are retargeted, with
    /// their negation folded into the constant. Annotations stay on the
    /// edges.
    pub(crate) fn replace_node_with_const(&mut self, n: NodeId, b: bool) {
        for e in self.nodes[n.index()].parents.clone() {
            let neg = self.edge(e).negated;
            let c = self.constant(b != neg);
            self.retarget(e, Branch::plain(c));
        }
    }

    /// Contracts a gate with exactly one remaining child into its incoming
    /// edges: negations are folded and annotation sets are unioned.
    pub(crate) fn contract_single_child(&mut self, n: NodeId) {
        debug_assert_eq!(self.nodes[n.index()].children.len(), 1);
        let ce = self.nodes[n.index()].children[0];
        let (ct, cneg, cann) = {
            let d = self.edge(ce);
            (d.target, d.negated, d.ann.clone())
        };
        for e in self.nodes[n.index()].parents.clone() {
            let neg = self.edge(e).negated;
            self.retarget(e, Branch::new(ct, cneg != neg));
            self.edge_mut(e).ann.union_with(&cann);
        }
        self.remove_child_edge(n, ce);
    }

    /// Creates a fresh inner node with the given children.
    pub fn new_inner(&mut self, kind: NodeKind, kids: Vec<(Branch, Annotation)>) -> NodeId {
        debug_assert!(kind.is_inner());
        let n = self.push_node(kind);
        for (b, ann) in kids {
            let e = self.push_edge(Some(n), b, ann);
            self.nodes[n.index()].children.push(e);
        }
        n
    }

    /// Moves the child edges at positions `idxs` of `g` under a fresh node of
    /// the same kind and wires that node in as a child of `g` where the first
    /// moved edge used to sit. Returns the new node and the edge `g -> new`.
    pub fn group_children(&mut self, g: NodeId, idxs: &[usize]) -> (NodeId, EdgeId) {
        debug_assert!(idxs.len() >= 2);
        debug_assert!(idxs.windows(2).all(|w| w[0] < w[1]));
        let kind = self.nodes[g.index()].kind.clone();
        let sub = self.push_node(kind);
        let moved: Vec<EdgeId> = idxs.iter().map(|&i| self.nodes[g.index()].children[i]).collect();
        for &e in &moved {
            self.edges[e.index()].source = Some(sub);
            self.nodes[sub.index()].children.push(e);
        }
        let link = self.push_edge(Some(g), Branch::plain(sub), Annotation::new());
        let first = idxs[0];
        let kids = &mut self.nodes[g.index()].children;
        kids[first] = link;
        let rest: BTreeSet<usize> = idxs[1..].iter().copied().collect();
        let mut keep = Vec::with_capacity(kids.len() - rest.len());
        for (i, &c) in kids.iter().enumerate() {
            if !rest.contains(&i) {
                keep.push(c);
            }
        }
        self.nodes[g.index()].children = keep;
        (sub, link)
    }

    /// Replaces the child edge `e` of `parent` by the children of its target
    /// gate, in place (macrogate merge). The target must be an unshared,
    /// unnegated, unannotated gate of the same kind.
    pub fn splice_child(&mut self, parent: NodeId, e: EdgeId) {
        let d = self.edge(e);
        let t = d.target;
        debug_assert!(d.ann.is_empty() && !d.negated);
        debug_assert_eq!(self.nodes[t.index()].kind, self.nodes[parent.index()].kind);
        debug_assert_eq!(self.nodes[t.index()].parents.len(), 1);
        let grandkids: Vec<EdgeId> = std::mem::take(&mut self.nodes[t.index()].children);
        for &gk in &grandkids {
            self.edges[gk.index()].source = Some(parent);
        }
        let pos = self.nodes[parent.index()]
            .children
            .iter()
            .position(|&c| c == e)
            .expect("edge is a child of parent");
        self.nodes[parent.index()]
            .children
            .splice(pos..pos + 1, grandkids);
        self.detach_target(e);
        self.edges[e.index()].dead = true;
    }

    /// Clones a node together with fresh copies of its child edges (shared
    /// child subgraphs). Incoming edges are untouched.
    pub fn clone_gate(&mut self, g: NodeId) -> NodeId {
        let kind = self.nodes[g.index()].kind.clone();
        let kids: Vec<(Branch, Annotation)> = self.nodes[g.index()]
            .children
            .iter()
            .map(|&c| {
                let d = &self.edges[c.index()];
                (Branch::new(d.target, d.negated), d.ann.clone())
            })
            .collect();
        self.new_inner(kind, kids)
    }

    // ------------------------------------------------------------------
    // Hashed construction with constant folding
    // ------------------------------------------------------------------

    fn strash_key(&self, is_and: bool, kids: &[Branch]) -> StrashKey {
        let mut v: Vec<(NodeId, bool)> = kids.iter().map(|b| (b.target, b.negated)).collect();
        v.sort_unstable();
        (is_and, v)
    }

    fn strash_valid(&self, n: NodeId, key: &StrashKey) -> bool {
        let node = &self.nodes[n.index()];
        let is_and = matches!(node.kind, NodeKind::And);
        if matches!(node.kind, NodeKind::And | NodeKind::Or) && is_and == key.0 {
            let mut have: Vec<(NodeId, bool)> = Vec::with_capacity(node.children.len());
            for &c in &node.children {
                let d = &self.edges[c.index()];
                if !d.ann.is_empty() || d.dead {
                    return false;
                }
                have.push((d.target, d.negated));
            }
            have.sort_unstable();
            have == key.1
        } else {
            false
        }
    }

    fn mk(&mut self, is_and: bool, kids: Vec<Branch>) -> Branch {
        let (absorbing, neutral) = (self.constant(!is_and), self.constant(is_and));
        let mut seen: BTreeSet<(NodeId, bool)> = BTreeSet::new();
        let mut out: Vec<Branch> = Vec::with_capacity(kids.len());
        for mut k in kids {
            // fold a negated constant into the opposite constant
            if let NodeKind::Const(b) = self.nodes[k.target.index()].kind {
                k = Branch::plain(self.constant(b != k.negated));
            }
            if k.target == neutral {
                continue;
            }
            if k.target == absorbing {
                return Branch::plain(absorbing);
            }
            if seen.contains(&(k.target, !k.negated)) {
                // complementary pair: x AND !x / x OR !x
                return Branch::plain(absorbing);
            }
            if seen.insert((k.target, k.negated)) {
                out.push(k);
            }
        }
        match out.len() {
            0 => Branch::plain(neutral),
            1 => out[0],
            _ => {
                let key = self.strash_key(is_and, &out);
                if let Some(&n) = self.strash.get(&key) {
                    if self.strash_valid(n, &key) {
                        return Branch::plain(n);
                    }
                }
                let kind = if is_and { NodeKind::And } else { NodeKind::Or };
                let n = self.new_inner(kind, out.into_iter().map(|b| (b, Annotation::new())).collect());
                self.strash.insert(key, n);
                Branch::plain(n)
            }
        }
    }

    /// Conjunction with constant folding, duplicate and complement collapse,
    /// and structural hashing. A single surviving child is returned directly.
    pub fn mk_and(&mut self, kids: Vec<Branch>) -> Branch {
        self.mk(true, kids)
    }

    /// Disjunction; dual of [`Graph::mk_and`].
    pub fn mk_or(&mut self, kids: Vec<Branch>) -> Branch {
        self.mk(false, kids)
    }

    // ------------------------------------------------------------------
    // Reachability and orders
    // ------------------------------------------------------------------

    /// Nodes reachable from the root edge, in deterministic preorder.
    pub fn reachable(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::new();
        let mut stack = vec![self.edge(self.root).target];
        while let Some(n) = stack.pop() {
            if seen[n.index()] {
                continue;
            }
            seen[n.index()] = true;
            order.push(n);
            for &c in self.nodes[n.index()].children.iter().rev() {
                stack.push(self.edges[c.index()].target);
            }
        }
        order
    }

    pub fn is_reachable(&self, n: NodeId) -> bool {
        self.reachable().contains(&n)
    }

    /// Number of live (reachable) nodes, constants excluded.
    pub fn live_node_count(&self) -> usize {
        self.reachable()
            .iter()
            .filter(|&&n| !matches!(self.nodes[n.index()].kind, NodeKind::Const(_)))
            .count()
    }

    /// Reachable inner nodes, parents before children (root gate first).
    pub fn topo_inner(&self) -> Vec<NodeId> {
        let reach = self.reachable();
        let mut indeg: HashMap<NodeId, usize> = HashMap::new();
        for &n in &reach {
            indeg.entry(n).or_insert(0);
            for &c in &self.nodes[n.index()].children {
                *indeg.entry(self.edges[c.index()].target).or_insert(0) += 1;
            }
        }
        let mut ready: Vec<NodeId> = vec![self.edge(self.root).target];
        let mut out = Vec::new();
        let mut seen: BTreeSet<NodeId> = BTreeSet::new();
        while let Some(n) = ready.pop() {
            if !seen.insert(n) {
                continue;
            }
            if self.nodes[n.index()].kind.is_inner() {
                out.push(n);
            }
            for &c in self.nodes[n.index()].children.iter().rev() {
                let t = self.edges[c.index()].target;
                let d = indeg.get_mut(&t).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(t);
                }
            }
        }
        out
    }

    /// Detects cycles (a well-formed graph has none).
    pub fn is_acyclic(&self) -> bool {
        // colors: 0 unvisited, 1 on stack, 2 done
        let mut color = vec![0u8; self.nodes.len()];
        fn visit(g: &Graph, n: NodeId, color: &mut [u8]) -> bool {
            match color[n.index()] {
                1 => return false,
                2 => return true,
                _ => {}
            }
            color[n.index()] = 1;
            for &c in &g.nodes[n.index()].children {
                if !visit(g, g.edges[c.index()].target, color) {
                    return false;
                }
            }
            color[n.index()] = 2;
            true
        }
        visit(self, self.edge(self.root).target, &mut color)
    }

    // ------------------------------------------------------------------
    // Variable sets
    // ------------------------------------------------------------------

    /// Variables occurring at terminals in the subtree of `n` (inclusive).
    pub fn terminals_below_node(&self, n: NodeId) -> BTreeSet<VarId> {
        let mut memo: HashMap<NodeId, BTreeSet<VarId>> = HashMap::new();
        self.terminals_rec(n, &mut memo);
        memo.remove(&n).unwrap()
    }

    fn terminals_rec(&self, n: NodeId, memo: &mut HashMap<NodeId, BTreeSet<VarId>>) {
        if memo.contains_key(&n) {
            return;
        }
        let mut set = BTreeSet::new();
        match &self.nodes[n.index()].kind {
            NodeKind::Terminal(v) => {
                set.insert(*v);
            }
            NodeKind::Const(_) => {}
            _ => {
                for &c in &self.nodes[n.index()].children {
                    let t = self.edges[c.index()].target;
                    self.terminals_rec(t, memo);
                    set.extend(memo[&t].iter().copied());
                }
            }
        }
        memo.insert(n, set);
    }

    /// Variables occurring at terminals below an edge.
    pub fn terminals_below(&self, e: EdgeId) -> BTreeSet<VarId> {
        self.terminals_below_node(self.edge(e).target)
    }

    /// Does `v` occur at a terminal below this edge?
    pub fn occurs_below(&self, e: EdgeId, v: VarId) -> bool {
        self.occurs_below_node(self.edge(e).target, v)
    }

    pub fn occurs_below_node(&self, n: NodeId, v: VarId) -> bool {
        let mut stack = vec![n];
        let mut seen: BTreeSet<NodeId> = BTreeSet::new();
        while let Some(m) = stack.pop() {
            if !seen.insert(m) {
                continue;
            }
            match &self.nodes[m.index()].kind {
                NodeKind::Terminal(w) if *w == v => return true,
                _ => {
                    for &c in &self.nodes[m.index()].children {
                        stack.push(self.edges[c.index()].target);
                    }
                }
            }
        }
        false
    }

    /// Variables bound by annotations strictly below an edge (the edge's own
    /// annotation is not included).
    pub fn bound_below(&self, e: EdgeId) -> BTreeSet<VarId> {
        self.bound_below_node(self.edge(e).target)
    }

    pub fn bound_below_node(&self, n: NodeId) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        let mut stack = vec![n];
        let mut seen: BTreeSet<NodeId> = BTreeSet::new();
        while let Some(m) = stack.pop() {
            if !seen.insert(m) {
                continue;
            }
            for &c in &self.nodes[m.index()].children {
                let d = &self.edges[c.index()];
                out.extend(d.ann.vars());
                stack.push(d.target);
            }
        }
        out
    }

    /// All edges in the subtree of `n`, including edges of shared nodes once.
    pub fn edges_below_node(&self, n: NodeId) -> Vec<EdgeId> {
        let mut out = Vec::new();
        let mut stack = vec![n];
        let mut seen: BTreeSet<NodeId> = BTreeSet::new();
        while let Some(m) = stack.pop() {
            if !seen.insert(m) {
                continue;
            }
            for &c in self.nodes[m.index()].children.iter().rev() {
                out.push(c);
                stack.push(self.edges[c.index()].target);
            }
        }
        out
    }

    /// Existential variables bound strictly below an edge.
    pub fn existentials_below(&self, e: EdgeId, vt: &VarTable) -> BTreeSet<VarId> {
        self.bound_below(e)
            .into_iter()
            .filter(|&v| vt.kind(v) == VarKind::Existential)
            .collect()
    }

    /// `var` of the subformula rooted at this edge, annotation included:
    /// occurring variables plus everything bound at or below the edge.
    pub fn subformula_vars(&self, e: EdgeId) -> BTreeSet<VarId> {
        let mut s = self.terminals_below(e);
        s.extend(self.edge(e).ann.vars());
        s.extend(self.bound_below(e));
        s
    }

    /// The three variable sets of the subformula at an edge, computed
    /// bottom-up: existential, universal, and free-support variables.
    pub fn var_partition(&self, e: EdgeId) -> VarPartition {
        let mut memo: HashMap<NodeId, VarPartition> = HashMap::new();
        self.partition_node(self.edge(e).target, &mut memo);
        let base = memo[&self.edge(e).target].clone();
        Self::partition_apply_ann(base, &self.edge(e).ann)
    }

    fn partition_node(&self, n: NodeId, memo: &mut HashMap<NodeId, VarPartition>) {
        if memo.contains_key(&n) {
            return;
        }
        let mut p = VarPartition::default();
        match &self.nodes[n.index()].kind {
            NodeKind::Terminal(v) => {
                p.free_supp.insert(*v);
            }
            NodeKind::Const(_) => {}
            _ => {
                for &c in &self.nodes[n.index()].children {
                    let d = &self.edges[c.index()];
                    self.partition_node(d.target, memo);
                    let sub = Self::partition_apply_ann(memo[&d.target].clone(), &d.ann);
                    p.exists.extend(sub.exists);
                    p.foralls.extend(sub.foralls);
                    p.free_supp.extend(sub.free_supp);
                }
            }
        }
        memo.insert(n, p);
    }

    fn partition_apply_ann(mut p: VarPartition, ann: &Annotation) -> VarPartition {
        for &v in &ann.exists {
            p.exists.insert(v);
            p.free_supp.remove(&v);
        }
        for &v in &ann.foralls {
            p.foralls.insert(v);
            p.free_supp.remove(&v);
        }
        p
    }

    // ------------------------------------------------------------------
    // Cofactor
    // ------------------------------------------------------------------

    /// Cofactor of the (quantifier-free) subformula at `e` with `v := c`.
    /// The result is a hash-consed, constant-propagated subgraph; the input
    /// graph is not modified apart from new nodes.
    pub fn cofactor(&mut self, e: EdgeId, v: VarId, c: bool) -> Result<Branch, CofactorError> {
        let d = self.edge(e);
        if let Some(below) = self
            .edges_below_node(d.target)
            .into_iter()
            .find(|&be| !self.edge(be).ann.is_empty())
        {
            return Err(CofactorError::QuantifiedBelow(below));
        }
        let b = Branch::new(d.target, d.negated);
        Ok(self.cofactor_branch(b, v, c))
    }

    /// Cofactor of a quantifier-free branch (no annotation check).
    pub fn cofactor_branch(&mut self, b: Branch, v: VarId, c: bool) -> Branch {
        let mut memo: HashMap<NodeId, Branch> = HashMap::new();
        let inner = self.cofactor_node(b.target, v, c, &mut memo);
        self.apply_neg(inner, b.negated)
    }

    fn apply_neg(&mut self, b: Branch, neg: bool) -> Branch {
        if !neg {
            return b;
        }
        if let NodeKind::Const(k) = self.nodes[b.target.index()].kind {
            return Branch::plain(self.constant(!k != b.negated));
        }
        Branch::new(b.target, !b.negated)
    }

    fn cofactor_node(
        &mut self,
        n: NodeId,
        v: VarId,
        c: bool,
        memo: &mut HashMap<NodeId, Branch>,
    ) -> Branch {
        if let Some(&b) = memo.get(&n) {
            return b;
        }
        let out = match self.nodes[n.index()].kind.clone() {
            NodeKind::Terminal(w) if w == v => Branch::plain(self.constant(c)),
            NodeKind::Terminal(_) | NodeKind::Const(_) => Branch::plain(n),
            kind @ (NodeKind::And | NodeKind::Or) => {
                let kids: Vec<Branch> = self.nodes[n.index()]
                    .children
                    .clone()
                    .into_iter()
                    .map(|ce| {
                        let (t, neg) = {
                            let d = &self.edges[ce.index()];
                            (d.target, d.negated)
                        };
                        let sub = self.cofactor_node(t, v, c, memo);
                        self.apply_neg(sub, neg)
                    })
                    .collect();
                match kind {
                    NodeKind::And => self.mk_and(kids),
                    _ => self.mk_or(kids),
                }
            }
        };
        memo.insert(n, out);
        out
    }

    /// Rebuilds the subtree under `e`, replacing terminal occurrences of
    /// `old` by `new`. Only nodes containing `old` are cloned; shared nodes
    /// without `old` stay shared. Dependency sets of existential variables
    /// bound in the subtree are updated as well.
    pub fn rename_below(&mut self, e: EdgeId, old: VarId, new: VarId, vt: &mut VarTable) {
        // dependency sets first: binders stay where they are
        for be in self.edges_below_node(self.edge(e).target) {
            let bound: Vec<VarId> = self.edge(be).ann.exists.iter().copied().collect();
            for y in bound {
                vt.rename_dep(y, old, new);
            }
        }
        let ys: Vec<VarId> = self.edge(e).ann.exists.iter().copied().collect();
        for y in ys {
            vt.rename_dep(y, old, new);
        }
        let mut memo: HashMap<NodeId, NodeId> = HashMap::new();
        let t = self.edge(e).target;
        let nt = self.rename_node(t, old, new, &mut memo);
        if nt != t {
            let neg = self.edge(e).negated;
            self.retarget(e, Branch::new(nt, neg));
        }
    }

    fn rename_node(
        &mut self,
        n: NodeId,
        old: VarId,
        new: VarId,
        memo: &mut HashMap<NodeId, NodeId>,
    ) -> NodeId {
        if let Some(&m) = memo.get(&n) {
            return m;
        }
        let out = match self.nodes[n.index()].kind.clone() {
            NodeKind::Terminal(w) if w == old => self.terminal(new),
            NodeKind::Terminal(_) | NodeKind::Const(_) => n,
            kind @ (NodeKind::And | NodeKind::Or) => {
                if !self.occurs_below_node(n, old) {
                    n
                } else {
                    let kids: Vec<(Branch, Annotation)> = self.nodes[n.index()]
                        .children
                        .clone()
                        .into_iter()
                        .map(|ce| {
                            let (t, neg, ann) = {
                                let d = &self.edges[ce.index()];
                                (d.target, d.negated, d.ann.clone())
                            };
                            let nt = self.rename_node(t, old, new, memo);
                            (Branch::new(nt, neg), ann)
                        })
                        .collect();
                    self.new_inner(kind, kids)
                }
            }
        };
        memo.insert(n, out);
        out
    }

    // ------------------------------------------------------------------
    // Evaluation and printing
    // ------------------------------------------------------------------

    /// Evaluates the matrix under a total assignment, ignoring annotations.
    pub fn eval(&self, assign: &HashMap<VarId, bool>) -> bool {
        self.eval_branch(self.branch_of(self.root), assign)
    }

    pub fn eval_branch(&self, b: Branch, assign: &HashMap<VarId, bool>) -> bool {
        let raw = match &self.nodes[b.target.index()].kind {
            NodeKind::Const(k) => *k,
            NodeKind::Terminal(v) => *assign.get(v).copied().get_or_insert(false),
            NodeKind::And => self.nodes[b.target.index()]
                .children
                .iter()
                .all(|&c| self.eval_branch(self.branch_of(c), assign)),
            NodeKind::Or => self.nodes[b.target.index()]
                .children
                .iter()
                .any(|&c| self.eval_branch(self.branch_of(c), assign)),
        };
        raw != b.negated
    }

    /// Child indices from the root to `e` along first-parent links, for
    /// receipts. Best effort on shared nodes.
    pub fn path_of(&self, e: EdgeId) -> Vec<u32> {
        let mut path = Vec::new();
        let mut cur = e;
        loop {
            let d = self.edge(cur);
            match d.source {
                None => break,
                Some(src) => {
                    let idx = self.nodes[src.index()]
                        .children
                        .iter()
                        .position(|&c| c == cur)
                        .unwrap_or(0);
                    path.push(idx as u32);
                    match self.nodes[src.index()].parents.first() {
                        Some(&p) => cur = p,
                        None => break,
                    }
                }
            }
        }
        path.reverse();
        path
    }

    /// Renders the subformula at an edge, annotations included. Annotated
    /// edges are bracketed to make the binding scope unambiguous.
    pub fn display_edge(&self, e: EdgeId, vt: &VarTable) -> String {
        let mut s = String::new();
        let d = self.edge(e);
        for v in linearize_prefix(&d.ann, vt) {
            match vt.kind(v) {
                VarKind::Universal => {
                    let _ = write!(s, "forall {} . ", vt.name(v));
                }
                _ => {
                    let deps: Vec<&str> = vt.deps(v).iter().map(|&d| vt.name(d)).collect();
                    let _ = write!(s, "exists {}({}) . ", vt.name(v), deps.join(","));
                }
            }
        }
        if d.negated {
            s.push('~');
        }
        s.push_str(&self.display_node(d.target, vt));
        if d.ann.is_empty() {
            s
        } else {
            format!("[{}]", s)
        }
    }

    fn display_node(&self, n: NodeId, vt: &VarTable) -> String {
        match &self.nodes[n.index()].kind {
            NodeKind::Const(b) => if *b { "true" } else { "false" }.to_string(),
            NodeKind::Terminal(v) => vt.name(*v).to_string(),
            kind @ (NodeKind::And | NodeKind::Or) => {
                let op = if matches!(kind, NodeKind::And) { " & " } else { " | " };
                let parts: Vec<String> = self.nodes[n.index()]
                    .children
                    .iter()
                    .map(|&c| self.display_edge(c, vt))
                    .collect();
                format!("({})", parts.join(op))
            }
        }
    }

    /// Structural consistency of the arenas: child/parent wiring agrees,
    /// sources are correct, the graph is acyclic.
    pub fn check_integrity(&self) -> Result<(), String> {
        if !self.is_acyclic() {
            return Err("graph is cyclic".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                let d = &self.edges[c.index()];
                if d.dead {
                    return Err(format!("node {} holds dead edge {:?}", i, c));
                }
                if d.source != Some(NodeId(i as u32)) {
                    return Err(format!("edge {:?} source mismatch at node {}", c, i));
                }
                if !self.nodes[d.target.index()].parents.contains(&c) {
                    return Err(format!("edge {:?} missing from target parents", c));
                }
            }
            for &p in &node.parents {
                let d = &self.edges[p.index()];
                if d.target != NodeId(i as u32) {
                    return Err(format!("parent edge {:?} of node {} target mismatch", p, i));
                }
            }
            if node.kind.is_inner() && node.children.is_empty() {
                return Err(format!("inner node {} has no children", i));
            }
        }
        let rd = self.edge(self.root);
        if rd.source.is_some() {
            return Err("root edge has a source".into());
        }
        Ok(())
    }
}

/// The classified variable sets of a subformula.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarPartition {
    pub exists: BTreeSet<VarId>,
    pub foralls: BTreeSet<VarId>,
    pub free_supp: BTreeSet<VarId>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (VarTable, Graph, VarId, VarId) {
        let mut vt = VarTable::new();
        let x = vt.add_universal("x");
        let y = vt.add_existential("y", [x]);
        (vt, Graph::new(), x, y)
    }

    #[test]
    fn mk_and_folds_constants_and_complements() {
        let (_vt, mut g, x, y) = setup();
        let tx = g.terminal(x);
        let ty = g.terminal(y);
        let t = g.constant(true);
        let f = g.constant(false);

        let a = g.mk_and(vec![Branch::plain(tx), Branch::plain(t)]);
        assert_eq!(a, Branch::plain(tx));
        let b = g.mk_and(vec![Branch::plain(tx), Branch::plain(f)]);
        assert_eq!(b, Branch::plain(f));
        let c = g.mk_or(vec![Branch::plain(tx), Branch::new(tx, true)]);
        assert_eq!(c, Branch::plain(t));
        let d = g.mk_and(vec![Branch::plain(tx), Branch::plain(tx), Branch::plain(ty)]);
        assert_eq!(g.children(d.target).len(), 2);
    }

    #[test]
    fn strash_merges_equal_nodes() {
        let (_vt, mut g, x, y) = setup();
        let tx = g.terminal(x);
        let ty = g.terminal(y);
        let a = g.mk_and(vec![Branch::plain(tx), Branch::new(ty, true)]);
        let b = g.mk_and(vec![Branch::new(ty, true), Branch::plain(tx)]);
        assert_eq!(a, b);
    }

    #[test]
    fn cofactor_replaces_and_propagates() {
        // (x & y) | (~x & ~y), cofactor y=1 -> x
        let (_vt, mut g, x, y) = setup();
        let tx = g.terminal(x);
        let ty = g.terminal(y);
        let a = g.mk_and(vec![Branch::plain(tx), Branch::plain(ty)]);
        let b = g.mk_and(vec![Branch::new(tx, true), Branch::new(ty, true)]);
        let o = g.mk_or(vec![a, b]);
        g.set_root(o, Annotation::new());
        let cof = g.cofactor(g.root, y, true).unwrap();
        assert_eq!(cof, Branch::plain(tx));
        let cof0 = g.cofactor(g.root, y, false).unwrap();
        assert_eq!(cof0, Branch::new(tx, true));
        // no occurrence: unchanged
        let (mut vt2, _, _, _) = {
            let s = setup();
            (s.0, s.1, s.2, s.3)
        };
        let z = vt2.add_universal("z");
        let cofz = g.cofactor(g.root, z, true).unwrap();
        assert_eq!(cofz, o);
    }

    #[test]
    fn cofactor_rejects_quantified_subformula() {
        let (_vt, mut g, x, y) = setup();
        let tx = g.terminal(x);
        let ty = g.terminal(y);
        let inner = g.new_inner(
            NodeKind::And,
            vec![(Branch::plain(tx), Annotation::new()), (Branch::plain(ty), {
                let mut a = Annotation::new();
                a.exists.insert(y);
                a
            })],
        );
        g.set_root(Branch::plain(inner), Annotation::new());
        assert!(matches!(
            g.cofactor(g.root, x, false),
            Err(CofactorError::QuantifiedBelow(_))
        ));
    }

    #[test]
    fn var_partition_of_scoped_exists() {
        // exists y(x): (x != y) has (V_e, V_a, V_fs) = ({y}, {}, {x})
        let (_vt, mut g, x, y) = setup();
        let tx = g.terminal(x);
        let ty = g.terminal(y);
        let l = g.mk_and(vec![Branch::new(tx, true), Branch::plain(ty)]);
        let r = g.mk_and(vec![Branch::plain(tx), Branch::new(ty, true)]);
        let xor = g.mk_or(vec![l, r]);
        let mut ann = Annotation::new();
        ann.exists.insert(y);
        g.set_root(xor, ann);
        let p = g.var_partition(g.root);
        assert_eq!(p.exists.iter().copied().collect::<Vec<_>>(), vec![y]);
        assert!(p.foralls.is_empty());
        assert_eq!(p.free_supp.iter().copied().collect::<Vec<_>>(), vec![x]);
    }

    #[test]
    fn rename_below_clones_only_spine() {
        let (mut vt, mut g, x, y) = setup();
        let z = vt.add_universal("z");
        let tx = g.terminal(x);
        let ty = g.terminal(y);
        let tz = g.terminal(z);
        let shared = g.mk_and(vec![Branch::plain(tz), Branch::new(ty, true)]);
        let withx = g.mk_and(vec![Branch::plain(tx), shared]);
        let top = g.mk_or(vec![withx, shared]);
        g.set_root(top, Annotation::new());
        let x2 = vt.fresh_copy(x);
        let first_child = g.children(top.target)[0];
        g.rename_below(first_child, x, x2, &mut vt);
        assert!(!g.occurs_below(first_child, x));
        assert!(g.occurs_below(first_child, x2));
        // shared x-free node still shared with second child
        let second_child = g.children(g.edge(g.root).target)[1];
        assert_eq!(g.edge(second_child).target, shared.target);
        g.check_integrity().unwrap();
    }

    #[test]
    fn linearize_universals_first() {
        let mut vt = VarTable::new();
        let x1 = vt.add_universal("x1");
        let x2 = vt.add_universal("x2");
        let y1 = vt.add_existential("y1", [x1]);
        let mut ann = Annotation::new();
        ann.foralls.extend([x1, x2]);
        ann.exists.insert(y1);
        assert_eq!(linearize_prefix(&ann, &vt), vec![x1, x2, y1]);
        assert!(linearize_prefix(&Annotation::new(), &vt).is_empty());
    }
}
