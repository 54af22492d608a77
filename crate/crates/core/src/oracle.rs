//! Exact, brute-force reference semantics for desk-scale instances.
//!
//! Satisfiability of a DQBF is decided by enumerating every Skolem function
//! candidate (one Boolean function per existential or free variable, with
//! support restricted to the dependency set) and testing whether substituting
//! it turns the formula into a tautology over the universally quantified
//! variables. [`sem_def`] evaluates that definition directly; [`sem_rec`]
//! evaluates the recursive characterization over the formula structure. The
//! two must agree on every well-formed input, which the test suites exercise.
//!
//! The oracle is exact or nothing: a candidate universe larger than the
//! configured budget is an error, never a truncation.
//!
//! Everything here takes shared references; candidate checks on one
//! instance can run concurrently.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::rc::Rc;

use thiserror::Error;

use crate::dqbf::Dqbf;
use crate::graph::{linearize_prefix, EdgeId, NodeId, NodeKind};
use crate::vars::{VarId, VarKind, VarTable};

/// A Boolean function in canonical form: the support lists exactly the
/// variables the function depends on, ascending; `bits` holds the truth table
/// indexed by assignments to the support (first support variable = bit 0 of
/// the row index).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Table {
    support: Vec<VarId>,
    bits: u64,
}

impl Table {
    pub fn constant(b: bool) -> Self {
        Table {
            support: Vec::new(),
            bits: b as u64,
        }
    }

    pub fn identity(v: VarId) -> Self {
        Table {
            support: vec![v],
            bits: 0b10,
        }
    }

    pub fn negation(v: VarId) -> Self {
        Table {
            support: vec![v],
            bits: 0b01,
        }
    }

    pub fn is_constant(&self) -> Option<bool> {
        if self.support.is_empty() {
            Some(self.bits & 1 == 1)
        } else {
            None
        }
    }

    pub fn support(&self) -> &[VarId] {
        &self.support
    }

    /// Builds a table over `inputs` (sorted ascending) from raw row bits and
    /// drops inputs the function does not actually depend on.
    pub fn from_bits(inputs: &[VarId], bits: u64) -> Self {
        debug_assert!(inputs.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(inputs.len() <= 6);
        let mut t = Table {
            support: inputs.to_vec(),
            bits,
        };
        t.minimize();
        t
    }

    fn minimize(&mut self) {
        let mut i = 0;
        while i < self.support.len() {
            let n = self.support.len();
            let rows = 1usize << n;
            let mut depends = false;
            for row in 0..rows {
                if row & (1 << i) != 0 {
                    continue;
                }
                let hi = row | (1 << i);
                if (self.bits >> row) & 1 != (self.bits >> hi) & 1 {
                    depends = true;
                    break;
                }
            }
            if depends {
                i += 1;
                continue;
            }
            // drop input i
            let mut nb = 0u64;
            let mut out_row = 0;
            for row in 0..rows {
                if row & (1 << i) != 0 {
                    continue;
                }
                let keep = self.shrink_row(row, i);
                debug_assert_eq!(keep, out_row);
                nb |= ((self.bits >> row) & 1) << out_row;
                out_row += 1;
            }
            self.support.remove(i);
            self.bits = nb;
        }
        if self.support.is_empty() {
            self.bits &= 1;
        }
    }

    fn shrink_row(&self, row: usize, drop: usize) -> usize {
        let low = row & ((1 << drop) - 1);
        let high = row >> (drop + 1);
        low | (high << drop)
    }

    /// Value under an assignment (must cover the support).
    pub fn eval(&self, assign: &dyn Fn(VarId) -> bool) -> bool {
        let mut row = 0usize;
        for (i, &v) in self.support.iter().enumerate() {
            if assign(v) {
                row |= 1 << i;
            }
        }
        (self.bits >> row) & 1 == 1
    }

    /// `if v then t1 else t0`, canonicalized.
    pub fn ite(v: VarId, t1: &Table, t0: &Table) -> Table {
        let mut inputs: BTreeSet<VarId> = t1.support.iter().copied().collect();
        inputs.extend(t0.support.iter().copied());
        inputs.insert(v);
        let inputs: Vec<VarId> = inputs.into_iter().collect();
        let rows = 1usize << inputs.len();
        let mut bits = 0u64;
        for row in 0..rows {
            let assign = |w: VarId| {
                let i = inputs.iter().position(|&u| u == w).unwrap();
                row & (1 << i) != 0
            };
            let val = if assign(v) { t1.eval(&assign) } else { t0.eval(&assign) };
            bits |= (val as u64) << row;
        }
        Table::from_bits(&inputs, bits)
    }

    pub fn display(&self, vt: &VarTable) -> String {
        if let Some(b) = self.is_constant() {
            return if b { "1".into() } else { "0".into() };
        }
        let names: Vec<&str> = self.support.iter().map(|&v| vt.name(v)).collect();
        let rows = 1usize << self.support.len();
        let mut bits = String::with_capacity(rows);
        for row in 0..rows {
            bits.push(if (self.bits >> row) & 1 == 1 { '1' } else { '0' });
        }
        format!("({}):{}", names.join(","), bits)
    }
}

/// A Skolem function candidate: one function per existential or free
/// variable, support inside the dependency set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SkolemCandidate {
    pub assignment: BTreeMap<VarId, Table>,
}

impl SkolemCandidate {
    pub fn get(&self, v: VarId) -> Option<&Table> {
        self.assignment.get(&v)
    }

    fn project(&self, onto: &BTreeSet<VarId>) -> SkolemCandidate {
        SkolemCandidate {
            assignment: self
                .assignment
                .iter()
                .filter(|(v, _)| onto.contains(v))
                .map(|(v, t)| (*v, t.clone()))
                .collect(),
        }
    }

    pub fn display(&self, vt: &VarTable) -> String {
        let parts: Vec<String> = self
            .assignment
            .iter()
            .map(|(v, t)| format!("{} <- {}", vt.name(*v), t.display(vt)))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// The set of Skolem functions of a formula, with the size of the candidate
/// universe it was filtered from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticsSet {
    pub candidates: BTreeSet<SkolemCandidate>,
    pub universe_size: u128,
}

impl SemanticsSet {
    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    /// Text listing of every Skolem function, one per line.
    pub fn dump(&self, vt: &VarTable) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} of {} candidates are Skolem functions",
            self.candidates.len(),
            self.universe_size
        );
        for c in &self.candidates {
            let _ = writeln!(s, "  {}", c.display(vt));
        }
        s
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Hard cap on the candidate universe; exceeding it is an error.
    pub budget: u128,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { budget: 1 << 20 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("candidate universe of size {universe} exceeds the budget {budget}")]
    BudgetExceeded { universe: u128, budget: u128 },
    #[error("equivalence undefined: variable {0} occurs in only one formula's scope layout")]
    VariableSetMismatch(VarId),
}

// ---------------------------------------------------------------------------
// candidate universe
// ---------------------------------------------------------------------------

/// Per-variable slot of the candidate universe: the allowed support, sorted.
#[derive(Debug, Clone)]
struct Slot {
    var: VarId,
    allowed: Vec<VarId>,
}

fn universe_slots(
    vt: &VarTable,
    universe: &BTreeSet<VarId>,
    bound_universals: &BTreeSet<VarId>,
    bound_existentials: &BTreeSet<VarId>,
) -> Vec<Slot> {
    let mut slots = Vec::new();
    for &v in universe {
        if bound_universals.contains(&v) {
            continue;
        }
        let allowed: Vec<VarId> = if bound_existentials.contains(&v) {
            vt.deps(v)
                .iter()
                .copied()
                .filter(|d| bound_universals.contains(d))
                .collect()
        } else {
            Vec::new()
        };
        slots.push(Slot { var: v, allowed });
    }
    slots
}

fn universe_size_of(slots: &[Slot]) -> Option<u128> {
    let mut total: u128 = 1;
    for s in slots {
        if s.allowed.len() > 5 {
            return None;
        }
        let funcs: u128 = 1u128.checked_shl(1u32 << s.allowed.len())?;
        total = total.checked_mul(funcs)?;
    }
    Some(total)
}

/// Iterator over the full candidate universe, lexicographic over table bits
/// (lowest variable id most significant).
pub struct CandidateIter {
    slots: Vec<Slot>,
    counters: Vec<u64>,
    done: bool,
}

impl Iterator for CandidateIter {
    type Item = SkolemCandidate;

    fn next(&mut self) -> Option<SkolemCandidate> {
        if self.done {
            return None;
        }
        let mut cand = SkolemCandidate::default();
        for (s, &bits) in self.slots.iter().zip(&self.counters) {
            cand.assignment
                .insert(s.var, Table::from_bits(&s.allowed, bits));
        }
        // increment, last slot fastest
        let mut i = self.slots.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            let max = 1u64 << (1u32 << self.slots[i].allowed.len());
            self.counters[i] += 1;
            if self.counters[i] < max {
                break;
            }
            self.counters[i] = 0;
        }
        if self.slots.is_empty() {
            self.done = true;
        }
        Some(cand)
    }
}

/// Bound universal / bound existential variables of the whole formula.
fn bound_sets(d: &Dqbf) -> (BTreeSet<VarId>, BTreeSet<VarId>) {
    let bound = d.bound_vars();
    let mut u = BTreeSet::new();
    let mut e = BTreeSet::new();
    for v in bound {
        match d.vars.kind(v) {
            VarKind::Universal => {
                u.insert(v);
            }
            VarKind::Existential => {
                e.insert(v);
            }
            VarKind::Free => {}
        }
    }
    (u, e)
}

/// Enumerates the Skolem candidate universe of `d`.
pub fn candidate_universe(d: &Dqbf, cfg: &OracleConfig) -> Result<CandidateIter, OracleError> {
    let universe = d.variable_universe();
    candidate_universe_over(d, &universe, cfg)
}

pub fn candidate_universe_over(
    d: &Dqbf,
    universe: &BTreeSet<VarId>,
    cfg: &OracleConfig,
) -> Result<CandidateIter, OracleError> {
    let (bu, be) = bound_sets(d);
    let slots = universe_slots(&d.vars, universe, &bu, &be);
    let size = universe_size_of(&slots).ok_or(OracleError::BudgetExceeded {
        universe: u128::MAX,
        budget: cfg.budget,
    })?;
    if size > cfg.budget || bu.len() > 24 {
        return Err(OracleError::BudgetExceeded {
            universe: size,
            budget: cfg.budget,
        });
    }
    let counters = vec![0u64; slots.len()];
    Ok(CandidateIter {
        slots,
        counters,
        done: false,
    })
}

/// The universe size `2^|free| * prod_y 2^(2^|D_y ∩ V_forall|)`.
pub fn universe_size(d: &Dqbf) -> Option<u128> {
    let universe = d.variable_universe();
    let (bu, be) = bound_sets(d);
    universe_size_of(&universe_slots(&d.vars, &universe, &bu, &be))
}

// ---------------------------------------------------------------------------
// tautology check
// ---------------------------------------------------------------------------

/// Substitutes the candidate, drops all quantifiers, and checks for a
/// tautology over the bound universal variables (bit-parallel).
pub fn check_candidate(d: &Dqbf, s: &SkolemCandidate) -> bool {
    let (bu, _) = bound_sets(d);
    let universals: Vec<VarId> = bu.into_iter().collect();
    let n = universals.len();
    let nbits = 1usize << n;
    let words = nbits.div_ceil(64);
    let mut memo: HashMap<NodeId, Rc<Vec<u64>>> = HashMap::new();
    let root = d.graph.edge(d.graph.root);
    let vec = eval_node(d, root.target, &universals, words, s, &mut memo);
    let mut ok = true;
    for (w, &word) in vec.iter().enumerate() {
        let masked = if root.negated { !word } else { word };
        let valid = valid_mask(w, nbits);
        if masked & valid != valid {
            ok = false;
            break;
        }
    }
    ok
}

fn valid_mask(word_idx: usize, nbits: usize) -> u64 {
    let lo = word_idx * 64;
    if nbits >= lo + 64 {
        u64::MAX
    } else if nbits <= lo {
        0
    } else {
        (1u64 << (nbits - lo)) - 1
    }
}

fn eval_node(
    d: &Dqbf,
    n: NodeId,
    universals: &[VarId],
    words: usize,
    s: &SkolemCandidate,
    memo: &mut HashMap<NodeId, Rc<Vec<u64>>>,
) -> Rc<Vec<u64>> {
    if let Some(v) = memo.get(&n) {
        return v.clone();
    }
    let out: Vec<u64> = match d.graph.kind(n) {
        NodeKind::Const(b) => vec![if *b { u64::MAX } else { 0 }; words],
        NodeKind::Terminal(v) => terminal_vector(*v, universals, words, s),
        NodeKind::And | NodeKind::Or => {
            let is_and = matches!(d.graph.kind(n), NodeKind::And);
            let mut acc = vec![if is_and { u64::MAX } else { 0 }; words];
            for &c in d.graph.children(n) {
                let ce = d.graph.edge(c);
                let cv = eval_node(d, ce.target, universals, words, s, memo);
                for w in 0..words {
                    let bitsv = if ce.negated { !cv[w] } else { cv[w] };
                    if is_and {
                        acc[w] &= bitsv;
                    } else {
                        acc[w] |= bitsv;
                    }
                }
            }
            acc
        }
    };
    let rc = Rc::new(out);
    memo.insert(n, rc.clone());
    rc
}

fn terminal_vector(v: VarId, universals: &[VarId], words: usize, s: &SkolemCandidate) -> Vec<u64> {
    let nbits = 1usize << universals.len();
    if let Some(pos) = universals.iter().position(|&u| u == v) {
        // assignment index bit `pos` is the value of this universal
        let mut out = vec![0u64; words];
        for idx in 0..nbits {
            if idx & (1 << pos) != 0 {
                out[idx / 64] |= 1 << (idx % 64);
            }
        }
        return out;
    }
    let table = s
        .get(v)
        .unwrap_or_else(|| panic!("no candidate value for variable {:?}", v));
    let mut out = vec![0u64; words];
    for idx in 0..nbits {
        let assign = |w: VarId| {
            let p = universals.iter().position(|&u| u == w).expect("support var");
            idx & (1 << p) != 0
        };
        if table.eval(&assign) {
            out[idx / 64] |= 1 << (idx % 64);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// semantics by definition
// ---------------------------------------------------------------------------

/// The set of Skolem functions by direct filtering of the candidate universe.
pub fn sem_def(d: &Dqbf, cfg: &OracleConfig) -> Result<SemanticsSet, OracleError> {
    let universe = d.variable_universe();
    sem_def_over(d, &universe, cfg)
}

pub fn sem_def_over(
    d: &Dqbf,
    universe: &BTreeSet<VarId>,
    cfg: &OracleConfig,
) -> Result<SemanticsSet, OracleError> {
    let iter = candidate_universe_over(d, universe, cfg)?;
    let mut set = BTreeSet::new();
    let mut total: u128 = 0;
    for cand in iter {
        total += 1;
        if check_candidate(d, &cand) {
            set.insert(cand);
        }
    }
    Ok(SemanticsSet {
        candidates: set,
        universe_size: total,
    })
}

/// Satisfiability by candidate search (early exit on the first witness).
pub fn is_sat(d: &Dqbf, cfg: &OracleConfig) -> Result<bool, OracleError> {
    for cand in candidate_universe(d, cfg)? {
        if check_candidate(d, &cand) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Both satisfiable or both unsatisfiable.
pub fn equisat(a: &Dqbf, b: &Dqbf, cfg: &OracleConfig) -> Result<bool, OracleError> {
    Ok(is_sat(a, cfg)? == is_sat(b, cfg)?)
}

/// Set equality of Skolem functions. The formulas must agree on their scope
/// layout except for variables that occur in neither formula; those slots are
/// projected away before comparing.
pub fn equivalent(a: &Dqbf, b: &Dqbf, cfg: &OracleConfig) -> Result<bool, OracleError> {
    let mut universe = a.variable_universe();
    universe.extend(b.variable_universe());
    let (bu_a, _) = bound_sets(a);
    let (bu_b, _) = bound_sets(b);
    let common: BTreeSet<VarId> = universe
        .iter()
        .copied()
        .filter(|v| !bu_a.contains(v) && !bu_b.contains(v))
        .collect();
    // A variable bound universally on one side only must not occur on the
    // side where it is loose, otherwise projection is not faithful.
    for &v in bu_a.symmetric_difference(&bu_b) {
        let in_a = a.graph.occurs_below_node(a.graph.edge(a.graph.root).target, v);
        let in_b = b.graph.occurs_below_node(b.graph.edge(b.graph.root).target, v);
        if (bu_a.contains(&v) && in_b) || (bu_b.contains(&v) && in_a) {
            return Err(OracleError::VariableSetMismatch(v));
        }
    }
    let sa = sem_def_over(a, &universe, cfg)?;
    let sb = sem_def_over(b, &universe, cfg)?;
    let pa: BTreeSet<SkolemCandidate> =
        sa.candidates.iter().map(|c| c.project(&common)).collect();
    let pb: BTreeSet<SkolemCandidate> =
        sb.candidates.iter().map(|c| c.project(&common)).collect();
    Ok(pa == pb)
}

// ---------------------------------------------------------------------------
// semantics by structural recursion
// ---------------------------------------------------------------------------

/// The set of Skolem functions via the recursive characterization.
pub fn sem_rec(d: &Dqbf, cfg: &OracleConfig) -> Result<SemanticsSet, OracleError> {
    let universe = d.variable_universe();
    sem_rec_over(d, &universe, cfg)
}

pub fn sem_rec_over(
    d: &Dqbf,
    universe: &BTreeSet<VarId>,
    cfg: &OracleConfig,
) -> Result<SemanticsSet, OracleError> {
    let mut rec = RecCtx {
        d,
        universe,
        cfg,
        node_memo: HashMap::new(),
    };
    let set = rec.sem_edge(d.graph.root)?;
    let (bu, be) = bound_sets(d);
    let slots = universe_slots(&d.vars, universe, &bu, &be);
    let size = universe_size_of(&slots).unwrap_or(u128::MAX);
    Ok(SemanticsSet {
        candidates: set.as_ref().clone(),
        universe_size: size,
    })
}

struct RecCtx<'a> {
    d: &'a Dqbf,
    universe: &'a BTreeSet<VarId>,
    cfg: &'a OracleConfig,
    node_memo: HashMap<NodeId, Rc<BTreeSet<SkolemCandidate>>>,
}

impl<'a> RecCtx<'a> {
    /// Universal / existential variables bound at or below the subformula.
    fn bound_under(&self, quants: &[VarId], n: NodeId) -> (BTreeSet<VarId>, BTreeSet<VarId>) {
        let mut u = BTreeSet::new();
        let mut e = BTreeSet::new();
        let mut add = |v: VarId, vt: &VarTable| match vt.kind(v) {
            VarKind::Universal => {
                u.insert(v);
            }
            VarKind::Existential => {
                e.insert(v);
            }
            VarKind::Free => {}
        };
        for &q in quants {
            add(q, &self.d.vars);
        }
        for be in self.d.graph.edges_below_node(n) {
            for v in self.d.graph.edge(be).ann.vars() {
                add(v, &self.d.vars);
            }
        }
        (u, e)
    }

    fn slots_for(&self, quants: &[VarId], n: NodeId) -> Result<Vec<Slot>, OracleError> {
        let (bu, be) = self.bound_under(quants, n);
        let slots = universe_slots(&self.d.vars, self.universe, &bu, &be);
        let size = universe_size_of(&slots).ok_or(OracleError::BudgetExceeded {
            universe: u128::MAX,
            budget: self.cfg.budget,
        })?;
        if size > self.cfg.budget {
            return Err(OracleError::BudgetExceeded {
                universe: size,
                budget: self.cfg.budget,
            });
        }
        Ok(slots)
    }

    fn sem_edge(&mut self, e: EdgeId) -> Result<Rc<BTreeSet<SkolemCandidate>>, OracleError> {
        let data = self.d.graph.edge(e);
        let quants = linearize_prefix(&data.ann, &self.d.vars);
        self.sem_quants(&quants, data.target, data.negated)
    }

    fn sem_quants(
        &mut self,
        quants: &[VarId],
        n: NodeId,
        negated: bool,
    ) -> Result<Rc<BTreeSet<SkolemCandidate>>, OracleError> {
        match quants.split_first() {
            None => self.sem_base(n, negated),
            Some((&v, rest)) => match self.d.vars.kind(v) {
                // existential quantification passes the set through
                VarKind::Existential | VarKind::Free => self.sem_quants(rest, n, negated),
                VarKind::Universal => {
                    let inner = self.sem_quants(rest, n, negated)?;
                    let (_, be) = self.bound_under(rest, n);
                    let zeros: Vec<&SkolemCandidate> = inner
                        .iter()
                        .filter(|s| s.get(v).and_then(|t| t.is_constant()) == Some(false))
                        .collect();
                    let ones: Vec<&SkolemCandidate> = inner
                        .iter()
                        .filter(|s| s.get(v).and_then(|t| t.is_constant()) == Some(true))
                        .collect();
                    let mut out = BTreeSet::new();
                    for s0 in &zeros {
                        'pair: for s1 in &ones {
                            let mut t = SkolemCandidate::default();
                            for (&w, t0) in &s0.assignment {
                                if w == v {
                                    continue;
                                }
                                let t1 = &s1.assignment[&w];
                                if be.contains(&w) && self.d.vars.deps(w).contains(&v) {
                                    t.assignment.insert(w, Table::ite(v, t1, t0));
                                } else {
                                    if t0 != t1 {
                                        continue 'pair;
                                    }
                                    t.assignment.insert(w, t0.clone());
                                }
                            }
                            out.insert(t);
                        }
                    }
                    Ok(Rc::new(out))
                }
            },
        }
    }

    fn sem_base(
        &mut self,
        n: NodeId,
        negated: bool,
    ) -> Result<Rc<BTreeSet<SkolemCandidate>>, OracleError> {
        if !negated {
            if let Some(s) = self.node_memo.get(&n) {
                return Ok(s.clone());
            }
        }
        let out: BTreeSet<SkolemCandidate> = match self.d.graph.kind(n).clone() {
            NodeKind::Const(b) => {
                let slots = self.slots_for(&[], n)?;
                if b != negated {
                    full_universe(&slots)
                } else {
                    BTreeSet::new()
                }
            }
            NodeKind::Terminal(v) => {
                let slots = self.slots_for(&[], n)?;
                let want = !negated;
                full_universe(&slots)
                    .into_iter()
                    .filter(|s| s.get(v).and_then(|t| t.is_constant()) == Some(want))
                    .collect()
            }
            NodeKind::And | NodeKind::Or => {
                debug_assert!(!negated, "negation on an inner edge");
                let is_and = matches!(self.d.graph.kind(n), NodeKind::And);
                let children: Vec<EdgeId> = self.d.graph.children(n).to_vec();
                let mut projected: Vec<(BTreeSet<VarId>, HashSet<SkolemCandidate>)> = Vec::new();
                for &c in &children {
                    let set = self.sem_edge(c)?;
                    let p = self.d.graph.var_partition(c);
                    let mut match_dom: BTreeSet<VarId> = p.free_supp;
                    match_dom.extend(p.exists);
                    let proj: HashSet<SkolemCandidate> =
                        set.iter().map(|s| s.project(&match_dom)).collect();
                    projected.push((match_dom, proj));
                }
                let slots = self.slots_for(&[], n)?;
                let mut out = BTreeSet::new();
                for cand in enumerate_slots(&slots) {
                    let mut hits = projected
                        .iter()
                        .map(|(dom, set)| set.contains(&cand.project(dom)));
                    let ok = if is_and { hits.all(|b| b) } else { hits.any(|b| b) };
                    if ok {
                        out.insert(cand);
                    }
                }
                out
            }
        };
        let rc = Rc::new(out);
        if !negated {
            self.node_memo.insert(n, rc.clone());
        }
        Ok(rc)
    }
}

fn enumerate_slots(slots: &[Slot]) -> CandidateIter {
    CandidateIter {
        slots: slots.to_vec(),
        counters: vec![0; slots.len()],
        done: false,
    }
}

fn full_universe(slots: &[Slot]) -> BTreeSet<SkolemCandidate> {
    enumerate_slots(slots).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{exists, forall, var, Builder};

    fn example_scoped_choice() -> (Dqbf, VarId, VarId, VarId) {
        let mut b = Builder::new();
        let x1 = b.universal("x1");
        let x2 = b.universal("x2");
        let y1 = b.existential("y1", [x2]);
        let f = forall(
            [x1, x2],
            var(x1).iff(var(x2)).or(exists(y1, var(x1).xor(var(y1)))),
        );
        (b.finish(f), x1, x2, y1)
    }

    #[test]
    fn four_candidates_one_skolem_function() {
        let (d, _x1, x2, y1) = example_scoped_choice();
        let cfg = OracleConfig::default();
        let cands: Vec<_> = candidate_universe(&d, &cfg).unwrap().collect();
        assert_eq!(cands.len(), 4);
        let sem = sem_def(&d, &cfg).unwrap();
        assert_eq!(sem.universe_size, 4);
        assert_eq!(sem.len(), 1);
        let only = sem.candidates.iter().next().unwrap();
        assert_eq!(only.get(y1), Some(&Table::identity(x2)));
    }

    #[test]
    fn check_specific_candidates() {
        let (d, _x1, x2, y1) = example_scoped_choice();
        let mut good = SkolemCandidate::default();
        good.assignment.insert(y1, Table::identity(x2));
        assert!(check_candidate(&d, &good));
        let mut bad = SkolemCandidate::default();
        bad.assignment.insert(y1, Table::constant(false));
        assert!(!check_candidate(&d, &bad));
    }

    #[test]
    fn constant_true_has_empty_skolem_function() {
        let b = Builder::new();
        let d = b.finish(crate::formula::tru());
        let cfg = OracleConfig::default();
        let sem = sem_def(&d, &cfg).unwrap();
        assert_eq!(sem.len(), 1);
        assert!(is_sat(&d, &cfg).unwrap());
    }

    #[test]
    fn rec_matches_def_on_example() {
        let (d, _, _, _) = example_scoped_choice();
        let cfg = OracleConfig::default();
        assert_eq!(
            sem_def(&d, &cfg).unwrap().candidates,
            sem_rec(&d, &cfg).unwrap().candidates
        );
    }

    #[test]
    fn budget_is_enforced() {
        let (d, _, _, _) = example_scoped_choice();
        let cfg = OracleConfig { budget: 2 };
        match sem_def(&d, &cfg) {
            Err(OracleError::BudgetExceeded { universe, .. }) => assert_eq!(universe, 4),
            other => panic!("expected budget error, got {:?}", other),
        }
    }

    #[test]
    fn table_minimization_drops_unused_inputs() {
        let mut vt = VarTable::new();
        let a = vt.add_universal("a");
        let b = vt.add_universal("b");
        // f(a,b) = a  (bits rows: 00->0, 01(a=1)->1, 10->0, 11->1)
        let t = Table::from_bits(&[a, b], 0b1010);
        assert_eq!(t, Table::identity(a));
        let c = Table::from_bits(&[a, b], 0b1111);
        assert_eq!(c, Table::constant(true));
    }

    #[test]
    fn ite_recombines() {
        let mut vt = VarTable::new();
        let x = vt.add_universal("x");
        let t = Table::ite(x, &Table::constant(true), &Table::constant(false));
        assert_eq!(t, Table::identity(x));
        let t2 = Table::ite(x, &Table::constant(true), &Table::constant(true));
        assert_eq!(t2, Table::constant(true));
    }
}
