//! DQDIMACS reader and writer.
//!
//! Grammar: a header `p cnf <nvars> <nclauses>`; prefix lines `a <v>+ 0`,
//! `e <v>+ 0`, and `d <y> <x>* 0` in any interleaving before the clauses;
//! then clauses as zero-terminated signed integers. `c` lines are comments.
//! Variables on an `e` line depend on every universal declared before them;
//! `d` lines give the dependency set explicitly and may only reference
//! previously declared universals. Variables that appear in no prefix line
//! are free.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{ParseError, WriteError};
use crate::dqbf::PrenexDqbf;
use crate::graph::{Annotation, Branch, Graph, NodeKind};
use crate::vars::{VarId, VarKind, VarTable};

pub fn parse_dqdimacs(text: &str) -> Result<PrenexDqbf, ParseError> {
    let mut vars = VarTable::new();
    let mut by_number: BTreeMap<u64, VarId> = BTreeMap::new();
    let mut prefix: Vec<VarId> = Vec::new();
    let mut universals_so_far: Vec<VarId> = Vec::new();
    let mut header: Option<(u64, u64)> = None;
    let mut clause_tokens: Vec<i64> = Vec::new();
    let mut in_clauses = false;

    let syntax = |line: usize, msg: &str| ParseError::Syntax {
        line,
        msg: msg.to_string(),
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(syntax(line_no, "duplicate header"));
            }
            let mut it = line.split_whitespace();
            it.next();
            if it.next() != Some("cnf") {
                return Err(syntax(line_no, "expected `p cnf <vars> <clauses>`"));
            }
            let nv = it
                .next()
                .and_then(|t| t.parse::<u64>().ok())
                .ok_or_else(|| syntax(line_no, "bad variable count"))?;
            let nc = it
                .next()
                .and_then(|t| t.parse::<u64>().ok())
                .ok_or_else(|| syntax(line_no, "bad clause count"))?;
            header = Some((nv, nc));
            continue;
        }
        let (nvars, _) = header.ok_or_else(|| syntax(line_no, "missing `p cnf` header"))?;
        let first = line.split_whitespace().next().unwrap();
        match first {
            "a" | "e" | "d" if !in_clauses => {
                let nums: Vec<u64> = line
                    .split_whitespace()
                    .skip(1)
                    .map(|t| {
                        t.parse::<u64>()
                            .map_err(|_| syntax(line_no, "bad variable number"))
                    })
                    .collect::<Result<_, _>>()?;
                let Some((&0, body)) = nums.split_last() else {
                    return Err(syntax(line_no, "prefix line not zero-terminated"));
                };
                if body.iter().any(|&n| n == 0 || n > nvars) {
                    return Err(syntax(line_no, "variable number out of range"));
                }
                match first {
                    "a" => {
                        for &n in body {
                            if by_number.contains_key(&n) {
                                return Err(ParseError::DuplicateQuantification {
                                    line: line_no,
                                    var: n.to_string(),
                                });
                            }
                            let v = vars.add_universal(n.to_string());
                            by_number.insert(n, v);
                            universals_so_far.push(v);
                            prefix.push(v);
                        }
                    }
                    "e" => {
                        for &n in body {
                            if by_number.contains_key(&n) {
                                return Err(ParseError::DuplicateQuantification {
                                    line: line_no,
                                    var: n.to_string(),
                                });
                            }
                            let v = vars
                                .add_existential(n.to_string(), universals_so_far.iter().copied());
                            by_number.insert(n, v);
                            prefix.push(v);
                        }
                    }
                    _ => {
                        let Some((&yn, deps)) = body.split_first() else {
                            return Err(syntax(line_no, "empty `d` line"));
                        };
                        if by_number.contains_key(&yn) {
                            return Err(ParseError::DuplicateQuantification {
                                line: line_no,
                                var: yn.to_string(),
                            });
                        }
                        let mut dep_ids = Vec::new();
                        for &xn in deps {
                            match by_number.get(&xn) {
                                Some(&x) if vars.kind(x) == VarKind::Universal => dep_ids.push(x),
                                _ => {
                                    return Err(ParseError::UndeclaredDependency {
                                        line: line_no,
                                        var: xn.to_string(),
                                    })
                                }
                            }
                        }
                        let v = vars.add_existential(yn.to_string(), dep_ids);
                        by_number.insert(yn, v);
                        prefix.push(v);
                    }
                }
            }
            "a" | "e" | "d" => {
                return Err(syntax(line_no, "prefix line after the first clause"));
            }
            _ => {
                in_clauses = true;
                for t in line.split_whitespace() {
                    let lit = t
                        .parse::<i64>()
                        .map_err(|_| syntax(line_no, "bad literal"))?;
                    if lit.unsigned_abs() > nvars {
                        return Err(syntax(line_no, "literal out of range"));
                    }
                    clause_tokens.push(lit);
                }
            }
        }
    }

    let (nvars, nclauses) = header.ok_or_else(|| syntax(0, "missing `p cnf` header"))?;
    let _ = nvars;
    if clause_tokens.last().is_some_and(|&t| t != 0) {
        return Err(syntax(0, "final clause not zero-terminated"));
    }

    let mut graph = Graph::new();
    let mut clauses: Vec<Branch> = Vec::new();
    let mut current: Vec<Branch> = Vec::new();
    for &lit in &clause_tokens {
        if lit == 0 {
            clauses.push(graph.mk_or(std::mem::take(&mut current)));
            continue;
        }
        let n = lit.unsigned_abs();
        let v = *by_number.entry(n).or_insert_with(|| {
            // referenced but never declared: free
            vars.add_free(n.to_string())
        });
        current.push(Branch::new(graph.terminal(v), lit < 0));
    }
    if clauses.len() as u64 != nclauses {
        return Err(syntax(
            0,
            &format!("header declares {} clauses, found {}", nclauses, clauses.len()),
        ));
    }
    let matrix_root = graph.mk_and(clauses);
    graph.set_root(matrix_root, Annotation::new());
    Ok(PrenexDqbf {
        vars,
        prefix,
        matrix: graph,
    })
}

type Clause = Vec<(VarId, bool)>;

/// Clause view of a CNF-shaped matrix; `None` is the constant-true matrix
/// (zero clauses).
fn extract_clauses(p: &PrenexDqbf) -> Result<Option<Vec<Clause>>, WriteError> {
    let g = &p.matrix;
    let root = g.edge(g.root);
    let literal = |e: Branch| -> Result<(VarId, bool), WriteError> {
        match g.kind(e.target) {
            NodeKind::Terminal(v) => Ok((*v, e.negated)),
            k => Err(WriteError::NotCnf(format!("literal position holds {:?}", k))),
        }
    };
    let clause = |b: Branch| -> Result<Clause, WriteError> {
        match g.kind(b.target) {
            NodeKind::Terminal(_) => Ok(vec![literal(b)?]),
            NodeKind::Or if !b.negated => g
                .children(b.target)
                .iter()
                .map(|&c| literal(g.branch_of(c)))
                .collect(),
            k => Err(WriteError::NotCnf(format!("clause position holds {:?}", k))),
        }
    };
    let rb = Branch::new(root.target, root.negated);
    match g.kind(rb.target) {
        NodeKind::Const(b) => {
            if *b != rb.negated {
                Ok(None) // constant true: zero clauses
            } else {
                Ok(Some(vec![vec![]])) // constant false: one empty clause
            }
        }
        NodeKind::And if !rb.negated => Ok(Some(
            g.children(rb.target)
                .iter()
                .map(|&c| clause(g.branch_of(c)))
                .collect::<Result<_, _>>()?,
        )),
        _ => Ok(Some(vec![clause(rb)?])),
    }
}

/// Writes a CNF-shaped prenex instance. Output numbering: universals first,
/// then existentials, each ascending by id; free variables last.
pub fn write_dqdimacs(p: &PrenexDqbf) -> Result<String, WriteError> {
    let clauses = extract_clauses(p)?.unwrap_or_default();

    let mut numbering: BTreeMap<VarId, u64> = BTreeMap::new();
    let mut next = 1u64;
    let mut universals = Vec::new();
    let mut existentials = Vec::new();
    for &v in &p.prefix {
        match p.vars.kind(v) {
            VarKind::Universal => universals.push(v),
            VarKind::Existential => existentials.push(v),
            VarKind::Free => {}
        }
    }
    universals.sort_unstable();
    existentials.sort_unstable();
    for &v in universals.iter().chain(&existentials) {
        numbering.insert(v, next);
        next += 1;
    }
    for clause in &clauses {
        for &(v, _) in clause {
            numbering.entry(v).or_insert_with(|| {
                let n = next;
                next += 1;
                n
            });
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", next - 1, clauses.len());
    if !universals.is_empty() {
        let nums: Vec<String> = universals.iter().map(|v| numbering[v].to_string()).collect();
        let _ = writeln!(out, "a {} 0", nums.join(" "));
    }
    for &y in &existentials {
        let mut deps: Vec<u64> = p.vars.deps(y).iter().map(|d| numbering[d]).collect();
        deps.sort_unstable();
        let deps: Vec<String> = deps.into_iter().map(|d| d.to_string()).collect();
        if deps.is_empty() {
            let _ = writeln!(out, "d {} 0", numbering[&y]);
        } else {
            let _ = writeln!(out, "d {} {} 0", numbering[&y], deps.join(" "));
        }
    }
    for clause in &clauses {
        let lits: Vec<String> = clause
            .iter()
            .map(|&(v, neg)| {
                let n = numbering[&v] as i64;
                (if neg { -n } else { n }).to_string()
            })
            .collect();
        if lits.is_empty() {
            let _ = writeln!(out, "0");
        } else {
            let _ = writeln!(out, "{} 0", lits.join(" "));
        }
    }
    Ok(out)
}
