//! QCIR-style circuit reader and writer with dependency annotations.
//!
//! Lines: `#` comments, `forall(v, ...)`, `exists(v, ...)`,
//! `depend(y, x, ...)`, `output(l)`, and gate definitions
//! `w = and(l, ...)` / `or(l, ...)` / `not(l)`, where a literal `l` is a
//! wire name with an optional `-`. Wire names are `[A-Za-z0-9_]+`; `true`
//! and `false` are constants. `not` gates are expanded during parsing by
//! pushing the negation to the inputs, so the resulting matrix is in NNF.
//! An `exists` variable depends on every universal declared before it until
//! a `depend` line overrides the set.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use super::ParseError;
use crate::dqbf::PrenexDqbf;
use crate::graph::{Annotation, Branch, Graph, NodeKind};
use crate::vars::{VarId, VarKind, VarTable};

#[derive(Debug, Clone)]
enum GateDef {
    And(Vec<(String, bool)>),
    Or(Vec<(String, bool)>),
    Not(String, bool),
}

fn ident_ok(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_args(line_no: usize, body: &str) -> Result<Vec<(String, bool)>, ParseError> {
    let body = body.trim();
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|raw| {
            let raw = raw.trim();
            let (neg, name) = match raw.strip_prefix('-') {
                Some(rest) => (true, rest.trim()),
                None => (false, raw),
            };
            if !ident_ok(name) {
                return Err(ParseError::Syntax {
                    line: line_no,
                    msg: format!("bad wire name `{}`", raw),
                });
            }
            Ok((name.to_string(), neg))
        })
        .collect()
}

/// Splits `head(args)` into the head keyword and argument list.
fn call_form(line: &str) -> Option<(&str, &str)> {
    let open = line.find('(')?;
    let close = line.rfind(')')?;
    if close < open {
        return None;
    }
    Some((line[..open].trim(), &line[open + 1..close]))
}

pub fn parse_dqcir(text: &str) -> Result<PrenexDqbf, ParseError> {
    let mut vars = VarTable::new();
    let mut by_name: BTreeMap<String, VarId> = BTreeMap::new();
    let mut prefix: Vec<VarId> = Vec::new();
    let mut universals_so_far: Vec<VarId> = Vec::new();
    let mut gates: HashMap<String, (usize, GateDef)> = HashMap::new();
    let mut output: Option<(usize, String, bool)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(eq) = line.find('=') {
            let (lhs, rhs) = (line[..eq].trim(), line[eq + 1..].trim());
            if !ident_ok(lhs) {
                return Err(ParseError::Syntax {
                    line: line_no,
                    msg: format!("bad gate name `{}`", lhs),
                });
            }
            if by_name.contains_key(lhs) || gates.contains_key(lhs) {
                return Err(ParseError::Syntax {
                    line: line_no,
                    msg: format!("wire `{}` defined twice", lhs),
                });
            }
            let Some((head, body)) = call_form(rhs) else {
                return Err(ParseError::Syntax {
                    line: line_no,
                    msg: "expected `and(...)`, `or(...)`, or `not(...)`".into(),
                });
            };
            let args = parse_args(line_no, body)?;
            let def = match head {
                "and" => GateDef::And(args),
                "or" => GateDef::Or(args),
                "not" => {
                    if args.len() != 1 {
                        return Err(ParseError::Syntax {
                            line: line_no,
                            msg: "`not` takes exactly one input".into(),
                        });
                    }
                    GateDef::Not(args[0].0.clone(), args[0].1)
                }
                other => {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        msg: format!("unknown gate type `{}`", other),
                    });
                }
            };
            gates.insert(lhs.to_string(), (line_no, def));
            continue;
        }
        let Some((head, body)) = call_form(line) else {
            return Err(ParseError::Syntax {
                line: line_no,
                msg: "unrecognized line".into(),
            });
        };
        match head {
            "forall" => {
                for (name, neg) in parse_args(line_no, body)? {
                    if neg {
                        return Err(ParseError::Syntax {
                            line: line_no,
                            msg: "negated variable in prefix".into(),
                        });
                    }
                    if by_name.contains_key(&name) {
                        return Err(ParseError::DuplicateQuantification { line: line_no, var: name });
                    }
                    let v = vars.add_universal(&name);
                    by_name.insert(name, v);
                    universals_so_far.push(v);
                    prefix.push(v);
                }
            }
            "exists" => {
                for (name, neg) in parse_args(line_no, body)? {
                    if neg {
                        return Err(ParseError::Syntax {
                            line: line_no,
                            msg: "negated variable in prefix".into(),
                        });
                    }
                    if by_name.contains_key(&name) {
                        return Err(ParseError::DuplicateQuantification { line: line_no, var: name });
                    }
                    let v = vars.add_existential(&name, universals_so_far.iter().copied());
                    by_name.insert(name, v);
                    prefix.push(v);
                }
            }
            "depend" => {
                let args = parse_args(line_no, body)?;
                let Some(((yname, yneg), deps)) = args.split_first() else {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        msg: "`depend` needs a variable".into(),
                    });
                };
                if *yneg {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        msg: "negated variable in `depend`".into(),
                    });
                }
                let Some(&y) = by_name.get(yname) else {
                    return Err(ParseError::UndefinedWire {
                        line: line_no,
                        wire: yname.clone(),
                    });
                };
                if vars.kind(y) != VarKind::Existential {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        msg: format!("`{}` is not existential", yname),
                    });
                }
                let mut dep_ids = BTreeSet::new();
                for (xname, xneg) in deps {
                    if *xneg {
                        return Err(ParseError::Syntax {
                            line: line_no,
                            msg: "negated variable in `depend`".into(),
                        });
                    }
                    match by_name.get(xname) {
                        Some(&x) if vars.kind(x) == VarKind::Universal => {
                            dep_ids.insert(x);
                        }
                        _ => {
                            return Err(ParseError::UndeclaredDependency {
                                line: line_no,
                                var: xname.clone(),
                            });
                        }
                    }
                }
                vars.set_deps(y, dep_ids);
            }
            "output" => {
                if output.is_some() {
                    return Err(ParseError::DuplicateOutput { line: line_no });
                }
                let args = parse_args(line_no, body)?;
                if args.len() != 1 {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        msg: "`output` takes exactly one literal".into(),
                    });
                }
                output = Some((line_no, args[0].0.clone(), args[0].1));
            }
            other => {
                return Err(ParseError::Syntax {
                    line: line_no,
                    msg: format!("unknown declaration `{}`", other),
                });
            }
        }
    }

    let Some((out_line, out_wire, out_neg)) = output else {
        return Err(ParseError::Syntax {
            line: 0,
            msg: "missing `output(...)`".into(),
        });
    };

    let mut graph = Graph::new();
    let mut memo: HashMap<(String, bool), Branch> = HashMap::new();
    let mut on_stack: BTreeSet<String> = BTreeSet::new();
    let root = resolve(
        &out_wire, out_neg, out_line, &gates, &by_name, &vars, &mut graph, &mut memo,
        &mut on_stack,
    )?;
    graph.set_root(root, Annotation::new());
    Ok(PrenexDqbf {
        vars,
        prefix,
        matrix: graph,
    })
}

#[allow(clippy::too_many_arguments)]
fn resolve(
    wire: &str,
    neg: bool,
    line: usize,
    gates: &HashMap<String, (usize, GateDef)>,
    by_name: &BTreeMap<String, VarId>,
    vars: &VarTable,
    graph: &mut Graph,
    memo: &mut HashMap<(String, bool), Branch>,
    on_stack: &mut BTreeSet<String>,
) -> Result<Branch, ParseError> {
    let _ = vars;
    if let Some(&b) = memo.get(&(wire.to_string(), neg)) {
        return Ok(b);
    }
    if wire == "true" || wire == "false" {
        let val = (wire == "true") != neg;
        return Ok(Branch::plain(graph.constant(val)));
    }
    if let Some(&v) = by_name.get(wire) {
        return Ok(Branch::new(graph.terminal(v), neg));
    }
    let Some((def_line, def)) = gates.get(wire).cloned() else {
        return Err(ParseError::UndefinedWire {
            line,
            wire: wire.to_string(),
        });
    };
    if !on_stack.insert(wire.to_string()) {
        return Err(ParseError::CyclicDefinition {
            wire: wire.to_string(),
        });
    }
    let out = match def {
        // one flip from the `not` gate, one more if the input literal is negated
        GateDef::Not(inner, ineg) => resolve(
            &inner,
            neg == ineg,
            def_line,
            gates,
            by_name,
            vars,
            graph,
            memo,
            on_stack,
        )?,
        GateDef::And(ref args) | GateDef::Or(ref args) => {
            let is_and = matches!(def, GateDef::And(_)) != neg;
            let mut kids = Vec::with_capacity(args.len());
            for (aname, aneg) in args {
                kids.push(resolve(
                    aname,
                    neg != *aneg,
                    def_line,
                    gates,
                    by_name,
                    vars,
                    graph,
                    memo,
                    on_stack,
                )?);
            }
            if is_and {
                graph.mk_and(kids)
            } else {
                graph.mk_or(kids)
            }
        }
    };
    on_stack.remove(wire);
    memo.insert((wire.to_string(), neg), out);
    Ok(out)
}

/// Picks a gate-name prefix that cannot collide with any variable name.
fn gate_prefix(vars: &VarTable) -> String {
    let mut prefix = "g".to_string();
    loop {
        let clash = vars.ids().any(|v| {
            let n = vars.name(v);
            n.starts_with(&prefix) && n[prefix.len()..].chars().all(|c| c.is_ascii_digit())
                && n.len() > prefix.len()
        });
        if !clash {
            return prefix;
        }
        prefix.push('g');
    }
}

/// Writes the instance as a circuit. Inner nodes become gates in
/// reverse-topological order; negations appear only on literals.
pub fn write_dqcir(p: &PrenexDqbf) -> String {
    let g = &p.matrix;
    let mut out = String::new();
    let _ = writeln!(out, "#QCIR-G14");
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
    if !universals.is_empty() {
        let names: Vec<&str> = universals.iter().map(|&v| p.vars.name(v)).collect();
        let _ = writeln!(out, "forall({})", names.join(", "));
    }
    for &y in &existentials {
        let _ = writeln!(out, "exists({})", p.vars.name(y));
        let deps: Vec<&str> = p.vars.deps(y).iter().map(|&d| p.vars.name(d)).collect();
        let _ = writeln!(out, "depend({}{}{})", p.vars.name(y), if deps.is_empty() { "" } else { ", " }, deps.join(", "));
    }

    let prefix_str = gate_prefix(&p.vars);
    let mut names: HashMap<crate::graph::NodeId, String> = HashMap::new();
    let mut order = g.topo_inner();
    order.reverse(); // children before parents
    let mut gate_lines = String::new();
    let mut counter = 0usize;
    for n in order {
        counter += 1;
        let gname = format!("{}{}", prefix_str, counter);
        let args: Vec<String> = g
            .children(n)
            .iter()
            .map(|&c| {
                let d = g.edge(c);
                let base = match g.kind(d.target) {
                    NodeKind::Terminal(v) => p.vars.name(*v).to_string(),
                    NodeKind::Const(b) => if *b { "true" } else { "false" }.to_string(),
                    _ => names[&d.target].clone(),
                };
                if d.negated {
                    format!("-{}", base)
                } else {
                    base
                }
            })
            .collect();
        let op = if matches!(g.kind(n), NodeKind::And) { "and" } else { "or" };
        let _ = writeln!(gate_lines, "{} = {}({})", gname, op, args.join(", "));
        names.insert(n, gname);
    }
    let root = g.edge(g.root);
    let root_name = match g.kind(root.target) {
        NodeKind::Terminal(v) => p.vars.name(*v).to_string(),
        NodeKind::Const(b) => if *b { "true" } else { "false" }.to_string(),
        _ => names[&root.target].clone(),
    };
    let _ = writeln!(
        out,
        "output({}{})",
        if root.negated { "-" } else { "" },
        root_name
    );
    out.push_str(&gate_lines);
    out
}
