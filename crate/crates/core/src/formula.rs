//! A small expression layer for constructing quantifier graphs in tests,
//! fixtures, and the instance generator.
//!
//! Biconditional and antivalence are abbreviations and expand at build time:
//! `a <-> b` becomes `(a & b) | (~a & ~b)`, `a xor b` its complement shape.

use crate::dqbf::{Dqbf, PrenexDqbf};
use crate::graph::{Annotation, Branch, Graph, NodeKind};
use crate::vars::{VarId, VarKind, VarTable};

#[derive(Debug, Clone)]
pub enum Form {
    Const(bool),
    Var(VarId),
    Not(Box<Form>),
    And(Vec<Form>),
    Or(Vec<Form>),
    /// Existential quantifier; the dependency set lives in the registry.
    Exists(VarId, Box<Form>),
    Forall(Vec<VarId>, Box<Form>),
}

pub fn var(v: VarId) -> Form {
    Form::Var(v)
}

pub fn tru() -> Form {
    Form::Const(true)
}

pub fn fls() -> Form {
    Form::Const(false)
}

pub fn nnot(f: Form) -> Form {
    Form::Not(Box::new(f))
}

pub fn exists(v: VarId, body: Form) -> Form {
    Form::Exists(v, Box::new(body))
}

pub fn forall(vs: impl IntoIterator<Item = VarId>, body: Form) -> Form {
    Form::Forall(vs.into_iter().collect(), Box::new(body))
}

pub fn and(fs: impl IntoIterator<Item = Form>) -> Form {
    Form::And(fs.into_iter().collect())
}

pub fn or(fs: impl IntoIterator<Item = Form>) -> Form {
    Form::Or(fs.into_iter().collect())
}

impl Form {
    pub fn and(self, other: Form) -> Form {
        Form::And(vec![self, other])
    }

    pub fn or(self, other: Form) -> Form {
        Form::Or(vec![self, other])
    }

    pub fn iff(self, other: Form) -> Form {
        Form::Or(vec![
            Form::And(vec![self.clone(), other.clone()]),
            Form::And(vec![nnot(self), nnot(other)]),
        ])
    }

    pub fn xor(self, other: Form) -> Form {
        Form::Or(vec![
            Form::And(vec![self.clone(), nnot(other.clone())]),
            Form::And(vec![nnot(self), other]),
        ])
    }
}

/// Owns the variable registry while a formula is being written down.
#[derive(Debug, Default)]
pub struct Builder {
    pub vars: VarTable,
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn universal(&mut self, name: &str) -> VarId {
        self.vars.add_universal(name)
    }

    pub fn existential(&mut self, name: &str, deps: impl IntoIterator<Item = VarId>) -> VarId {
        self.vars.add_existential(name, deps)
    }

    pub fn free(&mut self, name: &str) -> VarId {
        self.vars.add_free(name)
    }

    /// Builds the annotated graph for `f`. Shapes are kept as written; no
    /// hashing or folding happens here.
    pub fn finish(self, f: Form) -> Dqbf {
        let mut graph = Graph::new();
        let (b, ann) = build(&mut graph, &f);
        graph.set_root(b, ann);
        Dqbf {
            vars: self.vars,
            graph,
        }
    }

    /// Builds a prenex instance: quantifiers in `f` are rejected; the prefix
    /// is every registered universal followed by every registered existential.
    pub fn finish_prenex(self, f: Form) -> PrenexDqbf {
        let mut matrix = Graph::new();
        let (b, ann) = build(&mut matrix, &f);
        assert!(ann.is_empty(), "prenex matrix must be quantifier-free");
        matrix.set_root(b, Annotation::new());
        let mut prefix: Vec<VarId> = self
            .vars
            .ids()
            .filter(|&v| self.vars.kind(v) == VarKind::Universal)
            .collect();
        prefix.extend(
            self.vars
                .ids()
                .filter(|&v| self.vars.kind(v) == VarKind::Existential),
        );
        PrenexDqbf {
            vars: self.vars,
            prefix,
            matrix,
        }
    }
}

fn build(g: &mut Graph, f: &Form) -> (Branch, Annotation) {
    match f {
        Form::Const(b) => (Branch::plain(g.constant(*b)), Annotation::new()),
        Form::Var(v) => (Branch::plain(g.terminal(*v)), Annotation::new()),
        Form::Not(inner) => {
            let (b, ann) = build(g, inner);
            assert!(ann.is_empty(), "negation over a quantifier is not NNF");
            (Branch::new(b.target, !b.negated), Annotation::new())
        }
        Form::And(kids) | Form::Or(kids) => {
            let kind = if matches!(f, Form::And(_)) {
                NodeKind::And
            } else {
                NodeKind::Or
            };
            assert!(!kids.is_empty());
            if kids.len() == 1 {
                return build(g, &kids[0]);
            }
            let built: Vec<(Branch, Annotation)> = kids.iter().map(|k| build(g, k)).collect();
            let n = g.new_inner(kind, built);
            (Branch::plain(n), Annotation::new())
        }
        Form::Exists(v, body) => {
            let (b, mut ann) = build(g, body);
            ann.exists.insert(*v);
            (b, ann)
        }
        Form::Forall(vs, body) => {
            let (b, mut ann) = build(g, body);
            ann.foralls.extend(vs.iter().copied());
            (b, ann)
        }
    }
}
