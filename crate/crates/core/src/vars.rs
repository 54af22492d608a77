//! Variable registry shared by all formula representations.
//!
//! Every variable of a formula lives in a [`VarTable`] and is addressed by a
//! dense [`VarId`]. The table records the quantifier kind, the dependency set
//! of existential variables, and — for variables introduced by duplicating
//! rewrites — which variable they are a copy of.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

/// Dense handle of a variable inside a [`VarTable`].
///
/// Ids are never reused: a variable that gets eliminated keeps its slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Quantifier kind of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum VarKind {
    Universal,
    Existential,
    Free,
}

/// Per-variable record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub kind: VarKind,
    /// Dependency set; nonempty only for existential variables.
    pub deps: BTreeSet<VarId>,
    /// `Some((base, n))` if this variable is the n-th fresh copy of `base`.
    pub origin: Option<(VarId, u32)>,
}

/// Registry of all variables of an instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarTable {
    infos: Vec<VarInfo>,
    copies: u32,
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.infos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infos.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.infos.len() as u32).map(VarId)
    }

    pub fn info(&self, v: VarId) -> &VarInfo {
        &self.infos[v.index()]
    }

    pub fn kind(&self, v: VarId) -> VarKind {
        self.infos[v.index()].kind
    }

    pub fn deps(&self, v: VarId) -> &BTreeSet<VarId> {
        &self.infos[v.index()].deps
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.infos[v.index()].name
    }

    fn push(&mut self, info: VarInfo) -> VarId {
        let id = VarId(self.infos.len() as u32);
        self.infos.push(info);
        id
    }

    pub fn add_universal(&mut self, name: impl Into<String>) -> VarId {
        self.push(VarInfo {
            name: name.into(),
            kind: VarKind::Universal,
            deps: BTreeSet::new(),
            origin: None,
        })
    }

    pub fn add_existential(
        &mut self,
        name: impl Into<String>,
        deps: impl IntoIterator<Item = VarId>,
    ) -> VarId {
        self.push(VarInfo {
            name: name.into(),
            kind: VarKind::Existential,
            deps: deps.into_iter().collect(),
            origin: None,
        })
    }

    pub fn add_free(&mut self, name: impl Into<String>) -> VarId {
        self.push(VarInfo {
            name: name.into(),
            kind: VarKind::Free,
            deps: BTreeSet::new(),
            origin: None,
        })
    }

    /// Creates a fresh copy of `of`, same kind and dependency set, with
    /// provenance back to `of`.
    pub fn fresh_copy(&mut self, of: VarId) -> VarId {
        self.copies += 1;
        let n = self.copies;
        let info = self.info(of).clone();
        self.push(VarInfo {
            name: format!("{}_c{}", info.name, n),
            kind: info.kind,
            deps: info.deps,
            origin: Some((of, n)),
        })
    }

    /// Follows the origin chain to the variable everything was copied from.
    pub fn root_base(&self, v: VarId) -> VarId {
        let mut cur = v;
        while let Some((base, _)) = self.infos[cur.index()].origin {
            cur = base;
        }
        cur
    }

    pub fn set_deps(&mut self, v: VarId, deps: BTreeSet<VarId>) {
        self.infos[v.index()].deps = deps;
    }

    /// Removes `x` from the dependency set of `y`.
    pub fn strip_dep(&mut self, y: VarId, x: VarId) -> bool {
        self.infos[y.index()].deps.remove(&x)
    }

    /// Replaces `old` by `new` in the dependency set of `y`.
    pub fn rename_dep(&mut self, y: VarId, old: VarId, new: VarId) {
        let deps = &mut self.infos[y.index()].deps;
        if deps.remove(&old) {
            deps.insert(new);
        }
    }

    /// Checks the table invariants: dependency sets only on existentials,
    /// containing only universal or free variables, and acyclic origin chains.
    pub fn validate(&self) -> Result<(), String> {
        for v in self.ids() {
            let info = self.info(v);
            if info.kind != VarKind::Existential && !info.deps.is_empty() {
                return Err(format!("{} is not existential but has a dependency set", v));
            }
            for &d in &info.deps {
                if d.index() >= self.len() {
                    return Err(format!("dependency {} of {} is unregistered", d, v));
                }
                if self.kind(d) == VarKind::Existential {
                    return Err(format!("dependency {} of {} is existential", d, v));
                }
            }
            let mut seen = BTreeSet::new();
            let mut cur = v;
            while let Some((base, _)) = self.infos[cur.index()].origin {
                if !seen.insert(cur) {
                    return Err(format!("origin chain of {} is cyclic", v));
                }
                cur = base;
            }
        }
        Ok(())
    }
}
