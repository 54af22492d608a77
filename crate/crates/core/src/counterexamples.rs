//! Regression formulas for the soundness boundary of quantifier
//! localization: instances where a careless scope move or distribution flips
//! satisfiability, paired with the sound original. The rewrite engine must
//! refuse the step that would turn each satisfiable instance into its
//! unsatisfiable partner.

use crate::dqbf::Dqbf;
use crate::formula::{exists, forall, nnot, var, Builder};

pub struct NamedInstance {
    pub name: &'static str,
    pub dqbf: Dqbf,
    pub expected_sat: bool,
}

fn inst(name: &'static str, dqbf: Dqbf, expected_sat: bool) -> NamedInstance {
    NamedInstance {
        name,
        dqbf,
        expected_sat,
    }
}

/// All regression instances with their expected satisfiability.
pub fn suite() -> Vec<NamedInstance> {
    vec![
        or_dep_prenex(),
        or_dep_localized(),
        or_dep_cleared(),
        and_chain_full_deps(),
        and_chain_inner_drop(),
        and_chain_cleared(),
        xor_merged(),
        xor_split(),
        overlap_merged(),
        overlap_split(),
    ]
}

/// forall x1 x2 . exists y1(x2) . ((x1 <-> x2) | (x1 xor y1)) — satisfiable.
pub fn or_dep_prenex() -> NamedInstance {
    let mut b = Builder::new();
    let x1 = b.universal("x1");
    let x2 = b.universal("x2");
    let y1 = b.existential("y1", [x2]);
    let f = forall(
        [x1, x2],
        exists(y1, var(x1).iff(var(x2)).or(var(x1).xor(var(y1)))),
    );
    inst("or_dep_prenex", b.finish(f), true)
}

/// forall x1 . ((forall x2 . x1 <-> x2) | (exists y1() . x1 xor y1)) —
/// localizing x2 away from the dependency set loses the choice; unsat.
pub fn or_dep_localized() -> NamedInstance {
    let mut b = Builder::new();
    let x1 = b.universal("x1");
    let x2 = b.universal("x2");
    let y1 = b.existential("y1", []);
    let f = forall(
        [x1],
        forall([x2], var(x1).iff(var(x2))).or(exists(y1, var(x1).xor(var(y1)))),
    );
    inst("or_dep_localized", b.finish(f), false)
}

/// forall x1 x2 . exists y1() . ((x1 <-> x2) | (x1 xor y1)) — unsat.
pub fn or_dep_cleared() -> NamedInstance {
    let mut b = Builder::new();
    let x1 = b.universal("x1");
    let x2 = b.universal("x2");
    let y1 = b.existential("y1", []);
    let f = forall(
        [x1, x2],
        exists(y1, var(x1).iff(var(x2)).or(var(x1).xor(var(y1)))),
    );
    inst("or_dep_cleared", b.finish(f), false)
}

/// forall x1 x2 . exists y1(x1,x2) y2(x1,x2) .
/// (y1 <-> ~y2) & (y2 <-> (x1 & x2)) — satisfiable.
pub fn and_chain_full_deps() -> NamedInstance {
    let mut b = Builder::new();
    let x1 = b.universal("x1");
    let x2 = b.universal("x2");
    let y1 = b.existential("y1", [x1, x2]);
    let y2 = b.existential("y2", [x1, x2]);
    let f = forall(
        [x1, x2],
        exists(
            y1,
            exists(
                y2,
                var(y1)
                    .iff(nnot(var(y2)))
                    .and(var(y2).iff(var(x1).and(var(x2)))),
            ),
        ),
    );
    inst("and_chain_full_deps", b.finish(f), true)
}

/// forall x1 x2 . exists y2(x1,x2) .
/// ((exists y1() . y1 <-> ~y2) & (y2 <-> (x1 & x2))) — unsat.
pub fn and_chain_inner_drop() -> NamedInstance {
    let mut b = Builder::new();
    let x1 = b.universal("x1");
    let x2 = b.universal("x2");
    let y1 = b.existential("y1", []);
    let y2 = b.existential("y2", [x1, x2]);
    let f = forall(
        [x1, x2],
        exists(
            y2,
            exists(y1, var(y1).iff(nnot(var(y2))))
                .and(var(y2).iff(var(x1).and(var(x2)))),
        ),
    );
    inst("and_chain_inner_drop", b.finish(f), false)
}

/// forall x1 x2 . exists y1() y2(x1,x2) . same matrix — unsat.
pub fn and_chain_cleared() -> NamedInstance {
    let mut b = Builder::new();
    let x1 = b.universal("x1");
    let x2 = b.universal("x2");
    let y1 = b.existential("y1", []);
    let y2 = b.existential("y2", [x1, x2]);
    let f = forall(
        [x1, x2],
        exists(
            y1,
            exists(
                y2,
                var(y1)
                    .iff(nnot(var(y2)))
                    .and(var(y2).iff(var(x1).and(var(x2)))),
            ),
        ),
    );
    inst("and_chain_cleared", b.finish(f), false)
}

/// forall x . exists y() . ((x & y) | (~x & ~y)) — unsat: y is constant.
pub fn xor_merged() -> NamedInstance {
    let mut b = Builder::new();
    let x = b.universal("x");
    let y = b.existential("y", []);
    let f = forall(
        [x],
        exists(
            y,
            var(x).and(var(y)).or(nnot(var(x)).and(nnot(var(y)))),
        ),
    );
    inst("xor_merged", b.finish(f), false)
}

/// forall x . ((exists y() . x & y) | (exists y2() . ~x & ~y2)) — sat.
pub fn xor_split() -> NamedInstance {
    let mut b = Builder::new();
    let x = b.universal("x");
    let y = b.existential("y", []);
    let y2 = b.existential("y2", []);
    let f = forall(
        [x],
        exists(y, var(x).and(var(y))).or(exists(y2, nnot(var(x)).and(nnot(var(y2))))),
    );
    inst("xor_split", b.finish(f), true)
}

/// forall x1 x2 . ((exists y() . (x1 & y) | (x2 & ~y)) | (~x1 & ~x2)) — unsat.
pub fn overlap_merged() -> NamedInstance {
    let mut b = Builder::new();
    let x1 = b.universal("x1");
    let x2 = b.universal("x2");
    let y = b.existential("y", []);
    let f = forall(
        [x1, x2],
        exists(y, var(x1).and(var(y)).or(var(x2).and(nnot(var(y)))))
            .or(nnot(var(x1)).and(nnot(var(x2)))),
    );
    inst("overlap_merged", b.finish(f), false)
}

/// forall x1 x2 . (((exists y() . x1 & y) | (exists y2() . x2 & ~y2)) |
/// (~x1 & ~x2)) — sat: the split decouples the two choices.
pub fn overlap_split() -> NamedInstance {
    let mut b = Builder::new();
    let x1 = b.universal("x1");
    let x2 = b.universal("x2");
    let y = b.existential("y", []);
    let y2 = b.existential("y2", []);
    let f = forall(
        [x1, x2],
        exists(y, var(x1).and(var(y)))
            .or(exists(y2, var(x2).and(nnot(var(y2)))))
            .or(nnot(var(x1)).and(nnot(var(x2)))),
    );
    inst("overlap_split", b.finish(f), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{is_sat, OracleConfig};

    #[test]
    fn suite_matches_expected_satisfiability() {
        let cfg = OracleConfig::default();
        for inst in suite() {
            let got = is_sat(&inst.dqbf, &cfg).unwrap();
            assert_eq!(got, inst.expected_sat, "instance {}", inst.name);
        }
    }
}
