//! Shared example instances used by the self-test, the acceptance suite,
//! and the benches.

use crate::dqbf::{Dqbf, PrenexDqbf};
use crate::formula::{exists, forall, var, Builder};
use crate::vars::VarId;

/// `forall x1 x2 . ((x1 <-> x2) | exists y1(x2) . (x1 xor y1))`
/// — satisfiable, with exactly one Skolem function (`y1 = x2`) among four
/// candidates.
pub fn scoped_choice() -> (Dqbf, VarId, VarId, VarId) {
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

/// The prenex form of [`scoped_choice`]:
/// `forall x1 x2 . exists y1(x2) . ((x1 <-> x2) | (x1 xor y1))`.
pub fn scoped_choice_prenex() -> (PrenexDqbf, VarId, VarId, VarId) {
    let mut b = Builder::new();
    let x1 = b.universal("x1");
    let x2 = b.universal("x2");
    let y1 = b.existential("y1", [x2]);
    let f = var(x1).iff(var(x2)).or(var(x1).xor(var(y1)));
    (b.finish_prenex(f), x1, x2, y1)
}

/// The running circuit: `forall x1 x2 . exists y1(x1) y2(x2) .`
/// `(y1&x1) | (x1&~x2) | (~y1&~x1) | ((x2|~y2)&(~x2|y2))`, written as a
/// two-level or-tree over four and-gates. Localization distributes `y1`,
/// groups the `x2`-children, and local elimination reduces everything to
/// the constant true.
pub const RUNNING_CIRCUIT_DQCIR: &str = "\
#QCIR-G14
forall(x1, x2)
exists(y1)
depend(y1, x1)
exists(y2)
depend(y2, x2)
output(g1)
g1 = or(g2, g3)
g2 = or(g4, g5)
g3 = or(g6, g7)
g4 = and(y1, x1)
g5 = and(x1, -x2)
g6 = and(-y1, -x1)
g7 = and(g8, g9)
g8 = or(x2, -y2)
g9 = or(-x2, y2)
";

pub fn running_circuit() -> PrenexDqbf {
    crate::io::parse_dqcir(RUNNING_CIRCUIT_DQCIR).expect("fixture parses")
}

/// CNF twin of [`scoped_choice_prenex`] in DQDIMACS syntax (variable 3 is
/// the choice variable, depending on variable 2).
pub const SCOPED_CHOICE_DQDIMACS: &str = "\
p cnf 3 2
a 1 2 0
d 3 2 0
1 -2 3 0
-1 2 -3 0
";

pub fn scoped_choice_cnf() -> PrenexDqbf {
    crate::io::parse_dqdimacs(SCOPED_CHOICE_DQDIMACS).expect("fixture parses")
}
