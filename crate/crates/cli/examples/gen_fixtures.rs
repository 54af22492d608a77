//! Regenerates the committed fixture corpus under `tests/fixtures/`.
//! Deterministic: fixed seeds, fixed shapes. Run from the workspace root:
//! `cargo run -p dqbfloc --example gen_fixtures`.

use std::path::PathBuf;

use dqbfloc_core::fixtures;
use dqbfloc_core::generate::{random_cnf, random_prenex, GenConfig};
use dqbfloc_core::io::{write_dqcir, write_dqdimacs};

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    std::fs::create_dir_all(&dir).expect("create fixtures dir");

    // handwritten instances
    std::fs::write(dir.join("scoped_choice.dqdimacs"), fixtures::SCOPED_CHOICE_DQDIMACS).unwrap();
    std::fs::write(dir.join("running_circuit.dqcir"), fixtures::RUNNING_CIRCUIT_DQCIR).unwrap();
    std::fs::write(
        dir.join("cleared_dep.dqdimacs"),
        "p cnf 3 2\na 1 2 0\nd 3 0\n1 -2 3 0\n-1 2 -3 0\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("xor_split.dqcir"),
        "#QCIR-G14\nforall(x)\nexists(y1)\ndepend(y1)\nexists(y2)\ndepend(y2)\noutput(g1)\n\
         g1 = or(g2, g3)\ng2 = and(x, y1)\ng3 = and(-x, -y2)\n",
    )
    .unwrap();

    // generated CNF instances (small dependency sets keep the oracle happy)
    for seed in 0..8u64 {
        let p = random_cnf(0xd1ce + seed, &GenConfig::default());
        let text = write_dqdimacs(&p).expect("CNF by construction");
        std::fs::write(dir.join(format!("rand_cnf_{:02}.dqdimacs", seed)), text).unwrap();
    }

    // generated circuit instances; most stay small enough that their
    // definitional re-encoding is oracle-checkable
    let small = GenConfig {
        max_universals: 2,
        max_inner: 4,
        ..GenConfig::default()
    };
    for seed in 0..6u64 {
        let p = random_prenex(0xc1c + seed, &small);
        std::fs::write(
            dir.join(format!("rand_circuit_{:02}.dqcir", seed)),
            write_dqcir(&p),
        )
        .unwrap();
    }
    for seed in 6..8u64 {
        let p = random_prenex(0xc1c + seed, &GenConfig::default());
        std::fs::write(
            dir.join(format!("rand_circuit_{:02}.dqcir", seed)),
            write_dqcir(&p),
        )
        .unwrap();
    }
    println!("fixtures written to {}", dir.display());
}
