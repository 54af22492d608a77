//! Shared helpers for the criterion benches.

use dqbfloc_core::generate::{random_prenex, GenConfig};
use dqbfloc_core::PrenexDqbf;

/// A deterministic batch of generated instances at the given size knobs.
pub fn instance_batch(count: usize, max_inner: usize) -> Vec<PrenexDqbf> {
    let cfg = GenConfig {
        max_inner,
        ..GenConfig::default()
    };
    (0..count as u64)
        .map(|seed| random_prenex(0xb0e1 + seed, &cfg))
        .collect()
}
