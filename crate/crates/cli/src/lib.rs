//! Library side of the `dqbfloc` binary: the built-in self-test, reused by
//! the acceptance suite.

pub mod selftest;
