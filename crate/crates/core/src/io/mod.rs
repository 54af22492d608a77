//! File formats: DQDIMACS (CNF matrices with dependency lines) and a
//! QCIR-style circuit format with `depend` annotations.

pub mod dqcir;
pub mod dqdimacs;
pub mod tseitin;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: dependency variable {var} was not declared universal")]
    UndeclaredDependency { line: usize, var: String },
    #[error("line {line}: variable {var} quantified more than once")]
    DuplicateQuantification { line: usize, var: String },
    #[error("line {line}: undefined wire {wire}")]
    UndefinedWire { line: usize, wire: String },
    #[error("cyclic definition of wire {wire}")]
    CyclicDefinition { wire: String },
    #[error("line {line}: duplicate output")]
    DuplicateOutput { line: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WriteError {
    #[error("matrix is not in CNF shape: {0}")]
    NotCnf(String),
}

pub use dqcir::{parse_dqcir, write_dqcir};
pub use dqdimacs::{parse_dqdimacs, write_dqdimacs};
pub use tseitin::tseitin_encode;
