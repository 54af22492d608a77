//! Quantifier localization for dependency quantified Boolean formulas.
//!
//! The crate turns a closed prenex DQBF into an equisatisfiable, usually
//! simpler prenex DQBF: the matrix is normalized to NNF over a quantifier
//! graph, the prefix is pushed edge by edge into the graph, variables whose
//! local side conditions hold are eliminated symbolically, and everything
//! else is pulled back into a prefix. A brute-force Skolem-semantics oracle
//! decides desk-scale instances exactly and is used to certify every
//! transformation in the test suites.
//!
//! Front ends parse and write DQDIMACS and a QCIR-style circuit format with
//! dependency annotations; see [`io`].

pub mod counterexamples;
pub mod dqbf;
pub mod eliminate;
pub mod event;
pub mod fixtures;
pub mod formula;
pub mod generate;
pub mod graph;
pub mod io;
pub mod localize;
pub mod oracle;
pub mod pipeline;
pub mod rewrite;
pub mod vars;
pub mod wellformed;

pub use dqbf::{structurally_equal, Dqbf, PrenexDqbf};
pub use event::{Event, EventLog};
pub use graph::{linearize_prefix, Annotation, Branch, EdgeId, Graph, NodeId, NodeKind, VarPartition};
pub use oracle::{OracleConfig, OracleError, SemanticsSet, SkolemCandidate, Table};
pub use pipeline::{run, PipelineConfig, PipelineResult, Stats};
pub use rewrite::{apply_rule, Receipt, Refusal, RuleId, Soundness};
pub use vars::{VarId, VarInfo, VarKind, VarTable};
pub use wellformed::{well_formed, Violation};
