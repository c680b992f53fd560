//! Structure-aware static symmetry breaking for CNF formulas.
//!
//! The crate detects row, row-column and Johnson symmetry groups on the model
//! graph of a formula by individualization-refinement, verifies every
//! candidate permutation against the formula, and produces lex-leader and
//! binary breaking clauses. It needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod breaking;
pub mod cnf;
pub mod detect;
pub mod graph;
pub mod pipeline;
pub mod refine;
pub mod remainder;
pub mod testkit;

pub use cnf::{Formula, Lit, LiteralPermutation};
pub use graph::{build_model_graph, ColoredGraph};
pub use pipeline::{run, BreakerOutput, Config};
