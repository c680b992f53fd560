//! DIMACS front end for the symbreak preprocessor: CNF reading and
//! writing, a model graph dump, JSON run reports and the command line.

pub mod cli;
pub mod dimacs;
pub mod graph_dump;
pub mod stats;

pub use symbreak_core;
