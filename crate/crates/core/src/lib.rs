//! Dependency quantified Boolean formulas (DQBFs), their symmetries, and
//! conjunctive symmetry breakers.
//!
//! The crate is organised as a pipeline:
//!
//! * [`formula`] - the DQBF data model and its exact semantics,
//! * [`dqdimacs`] - QDIMACS / DQDIMACS parsing and serialisation,
//! * [`graph`] - the colored-digraph encoding of a CNF DQBF,
//! * [`autom`] - partition refinement and the automorphism group search,
//! * [`symmetry`] - literal permutations, admissibility and eligibility checks,
//! * [`breaker`] - the lex-leader symmetry breaker and its CNF encoding,
//! * [`oracle`] - brute-force ground truth for everything above,
//! * [`generators`] - crafted and random test corpora,
//! * [`pipeline`] - detect/break orchestration used by the CLI.
//!
//! With the default `parallel` feature the brute-force oracle fans work out
//! over rayon; without it every operation runs sequentially.

pub mod autom;
pub mod breaker;
pub mod dqdimacs;
pub mod formula;
pub mod generators;
pub mod graph;
pub mod oracle;
pub mod pipeline;
pub mod symmetry;

pub use formula::{Assignment, BoolExpr, Clause, Dqbf, Existential, FullAssignment, Interpretation, Literal, Prefix, Var};
