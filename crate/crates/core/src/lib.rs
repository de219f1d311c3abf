//! A workbench for a concurrent monadic metalanguage: syntax, typing, a
//! finite-store semantic model with lazy resumptions, elaboration of guarded
//! corecursive schemes, and verification of Hoare triples, invariants and
//! safety properties.

pub mod corec;
pub mod dekker;
pub mod gen;
pub mod model;
pub mod program;
pub mod resumption;
pub mod syntax;
pub mod typecheck;
pub mod verify;
