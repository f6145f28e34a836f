//! Metamorphic testing with search-generated source test suites.
//!
//! The crate bundles a small numeric language ([`dsl`]), a corpus of
//! functions written in it ([`corpus`]), source suite generators
//! ([`testgen`]), a mutant generator ([`mutation`]), the metamorphic
//! relation engine ([`mrengine`]) and the study driver ([`experiment`]).

pub mod corpus;
pub mod dsl;
pub mod experiment;
pub mod mrengine;
pub mod mutation;
pub mod seeds;
pub mod testgen;
