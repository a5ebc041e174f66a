//! Automorphism-invariant quasimorphisms on graph products of cyclic groups.
//!
//! The pipeline is: parse a labelled graph, expand finite labels into their
//! primary parts, compute the transvection preorder and its lower cones, then
//! build homogenised code quasimorphisms pulled back along retractions and
//! averaged over labelled-graph automorphisms.

pub mod autos;
pub mod codes;
pub mod decision;
pub mod exec;
pub mod families;
pub mod graph;
pub mod invariant;
pub mod rational;
pub mod scl;
pub mod word;

pub use exec::Exec;
pub use graph::{LabeledGraph, VertexGroup, VertexSet};
pub use word::{NormalWord, Side};
