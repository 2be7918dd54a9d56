//! Retrieval-based ECG report generation and retrieval-grounded zero-shot
//! question answering.
//!
//! The pipeline embeds ECG recordings into unit-norm vectors, indexes them,
//! and answers two kinds of requests against the index:
//!
//! * report generation: the report of the nearest stored recording is the
//!   prediction (optionally rewritten by an LLM);
//! * question answering: the reports and diagnoses labels of the `k` nearest
//!   recordings are placed in a chat prompt and the LLM's JSON answer is
//!   scored by exact match.
//!
//! Vector math in [`vindex`] is generic over the scalar type; the aliases
//! below pin the `f32` instantiation used by the on-disk formats.

pub mod corpus;
pub mod error;
pub mod featurizer;
pub mod metrics;
pub mod qa;
pub mod retrieval;
pub mod runner;
pub mod scalar;
pub mod vindex;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact index over `f32` embeddings, the type persisted by the index file format.
pub type FlatIndexF32 = vindex::FlatIndex<f32>;
/// IVF index over `f32` embeddings.
pub type IvfIndexF32 = vindex::IvfIndex<f32>;
/// Runtime-selected `f32` index.
pub type AnyIndexF32 = vindex::AnyIndex<f32>;
/// Search hit with an `f32` distance.
pub type NeighborF32 = vindex::Neighbor<f32>;

/// `f64` instantiations, used where extra precision is wanted (oracles, analysis).
pub type FlatIndexF64 = vindex::FlatIndex<f64>;
pub type IvfIndexF64 = vindex::IvfIndex<f64>;
pub type NeighborF64 = vindex::Neighbor<f64>;
