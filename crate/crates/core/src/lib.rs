//! Joint word embeddings from text and a knowledge graph.
//!
//! Two embedding tables are trained side by side: `w` by a two-layer neural
//! language model scored against corrupted n-grams, and `v` by one of three
//! relational objectives (graph distance, TransE, NTN). Words known to both
//! sides are tied together with an augmented Lagrangian and dual ascent on a
//! third table `y` (ADMM consensus).
//!
//! This crate is `no_std` and needs only `alloc`. File formats, configuration
//! and the command-line driver live in the `admm-embed` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod admm;
pub mod distributional;
pub mod error;
pub mod eval;
pub mod math;
pub mod relational;
pub mod rng;
pub mod table;
pub mod vocab;

pub use error::{Error, Result};
pub use rng::Rng;
pub use table::{EmbeddingTable, Role};
pub use vocab::{JointVocabulary, Vocabulary, UNK};
