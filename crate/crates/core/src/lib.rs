//! Single-IDS-correcting codebooks built by greedy search in a learned
//! Levenshtein embedding, and segment correction by nearest-neighbour search
//! in that embedding with exact Levenshtein confirmation.

pub mod codebook;
pub mod decoder;
pub mod edit;
pub mod harness;
pub mod error;
pub mod levenshtein;
pub mod model;
pub mod rng;
pub mod seq;
pub mod space;

pub use error::{Error, Result};
pub use codebook::Codebook;
pub use seq::Sequence;
