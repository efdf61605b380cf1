//! Mining parallel sentences from comparable lecture transcripts.
//!
//! The crate covers the whole offline pipeline: cleaning raw transcript
//! pairs, attaching machine translations, scoring chunk similarity,
//! aligning with greedy / min-cost flow / dynamic programming, benchmarking
//! against gold alignments, the document-aware human filtering loop that
//! produces evaluation splits, and n-gram language model profiling.

pub mod align;
pub mod cleaning;
pub mod corpus;
pub mod dataset;
mod error;
pub mod lm;
pub mod similarity;
pub mod synthetic;
pub mod translate;

pub use error::{Error, Result};
