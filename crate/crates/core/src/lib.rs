//! Label-free topic-based extractive summarization.
//!
//! Per-sentence supervision signals (rule indicators, embedding similarities,
//! reference alignment, external QA answers) are fused into soft targets, a
//! logistic sentence scorer is trained against them, and budget-constrained
//! summaries are scored with ROUGE-1/2/L.

pub mod alignment;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod scorer;
pub mod signals;
pub mod synth;

pub use error::{Error, Result};
