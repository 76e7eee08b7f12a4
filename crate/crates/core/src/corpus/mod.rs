//! Canonical document model and ingestion.
//!
//! Raw article text is split into sentences and tokenized with deterministic
//! rules; every downstream signal and metric is defined over these tokens.

mod document;
mod entities;
mod ingest;
mod text;
mod topics;

pub use document::{Document, DocumentOptions, ReferenceSummary, Sentence, DEFAULT_MAX_SENTENCES};
pub use entities::{EntityExtractor, EntityFile, EntitySpan, HeuristicExtractor};
pub use ingest::{ingest, CorpusFormat, Ingest, IngestOptions, Record};
pub use text::{
    raw_tokens, split_sentences, tokenize, truncate_to_tokens, RawToken, SentenceSplitter, DEFAULT_ABBREVIATIONS,
};
pub use topics::{generate_topics, normalize_entity, TopicInstance, TopicOrigin, DEFAULT_MAX_TOPICS};
