use serde::{Deserialize, Serialize};

use super::text::{tokenize, SentenceSplitter};
use crate::{Error, Result};

pub const DEFAULT_MAX_SENTENCES: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    pub tokens: Vec<String>,
}

/// An ingested article: non-empty, contiguously indexed sentences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
    pub source_path: String,
}

#[derive(Debug, Clone)]
pub struct DocumentOptions {
    pub splitter: SentenceSplitter,
    /// Documents keep only their first `max_sentences` sentences.
    pub max_sentences: usize,
}

impl Default for DocumentOptions {
    fn default() -> Self {
        Self {
            splitter: SentenceSplitter::default(),
            max_sentences: DEFAULT_MAX_SENTENCES,
        }
    }
}

impl Document {
    /// Segments and tokenizes raw article text. Sentences without tokens are
    /// dropped before indexing.
    pub fn from_text(
        id: impl Into<String>,
        text: &str,
        source_path: impl Into<String>,
        options: &DocumentOptions,
    ) -> Result<Self> {
        let pieces = options.splitter.split(text);
        Self::build(id.into(), pieces, source_path.into(), options.max_sentences)
    }

    /// Builds a document treating each string as exactly one sentence.
    pub fn from_sentences<I, S>(id: impl Into<String>, sentences: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let owned: Vec<S> = sentences.into_iter().collect();
        Self::build(id.into(), owned.iter().map(AsRef::as_ref), String::new(), usize::MAX)
    }

    fn build<'a>(
        id: String,
        pieces: impl IntoIterator<Item = &'a str>,
        source_path: String,
        max_sentences: usize,
    ) -> Result<Self> {
        let sentences: Vec<Sentence> = pieces
            .into_iter()
            .filter_map(|text| {
                let tokens = tokenize(text);
                (!tokens.is_empty()).then(|| (text.trim().to_string(), tokens))
            })
            .take(max_sentences)
            .enumerate()
            .map(|(index, (text, tokens))| Sentence { index, text, tokens })
            .collect();
        if sentences.is_empty() {
            return Err(Error::EmptyDocument { id });
        }
        Ok(Self {
            id,
            sentences,
            source_path,
        })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }

    /// Checks the invariants of a document read back from a store file.
    pub fn validate(&self) -> Result<()> {
        let invalid = |message: String| Error::InvalidDocument {
            id: self.id.clone(),
            message,
        };
        if self.sentences.is_empty() {
            return Err(Error::EmptyDocument { id: self.id.clone() });
        }
        for (i, sentence) in self.sentences.iter().enumerate() {
            if sentence.index != i {
                return Err(invalid(format!("sentence {i} carries index {}", sentence.index)));
            }
            if sentence.tokens.is_empty() {
                return Err(invalid(format!("sentence {i} has no tokens")));
            }
            if tokenize(&sentence.text) != sentence.tokens {
                return Err(invalid(format!("sentence {i} tokens do not match its text")));
            }
        }
        Ok(())
    }
}

/// A general (usually abstractive) reference summary of a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    pub doc_id: String,
    pub text: String,
    pub tokens: Vec<String>,
}

impl ReferenceSummary {
    /// `None` when the text has no tokens.
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Option<Self> {
        let text = text.into();
        let tokens = tokenize(&text);
        (!tokens.is_empty()).then(|| Self {
            doc_id: doc_id.into(),
            text,
            tokens,
        })
    }
}
