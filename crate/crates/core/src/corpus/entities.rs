use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::document::Document;
use super::text::{raw_tokens, RawToken};
use crate::{Error, Result};

/// One entity occurrence, addressed in sentence token coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpan {
    #[serde(rename = "sentence")]
    pub sentence_index: usize,
    #[serde(rename = "start")]
    pub token_start: usize,
    #[serde(rename = "len")]
    pub token_len: usize,
    pub surface: String,
}

impl EntitySpan {
    /// The span's tokens in `doc`, lowercased.
    pub fn tokens<'a>(&self, doc: &'a Document) -> &'a [String] {
        let sentence = &doc.sentences[self.sentence_index];
        &sentence.tokens[self.token_start..self.token_start + self.token_len]
    }

    /// Case-insensitive identity of the entity.
    pub fn normalized(&self, doc: &Document) -> String {
        self.tokens(doc).join(" ")
    }

    fn check(&self, doc: &Document) -> Result<()> {
        let sentence = doc
            .sentences
            .get(self.sentence_index)
            .ok_or_else(|| Error::InvalidDocument {
                id: doc.id.clone(),
                message: format!("entity {:?} in missing sentence {}", self.surface, self.sentence_index),
            })?;
        if self.token_len == 0 || self.token_start + self.token_len > sentence.tokens.len() {
            return Err(Error::InvalidDocument {
                id: doc.id.clone(),
                message: format!(
                    "entity {:?} spans tokens {}..{} of a {}-token sentence",
                    self.surface,
                    self.token_start,
                    self.token_start + self.token_len,
                    sentence.tokens.len()
                ),
            });
        }
        Ok(())
    }
}

pub trait EntityExtractor {
    /// Entity occurrences of `doc`, in document order.
    fn extract(&self, doc: &Document) -> Result<Vec<EntitySpan>>;
}

/// Capitalization heuristic.
///
/// An entity is a maximal run of capitalized tokens. Runs starting at the
/// first token of a sentence need at least two tokens, since sentence-initial
/// capitals are ambiguous. A run breaks where punctuation other than a period
/// separates two tokens (`Bradley, Gulati` is two runs). A leading article is
/// dropped, so `The United States` and `the United States` agree.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicExtractor;

const ARTICLES: [&str; 3] = ["the", "a", "an"];

fn capitalized(token: &RawToken<'_>) -> bool {
    token.core.chars().next().is_some_and(char::is_uppercase)
}

fn separated(left: &RawToken<'_>, right: &RawToken<'_>) -> bool {
    left.trailing().chars().any(|c| c != '.') || !right.leading().is_empty()
}

impl HeuristicExtractor {
    fn sentence_spans(sentence_index: usize, text: &str, out: &mut Vec<EntitySpan>) {
        let tokens = raw_tokens(text);
        let mut i = 0;
        while i < tokens.len() {
            if !capitalized(&tokens[i]) {
                i += 1;
                continue;
            }
            let mut end = i + 1;
            while end < tokens.len() && capitalized(&tokens[end]) && !separated(&tokens[end - 1], &tokens[end]) {
                end += 1;
            }
            let lead = &tokens[i];
            if end - i >= 2 && ARTICLES.contains(&lead.normalized().as_str()) {
                i += 1;
            }
            let len = end - i;
            if i > 0 || len >= 2 {
                let surface = tokens[i..end].iter().map(|t| t.core).collect::<Vec<_>>().join(" ");
                out.push(EntitySpan {
                    sentence_index,
                    token_start: i,
                    token_len: len,
                    surface,
                });
            }
            i = end;
        }
    }
}

impl EntityExtractor for HeuristicExtractor {
    fn extract(&self, doc: &Document) -> Result<Vec<EntitySpan>> {
        let mut spans = Vec::new();
        for sentence in &doc.sentences {
            Self::sentence_spans(sentence.index, &sentence.text, &mut spans);
        }
        Ok(spans)
    }
}

#[derive(Deserialize)]
struct EntityRecord {
    id: String,
    entities: Vec<EntitySpan>,
}

/// Precomputed entities keyed by document id, read from JSON lines
/// `{"id": .., "entities": [{"sentence", "start", "len", "surface"}]}`.
///
/// Documents absent from the file have no entities. Spans pointing past a
/// truncated document's last sentence are dropped; spans outside their
/// sentence's token bounds are an error.
#[derive(Debug, Clone, Default)]
pub struct EntityFile {
    entities: HashMap<String, Vec<EntitySpan>>,
}

impl EntityFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entities: HashMap<String, Vec<EntitySpan>> = HashMap::new();
        for (line_no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: EntityRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: line_no + 1,
                message: e.to_string(),
            })?;
            entities.entry(record.id).or_default().extend(record.entities);
        }
        Ok(Self { entities })
    }

    pub fn from_map(entities: HashMap<String, Vec<EntitySpan>>) -> Self {
        Self { entities }
    }
}

impl EntityExtractor for EntityFile {
    fn extract(&self, doc: &Document) -> Result<Vec<EntitySpan>> {
        let Some(spans) = self.entities.get(&doc.id) else {
            return Ok(Vec::new());
        };
        let mut kept = Vec::with_capacity(spans.len());
        for span in spans {
            if span.sentence_index >= doc.len() {
                continue;
            }
            span.check(doc)?;
            kept.push(span.clone());
        }
        kept.sort_by_key(|s| (s.sentence_index, s.token_start));
        Ok(kept)
    }
}
