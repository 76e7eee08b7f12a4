//! Word vectors, sentence vectors and cosine similarity.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::corpus::{tokenize, Document, ReferenceSummary, Sentence, TopicInstance};
use crate::{Error, Result};

/// Immutable token → vector map with a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
}

fn finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be ≥ 1".into()));
        }
        Ok(Self {
            dim,
            entries: HashMap::new(),
        })
    }

    /// Adds a vector unless the token is already present. Returns whether it
    /// was stored.
    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::LengthMismatch {
                left: self.dim,
                right: vector.len(),
            });
        }
        if !finite(&vector) {
            return Err(Error::InvalidArgument("non-finite embedding component".into()));
        }
        let token = token.into();
        if self.entries.contains_key(&token) {
            return Ok(false);
        }
        self.entries.insert(token, vector);
        Ok(true)
    }

    /// Reads the whitespace-separated text format, one `token v1 .. vd` per
    /// line, with an optional `COUNT DIM` header line.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let parse_error = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut table: Option<Self> = None;
        let mut first = true;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if std::mem::take(&mut first) && fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok()) {
                let dim = fields[1].parse::<usize>().unwrap_or(0);
                table = Some(Self::new(dim).map_err(|e| parse_error(line_no, e.to_string()))?);
                continue;
            }
            let (token, components) = (fields[0], &fields[1..]);
            let table = match &mut table {
                Some(table) => table,
                None => table.insert(Self::new(components.len()).map_err(|e| parse_error(line_no, e.to_string()))?),
            };
            if components.len() != table.dim {
                return Err(Error::DimensionMismatch {
                    path: path.to_path_buf(),
                    line: line_no,
                    expected: table.dim,
                    found: components.len(),
                });
            }
            let vector = components
                .iter()
                .map(|c| match c.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(parse_error(line_no, format!("bad vector component {c:?}"))),
                })
                .collect::<Result<Vec<f64>>>()?;
            table.entries.entry(token.to_string()).or_insert(vector);
        }
        table.ok_or_else(|| parse_error(0, "no embedding entries".into()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    /// Mean of the in-vocabulary token vectors; zero when none are known.
    pub fn mean_vector<S: AsRef<str>>(&self, tokens: &[S]) -> SentenceVector {
        let mut sum = vec![0.0; self.dim];
        let mut known = 0usize;
        for vector in tokens.iter().filter_map(|t| self.get(t.as_ref())) {
            for (acc, v) in sum.iter_mut().zip(vector) {
                *acc += v;
            }
            known += 1;
        }
        if known > 0 {
            let count = known as f64;
            sum.iter_mut().for_each(|v| *v /= count);
        }
        SentenceVector::new(sum)
    }

    /// Copy with every vector multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().map(|x| x * alpha).collect()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceVector {
    pub vector: Vec<f64>,
    pub is_zero: bool,
}

impl SentenceVector {
    pub fn new(vector: Vec<f64>) -> Self {
        let is_zero = vector.iter().all(|&v| v == 0.0);
        Self { vector, is_zero }
    }
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let (mut dot, mut uu, mut vv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (uu.sqrt() * vv.sqrt())).clamp(-1.0, 1.0))
}

/// Mean-of-word-vectors embedding of a sentence.
pub fn sentence_vector(sentence: &Sentence, table: &EmbeddingTable) -> SentenceVector {
    table.mean_vector(&sentence.tokens)
}

/// Source of the fixed-size vectors for sentences, topics and references.
pub trait SentenceEncoder {
    fn sentence(&self, doc: &Document, index: usize) -> Result<SentenceVector>;
    fn topic(&self, topic: &TopicInstance) -> Result<SentenceVector>;
    fn reference(&self, reference: &ReferenceSummary) -> Result<SentenceVector>;
}

/// Averages word vectors; topics are embedded as one-sentence inputs.
#[derive(Debug, Clone, Copy)]
pub struct MeanEncoder<'a> {
    pub table: &'a EmbeddingTable,
}

impl<'a> MeanEncoder<'a> {
    pub fn new(table: &'a EmbeddingTable) -> Self {
        Self { table }
    }
}

impl SentenceEncoder for MeanEncoder<'_> {
    fn sentence(&self, doc: &Document, index: usize) -> Result<SentenceVector> {
        Ok(sentence_vector(&doc.sentences[index], self.table))
    }

    fn topic(&self, topic: &TopicInstance) -> Result<SentenceVector> {
        Ok(self.table.mean_vector(&tokenize(&topic.topic_text)))
    }

    fn reference(&self, reference: &ReferenceSummary) -> Result<SentenceVector> {
        Ok(self.table.mean_vector(&reference.tokens))
    }
}

#[derive(Deserialize)]
struct VectorRecord {
    id: String,
    #[serde(default)]
    sentence: Option<usize>,
    #[serde(default)]
    vec: Option<Vec<f64>>,
    #[serde(default)]
    topic: Option<String>,
    #[serde(default)]
    topic_vec: Option<Vec<f64>>,
    #[serde(default)]
    ref_vec: Option<Vec<f64>>,
}

/// Vectors exported offline by an external sentence encoder.
///
/// JSON lines of `{"id", "sentence", "vec"}`, `{"id", "topic_vec"}` (an
/// optional `"topic"` field keys the vector to one topic of the document) and
/// `{"id", "ref_vec"}`. A lookup with no matching record is an error.
#[derive(Debug, Clone, Default)]
pub struct PrecomputedVectors {
    dim: Option<usize>,
    sentences: HashMap<(String, usize), Vec<f64>>,
    topics: HashMap<(String, Option<String>), Vec<f64>>,
    references: HashMap<String, Vec<f64>>,
}

impl PrecomputedVectors {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut out = Self::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let line_no = i + 1;
            let parse_error = |message: String| Error::Parse {
                path: PathBuf::from(path),
                line: line_no,
                message,
            };
            let record: VectorRecord = serde_json::from_str(line).map_err(|e| parse_error(e.to_string()))?;
            let (vector, slot) = match (record.sentence, record.vec, record.topic_vec, record.ref_vec) {
                (Some(index), Some(v), None, None) => (v, Slot::Sentence(index)),
                (None, None, Some(v), None) => (v, Slot::Topic(record.topic)),
                (None, None, None, Some(v)) => (v, Slot::Reference),
                _ => {
                    return Err(parse_error(
                        "expected exactly one of sentence/vec, topic_vec, ref_vec".into(),
                    ))
                }
            };
            if !finite(&vector) || vector.is_empty() {
                return Err(parse_error("empty or non-finite vector".into()));
            }
            let dim = *out.dim.get_or_insert(vector.len());
            if vector.len() != dim {
                return Err(Error::DimensionMismatch {
                    path: path.to_path_buf(),
                    line: line_no,
                    expected: dim,
                    found: vector.len(),
                });
            }
            match slot {
                Slot::Sentence(index) => {
                    out.sentences.entry((record.id, index)).or_insert(vector);
                }
                Slot::Topic(topic) => {
                    let topic = topic.map(|t| tokenize(&t).join(" "));
                    out.topics.entry((record.id, topic)).or_insert(vector);
                }
                Slot::Reference => {
                    out.references.entry(record.id).or_insert(vector);
                }
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }
}

enum Slot {
    Sentence(usize),
    Topic(Option<String>),
    Reference,
}

impl SentenceEncoder for PrecomputedVectors {
    fn sentence(&self, doc: &Document, index: usize) -> Result<SentenceVector> {
        self.sentences
            .get(&(doc.id.clone(), index))
            .map(|v| SentenceVector::new(v.clone()))
            .ok_or_else(|| Error::MissingVector(format!("{} sentence {index}", doc.id)))
    }

    fn topic(&self, topic: &TopicInstance) -> Result<SentenceVector> {
        self.topics
            .get(&(topic.doc_id.clone(), Some(topic.key())))
            .or_else(|| self.topics.get(&(topic.doc_id.clone(), None)))
            .map(|v| SentenceVector::new(v.clone()))
            .ok_or_else(|| Error::MissingVector(format!("{} topic {:?}", topic.doc_id, topic.topic_text)))
    }

    fn reference(&self, reference: &ReferenceSummary) -> Result<SentenceVector> {
        self.references
            .get(&reference.doc_id)
            .map(|v| SentenceVector::new(v.clone()))
            .ok_or_else(|| Error::MissingVector(format!("{} reference", reference.doc_id)))
    }
}
