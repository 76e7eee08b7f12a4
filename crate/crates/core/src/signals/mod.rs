//! Per-sentence supervision signals for a (document, topic, reference) triple.
//!
//! Every signal is a list of values in `[0, 1]`, one per sentence. Signals
//! whose inputs are missing (no reference, no QA answer) are omitted from the
//! matrix rather than zero-filled.

mod qa;
mod relevance;
mod similarity;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alignment::{greedy_align, qa_labels_with, DEFAULT_QA_SELECT, DEFAULT_REFERENCE_SELECT};
use crate::corpus::{Document, EntitySpan, ReferenceSummary, TopicInstance};
use crate::embeddings::{EmbeddingTable, SentenceEncoder};
use crate::{Error, Result};

pub use qa::QaAnswers;
pub use relevance::{keywords, rule_signal, word_sim_signal, STOPWORDS};
pub use similarity::{ref_sent_signal, sent_sent_signal, topic_sent_signal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalName {
    /// Reference-aligned extractive labels.
    Ext,
    /// Topic keyword occurs in the sentence.
    Rule,
    /// Best entity-to-topic-entity word similarity.
    WordSim,
    /// Topic-to-sentence embedding similarity.
    TopicSent,
    /// Reference-to-sentence embedding similarity.
    RefSent,
    /// Mean similarity to the other sentences.
    SentSent,
    /// QA-answer-aligned labels.
    Qa,
}

impl SignalName {
    pub const ALL: [SignalName; 7] = [
        SignalName::Ext,
        SignalName::Rule,
        SignalName::WordSim,
        SignalName::TopicSent,
        SignalName::RefSent,
        SignalName::SentSent,
        SignalName::Qa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SignalName::Ext => "ext",
            SignalName::Rule => "rule",
            SignalName::WordSim => "word_sim",
            SignalName::TopicSent => "topic_sent",
            SignalName::RefSent => "ref_sent",
            SignalName::SentSent => "sent_sent",
            SignalName::Qa => "qa",
        }
    }

    /// Signals restricted to exactly 0 or 1.
    pub fn is_binary(self) -> bool {
        matches!(self, SignalName::Ext | SignalName::Rule | SignalName::Qa)
    }

    /// Parses a comma-separated list such as `ext,qa`.
    pub fn parse_list(list: &str) -> Result<BTreeSet<SignalName>> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for SignalName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignalName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SignalName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown signal {s:?}")))
    }
}

/// Signal values of one instance, keyed by signal name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignalRecord", into = "SignalRecord")]
pub struct SignalMatrix {
    pub doc_id: String,
    pub topic_text: String,
    pub n: usize,
    pub values: BTreeMap<SignalName, Vec<f64>>,
}

/// Interchange form: `{"id", "topic", "signals": {name: [..]}}`.
#[derive(Serialize, Deserialize)]
struct SignalRecord {
    id: String,
    topic: String,
    signals: BTreeMap<SignalName, Vec<f64>>,
}

impl TryFrom<SignalRecord> for SignalMatrix {
    type Error = Error;

    fn try_from(record: SignalRecord) -> Result<Self> {
        let n = record.signals.values().next().map_or(0, Vec::len);
        let matrix = SignalMatrix {
            doc_id: record.id,
            topic_text: record.topic,
            n,
            values: record.signals,
        };
        matrix.validate()?;
        Ok(matrix)
    }
}

impl From<SignalMatrix> for SignalRecord {
    fn from(matrix: SignalMatrix) -> Self {
        SignalRecord {
            id: matrix.doc_id,
            topic: matrix.topic_text,
            signals: matrix.values,
        }
    }
}

impl SignalMatrix {
    pub fn get(&self, name: SignalName) -> Option<&[f64]> {
        self.values.get(&name).map(Vec::as_slice)
    }

    pub fn present(&self) -> impl Iterator<Item = SignalName> + '_ {
        self.values.keys().copied()
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::NoSignals {
                doc_id: self.doc_id.clone(),
                topic: self.topic_text.clone(),
            });
        }
        for (&name, values) in &self.values {
            let invalid = |message: String| Error::InvalidSignal {
                doc_id: self.doc_id.clone(),
                name,
                message,
            };
            if values.len() != self.n {
                return Err(invalid(format!("{} values for {} sentences", values.len(), self.n)));
            }
            if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(invalid(format!("value {v} outside [0, 1]")));
            }
            if matches!(name, SignalName::Ext | SignalName::Qa) && values.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(invalid("label signal must be 0 or 1".into()));
            }
        }
        Ok(())
    }
}

/// General-summary labels: the reference aligned to at most `max_select`
/// sentences.
pub fn ext_signal(doc: &Document, reference: &ReferenceSummary, max_select: usize) -> Result<Vec<f64>> {
    Ok(greedy_align(doc, &reference.text, max_select)?.as_signal())
}

/// QA-induced labels from an external answer span.
pub fn qa_signal(doc: &Document, answer_text: &str, max_select: usize) -> Result<Vec<f64>> {
    Ok(qa_labels_with(doc, answer_text, max_select)?.as_signal())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalConfig {
    pub enabled: BTreeSet<SignalName>,
    pub ext_max_select: usize,
    pub qa_max_select: usize,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            enabled: SignalName::ALL.into_iter().collect(),
            ext_max_select: DEFAULT_REFERENCE_SELECT,
            qa_max_select: DEFAULT_QA_SELECT,
        }
    }
}

/// Everything known about one (document, topic) instance.
#[derive(Debug, Clone, Copy)]
pub struct SignalInputs<'a> {
    pub doc: &'a Document,
    pub entities: &'a [EntitySpan],
    pub topic: &'a TopicInstance,
    pub reference: Option<&'a ReferenceSummary>,
    pub qa_answer: Option<&'a str>,
}

/// Computes every enabled signal whose inputs are available.
pub fn build_matrix(
    inputs: &SignalInputs<'_>,
    config: &SignalConfig,
    table: &EmbeddingTable,
    encoder: &dyn SentenceEncoder,
) -> Result<SignalMatrix> {
    let doc = inputs.doc;
    let mut values = BTreeMap::new();
    for &name in &config.enabled {
        let row = match name {
            SignalName::Ext => inputs
                .reference
                .map(|r| ext_signal(doc, r, config.ext_max_select))
                .transpose()?,
            SignalName::Rule => Some(rule_signal(doc, inputs.topic)?),
            SignalName::WordSim => Some(word_sim_signal(
                doc,
                inputs.entities,
                &inputs.topic.topic_entities,
                table,
            )),
            SignalName::TopicSent => Some(topic_sent_signal(doc, inputs.topic, encoder)?),
            SignalName::RefSent => inputs.reference.map(|r| ref_sent_signal(doc, r, encoder)).transpose()?,
            SignalName::SentSent => Some(sent_sent_signal(doc, encoder)?),
            SignalName::Qa => inputs
                .qa_answer
                .map(|a| qa_signal(doc, a, config.qa_max_select))
                .transpose()?,
        };
        if let Some(row) = row {
            values.insert(name, row);
        }
    }
    let matrix = SignalMatrix {
        doc_id: doc.id.clone(),
        topic_text: inputs.topic.topic_text.clone(),
        n: doc.len(),
        values,
    };
    matrix.validate()?;
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EntityExtractor, HeuristicExtractor};
    use crate::embeddings::MeanEncoder;
    use std::path::Path;

    fn fixture() -> (
        Document,
        Vec<EntitySpan>,
        TopicInstance,
        ReferenceSummary,
        EmbeddingTable,
    ) {
        let doc =
            Document::from_sentences("d", ["the fans saw City win", "Vieira left the club", "rain fell"]).unwrap();
        let entities = HeuristicExtractor.extract(&doc).unwrap();
        let topic = TopicInstance::provided("d", "City").unwrap();
        let reference = ReferenceSummary::new("d", "City win again").unwrap();
        let table = EmbeddingTable::parse(
            "city 1 0 0\nwin 0 1 0\nvieira 0 0 1\nclub 0.5 0.5 0\nrain 0 0.2 0.9\nfell 0.1 0 1",
            Path::new("t"),
        )
        .unwrap();
        (doc, entities, topic, reference, table)
    }

    #[test]
    fn all_seven_rows() {
        let (doc, entities, topic, reference, table) = fixture();
        let inputs = SignalInputs {
            doc: &doc,
            entities: &entities,
            topic: &topic,
            reference: Some(&reference),
            qa_answer: Some("saw City win"),
        };
        let matrix = build_matrix(&inputs, &SignalConfig::default(), &table, &MeanEncoder::new(&table)).unwrap();
        assert_eq!(matrix.values.len(), 7);
        assert_eq!(matrix.get(SignalName::Ext).unwrap(), [1.0, 0.0, 0.0]);
        assert_eq!(matrix.get(SignalName::Qa).unwrap(), [1.0, 0.0, 0.0]);
        assert_eq!(matrix.get(SignalName::Rule).unwrap(), [1.0, 0.0, 0.0]);
        assert_eq!(matrix.get(SignalName::WordSim).unwrap(), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn missing_inputs_omit_rows() {
        let (doc, entities, topic, _, table) = fixture();
        let inputs = SignalInputs {
            doc: &doc,
            entities: &entities,
            topic: &topic,
            reference: None,
            qa_answer: None,
        };
        let matrix = build_matrix(&inputs, &SignalConfig::default(), &table, &MeanEncoder::new(&table)).unwrap();
        let names: Vec<_> = matrix.present().collect();
        assert_eq!(
            names,
            [
                SignalName::Rule,
                SignalName::WordSim,
                SignalName::TopicSent,
                SignalName::SentSent
            ]
        );

        let mut config = SignalConfig::default();
        config.enabled.remove(&SignalName::SentSent);
        let matrix = build_matrix(&inputs, &config, &table, &MeanEncoder::new(&table)).unwrap();
        assert!(matrix.get(SignalName::SentSent).is_none());

        config.enabled = [SignalName::Ext, SignalName::Qa].into_iter().collect();
        let err = build_matrix(&inputs, &config, &table, &MeanEncoder::new(&table)).unwrap_err();
        assert!(matches!(err, Error::NoSignals { .. }));
    }

    #[test]
    fn matrix_record_round_trip() {
        let (doc, entities, topic, reference, table) = fixture();
        let inputs = SignalInputs {
            doc: &doc,
            entities: &entities,
            topic: &topic,
            reference: Some(&reference),
            qa_answer: None,
        };
        let matrix = build_matrix(&inputs, &SignalConfig::default(), &table, &MeanEncoder::new(&table)).unwrap();
        let json = serde_json::to_string(&matrix).unwrap();
        assert!(json.starts_with("{\"id\":\"d\",\"topic\":\"City\",\"signals\":{\"ext\":"));
        let back: SignalMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, matrix);
    }

    #[test]
    fn invalid_records_rejected() {
        let bad = [
            r#"{"id": "d", "topic": "t", "signals": {}}"#,
            r#"{"id": "d", "topic": "t", "signals": {"rule": [1.5]}}"#,
            r#"{"id": "d", "topic": "t", "signals": {"rule": [1], "qa": [0, 1]}}"#,
            r#"{"id": "d", "topic": "t", "signals": {"ext": [0.5]}}"#,
            r#"{"id": "d", "topic": "t", "signals": {"bogus": [0.5]}}"#,
        ];
        for text in bad {
            assert!(serde_json::from_str::<SignalMatrix>(text).is_err(), "{text}");
        }
    }

    #[test]
    fn names_parse() {
        let set = SignalName::parse_list("ext, qa").unwrap();
        assert_eq!(set.into_iter().collect::<Vec<_>>(), [SignalName::Ext, SignalName::Qa]);
        assert!(SignalName::parse_list("ext,nope").is_err());
        for name in SignalName::ALL {
            assert_eq!(name.as_str().parse::<SignalName>().unwrap(), name);
            assert_eq!(serde_json::to_string(&name).unwrap(), format!("\"{name}\""));
        }
    }
}
