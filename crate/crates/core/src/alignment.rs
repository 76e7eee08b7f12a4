//! Binary extractive labels by greedy alignment of a target text (a reference
//! abstract or a QA answer) against document sentences.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Document};
use crate::{Error, Result};

/// Default number of sentences aligned to a reference abstract.
pub const DEFAULT_REFERENCE_SELECT: usize = 3;
/// Default number of sentences aligned to a QA answer.
pub const DEFAULT_QA_SELECT: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    Reference,
    Qa,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractiveLabels {
    pub doc_id: String,
    pub labels: Vec<u8>,
    pub source: LabelSource,
    /// Sentence indices in the order they were selected.
    pub selected: Vec<usize>,
}

impl ExtractiveLabels {
    pub fn positives(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels.iter().enumerate().filter(|(_, &l)| l == 1).map(|(i, _)| i)
    }

    pub fn as_signal(&self) -> Vec<f64> {
        self.labels.iter().map(|&l| f64::from(l)).collect()
    }
}

/// Clipped unigram recall bookkeeping against a fixed target.
struct RecallState<'a> {
    remaining: HashMap<&'a str, usize>,
    matched: usize,
    total: usize,
}

impl<'a> RecallState<'a> {
    fn new(target: &'a [String]) -> Self {
        let mut remaining = HashMap::new();
        for t in target {
            *remaining.entry(t.as_str()).or_insert(0) += 1;
        }
        Self {
            remaining,
            matched: 0,
            total: target.len(),
        }
    }

    fn gain(&self, tokens: &[String]) -> usize {
        let mut used: HashMap<&str, usize> = HashMap::new();
        let mut gain = 0;
        for t in tokens {
            let left = self.remaining.get(t.as_str()).copied().unwrap_or(0);
            let u = used.entry(t.as_str()).or_insert(0);
            if *u < left {
                *u += 1;
                gain += 1;
            }
        }
        gain
    }

    fn take(&mut self, tokens: &[String]) {
        for t in tokens {
            if let Some(left) = self.remaining.get_mut(t.as_str()) {
                if *left > 0 {
                    *left -= 1;
                    self.matched += 1;
                }
            }
        }
    }

    fn recall(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.matched as f64 / self.total as f64
        }
    }
}

/// ROUGE-1 recall of the concatenated sentences `selected` against `target`.
pub fn selection_recall(doc: &Document, selected: &[usize], target: &[String]) -> f64 {
    let mut state = RecallState::new(target);
    for &i in selected {
        state.take(&doc.sentences[i].tokens);
    }
    state.recall()
}

fn align(doc: &Document, target_text: &str, max_select: usize, source: LabelSource) -> Result<ExtractiveLabels> {
    if max_select == 0 {
        return Err(Error::InvalidArgument("max_select must be ≥ 1".into()));
    }
    let target = tokenize(target_text);
    let mut labels = vec![0u8; doc.len()];
    let mut selected = Vec::new();
    let mut state = RecallState::new(&target);
    while selected.len() < max_select {
        // Strict `>` keeps the lowest index on ties.
        let mut best: Option<(usize, usize)> = None;
        for (i, sentence) in doc.sentences.iter().enumerate() {
            if labels[i] == 1 {
                continue;
            }
            let gain = state.gain(&sentence.tokens);
            if gain > 0 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        let Some((i, _)) = best else { break };
        state.take(&doc.sentences[i].tokens);
        labels[i] = 1;
        selected.push(i);
    }
    Ok(ExtractiveLabels {
        doc_id: doc.id.clone(),
        labels,
        source,
        selected,
    })
}

/// Picks, one at a time, the sentence that most increases ROUGE-1 recall of
/// the selection against `target_text`, until `max_select` sentences are
/// chosen or no sentence strictly increases recall.
pub fn greedy_align(doc: &Document, target_text: &str, max_select: usize) -> Result<ExtractiveLabels> {
    align(doc, target_text, max_select, LabelSource::Reference)
}

/// Aligns a QA answer span to the single best-matching sentence.
pub fn qa_labels(doc: &Document, answer_text: &str) -> Result<ExtractiveLabels> {
    align(doc, answer_text, DEFAULT_QA_SELECT, LabelSource::Qa)
}

/// `qa_labels` with a configurable selection size.
pub fn qa_labels_with(doc: &Document, answer_text: &str, max_select: usize) -> Result<ExtractiveLabels> {
    align(doc, answer_text, max_select, LabelSource::Qa)
}
