//! Logistic sentence scorer trained on fused soft targets, plus ranking and
//! budget-constrained summary selection.
//!
//! Features only use what exists at inference time (topic, embeddings, the
//! document itself). Reference- and QA-derived signals reach the model only
//! through the training targets.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{truncate_to_tokens, Document, TopicInstance};
use crate::eval::rouge_n;
use crate::fusion::FusedLabels;
use crate::signals::{SignalMatrix, SignalName};
use crate::{Error, Result};

/// Token budget of the `twenty_words` mode.
pub const WORD_BUDGET: usize = 20;
/// Sentence length (in tokens) at which the length feature saturates.
const LENGTH_SCALE: f64 = 30.0;

/// Signals used directly as features, each paired with a presence flag.
pub const FEATURE_SIGNALS: [SignalName; 4] = [
    SignalName::Rule,
    SignalName::WordSim,
    SignalName::TopicSent,
    SignalName::SentSent,
];

pub const FEATURE_NAMES: [&str; 12] = [
    "position",
    "length",
    "rule",
    "word_sim",
    "topic_sent",
    "sent_sent",
    "topic_overlap",
    "bias",
    "has_rule",
    "has_word_sim",
    "has_topic_sent",
    "has_sent_sent",
];

pub const BIAS_INDEX: usize = 7;
pub const FEATURE_COUNT: usize = FEATURE_NAMES.len();

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    OneSentence,
    TwentyWords,
}

impl BudgetMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BudgetMode::OneSentence => "one_sentence",
            BudgetMode::TwentyWords => "twenty_words",
        }
    }
}

impl fmt::Display for BudgetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BudgetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one_sentence" => Ok(BudgetMode::OneSentence),
            "twenty_words" => Ok(BudgetMode::TwentyWords),
            other => Err(Error::InvalidArgument(format!("unknown budget mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceFeatures(pub Vec<f64>);

/// One feature vector per sentence; see [`FEATURE_NAMES`] for the layout.
pub fn featurize(doc: &Document, topic: &TopicInstance, matrix: &SignalMatrix) -> Vec<SentenceFeatures> {
    let n = doc.len();
    let topic_tokens: HashSet<String> = topic.tokens().into_iter().collect();
    doc.sentences
        .iter()
        .enumerate()
        .map(|(i, sentence)| {
            let mut f = Vec::with_capacity(FEATURE_COUNT);
            f.push(i as f64 / n as f64);
            f.push((sentence.tokens.len() as f64 / LENGTH_SCALE).min(1.0));
            for name in FEATURE_SIGNALS {
                f.push(matrix.get(name).and_then(|v| v.get(i).copied()).unwrap_or(0.0));
            }
            let overlap = sentence.tokens.iter().filter(|t| topic_tokens.contains(*t)).count();
            f.push(overlap as f64 / sentence.tokens.len() as f64);
            f.push(1.0);
            for name in FEATURE_SIGNALS {
                f.push(if matrix.get(name).is_some() { 1.0 } else { 0.0 });
            }
            SentenceFeatures(f)
        })
        .collect()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearScorer {
    pub weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    feature_names: Vec<String>,
    weights: Vec<f64>,
}

impl LinearScorer {
    pub fn zeros() -> Self {
        Self {
            weights: vec![0.0; FEATURE_COUNT],
        }
    }

    pub fn logit(&self, features: &SentenceFeatures) -> f64 {
        self.weights.iter().zip(&features.0).map(|(w, x)| w * x).sum()
    }

    /// Probability that the sentence belongs in the summary.
    pub fn predict(&self, features: &SentenceFeatures) -> f64 {
        sigmoid(self.logit(features))
    }

    pub fn weight(&self, feature: &str) -> Option<f64> {
        FEATURE_NAMES
            .iter()
            .position(|&n| n == feature)
            .map(|i| self.weights[i])
    }

    /// `{"version": 1, "feature_names": [..], "weights": [..]}`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelFile {
            version: 1,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            weights: self.weights.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.version != 1 {
            return Err(Error::InvalidArgument(format!(
                "unsupported model version {}",
                file.version
            )));
        }
        if file.feature_names != FEATURE_NAMES {
            return Err(Error::InvalidArgument(format!(
                "model features {:?} do not match {:?}",
                file.feature_names, FEATURE_NAMES
            )));
        }
        if file.weights.len() != FEATURE_COUNT || file.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument("model weights malformed".into()));
        }
        Ok(Self { weights: file.weights })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
    pub clamp_eps: f64,
    pub batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 20,
            l2: 1e-4,
            seed: 0,
            clamp_eps: 1e-7,
            batch_size: 32,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && self.l2 >= 0.0
            && self.clamp_eps > 0.0
            && self.clamp_eps < 0.5
            && self.batch_size >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid training config {self:?}")))
        }
    }
}

/// Soft-target cross-entropy with `p` clamped to `[eps, 1 − eps]`.
pub fn cross_entropy(p: f64, target: f64, eps: f64) -> f64 {
    let p = p.clamp(eps, 1.0 - eps);
    -target * p.ln() - (1.0 - target) * (1.0 - p).ln()
}

/// A sentence sample: features and its soft target.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: SentenceFeatures,
    pub target: f64,
}

fn check_target(target: f64) -> Result<()> {
    if (0.0..=1.0).contains(&target) {
        Ok(())
    } else {
        Err(Error::TargetOutOfRange(target))
    }
}

fn l2_penalty(weights: &[f64], l2: f64) -> f64 {
    let norm: f64 = weights
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != BIAS_INDEX)
        .map(|(_, w)| w * w)
        .sum();
    0.5 * l2 * norm
}

/// Mean cross-entropy over `batch` plus `l2/2 · ‖w‖²` (bias excluded).
pub fn loss(scorer: &LinearScorer, batch: &[Sample], l2: f64, clamp_eps: f64) -> Result<f64> {
    Ok(loss_and_gradient(&scorer.weights, batch, l2, clamp_eps)?.0)
}

/// Loss and its exact gradient. Where the probability is clamped the
/// cross-entropy is flat, so such samples contribute no gradient.
pub fn loss_and_gradient(weights: &[f64], batch: &[Sample], l2: f64, clamp_eps: f64) -> Result<(f64, Vec<f64>)> {
    let mut grad = vec![0.0; weights.len()];
    let mut total = 0.0;
    for sample in batch {
        check_target(sample.target)?;
        if sample.features.0.len() != weights.len() {
            return Err(Error::FeatureWidth {
                expected: weights.len(),
                found: sample.features.0.len(),
            });
        }
        let z: f64 = weights.iter().zip(&sample.features.0).map(|(w, x)| w * x).sum();
        let p = sigmoid(z);
        total += cross_entropy(p, sample.target, clamp_eps);
        if p > clamp_eps && p < 1.0 - clamp_eps {
            let dz = p - sample.target;
            for (g, x) in grad.iter_mut().zip(&sample.features.0) {
                *g += dz * x;
            }
        }
    }
    let count = batch.len().max(1) as f64;
    grad.iter_mut().for_each(|g| *g /= count);
    for (i, g) in grad.iter_mut().enumerate() {
        if i != BIAS_INDEX {
            *g += l2 * weights[i];
        }
    }
    Ok((total / count + l2_penalty(weights, l2), grad))
}

/// Sentence samples assembled from (document, topic, signals, targets).
#[derive(Debug, Clone, Default)]
pub struct TrainingSet {
    pub samples: Vec<Sample>,
}

impl TrainingSet {
    pub fn add_instance(
        &mut self,
        doc: &Document,
        topic: &TopicInstance,
        matrix: &SignalMatrix,
        labels: &FusedLabels,
    ) -> Result<()> {
        if labels.targets.len() != doc.len() || matrix.n != doc.len() {
            return Err(Error::InvalidDocument {
                id: doc.id.clone(),
                message: format!(
                    "{} sentences but {} targets and {} signal values",
                    doc.len(),
                    labels.targets.len(),
                    matrix.n
                ),
            });
        }
        for (features, &target) in featurize(doc, topic, matrix).into_iter().zip(&labels.targets) {
            check_target(target)?;
            self.samples.push(Sample { features, target });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub scorer: LinearScorer,
    /// Full-data objective after each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Mini-batch gradient descent from zero weights. Batches follow a seeded
/// shuffle, so identical inputs give bitwise-identical weights.
pub fn train(set: &TrainingSet, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if set.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let mut weights = vec![0.0; FEATURE_COUNT];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..set.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut batch = Vec::with_capacity(config.batch_size);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| set.samples[i].clone()));
            let (_, grad) = loss_and_gradient(&weights, &batch, config.l2, config.clamp_eps)?;
            for (w, g) in weights.iter_mut().zip(&grad) {
                *w -= config.learning_rate * g;
            }
        }
        let (epoch_loss, _) = loss_and_gradient(&weights, &set.samples, config.l2, config.clamp_eps)?;
        if !epoch_loss.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch });
        }
        log::info!("epoch {epoch}: loss {epoch_loss:.6}");
        epoch_losses.push(epoch_loss);
    }
    Ok(TrainOutcome {
        scorer: LinearScorer { weights },
        epoch_losses,
    })
}

/// Indices by descending score, lower index first on ties.
pub fn rank_by_scores(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

pub fn rank(scorer: &LinearScorer, doc: &Document, topic: &TopicInstance, matrix: &SignalMatrix) -> Vec<usize> {
    let scores: Vec<f64> = featurize(doc, topic, matrix)
        .iter()
        .map(|f| scorer.predict(f))
        .collect();
    rank_by_scores(&scores)
}

/// Summary text under a budget.
///
/// `one_sentence` returns the top-ranked sentence. `twenty_words` takes
/// sentences in rank order until the budget is reached, cuts the last one so
/// the total is exactly [`WORD_BUDGET`] tokens, and emits them in document
/// order.
pub fn select_summary(ranking: &[usize], doc: &Document, mode: BudgetMode) -> String {
    match mode {
        BudgetMode::OneSentence => ranking
            .first()
            .map(|&i| doc.sentences[i].text.clone())
            .unwrap_or_default(),
        BudgetMode::TwentyWords => {
            let mut chosen: Vec<(usize, usize)> = Vec::new();
            let mut total = 0;
            for &i in ranking {
                let len = doc.sentences[i].tokens.len();
                let take = len.min(WORD_BUDGET - total);
                chosen.push((i, take));
                total += take;
                if total == WORD_BUDGET {
                    break;
                }
            }
            chosen.sort_unstable();
            chosen
                .into_iter()
                .map(|(i, take)| truncate_to_tokens(&doc.sentences[i].text, take))
                .collect::<Vec<_>>()
                .join(" ")
        }
    }
}

/// Summary built from extractive labels.
///
/// Label-1 sentences in document order lead the ranking; in `one_sentence`
/// mode the one with the best ROUGE-1 F1 against the reference is used. With
/// no positive labels the ranking falls back to each sentence's own ROUGE-1
/// recall against the reference, so the output is never empty.
pub fn oracle_summary(doc: &Document, labels: &[f64], reference_tokens: &[String], mode: BudgetMode) -> String {
    let recall: Vec<f64> = doc
        .sentences
        .iter()
        .map(|s| rouge_n(&s.tokens, reference_tokens, 1).recall)
        .collect();
    let fallback = rank_by_scores(&recall);
    let positives: Vec<usize> = (0..doc.len()).filter(|&i| labels.get(i) == Some(&1.0)).collect();
    if positives.is_empty() {
        return select_summary(&fallback, doc, mode);
    }
    match mode {
        BudgetMode::OneSentence => {
            let f1: Vec<f64> = positives
                .iter()
                .map(|&i| rouge_n(&doc.sentences[i].tokens, reference_tokens, 1).f1)
                .collect();
            let best = positives[rank_by_scores(&f1)[0]];
            doc.sentences[best].text.clone()
        }
        BudgetMode::TwentyWords => {
            let mut ranking = positives.clone();
            ranking.extend(fallback.into_iter().filter(|i| !positives.contains(i)));
            select_summary(&ranking, doc, mode)
        }
    }
}
