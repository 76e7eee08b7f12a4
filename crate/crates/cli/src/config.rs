use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use weaksum::corpus::{CorpusFormat, DEFAULT_MAX_SENTENCES, DEFAULT_MAX_TOPICS};
use weaksum::fusion::FusionConfig;
use weaksum::scorer::{BudgetMode, TrainConfig};
use weaksum::signals::{SignalConfig, SignalName};

use crate::CliError;

/// Run configuration, read from one JSON document. Relative paths are
/// resolved against the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub format: CorpusFormat,
    pub embeddings: PathBuf,
    pub sentence_vectors: Option<PathBuf>,
    pub entities: Option<PathBuf>,
    pub qa_answers: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub signals: Vec<SignalName>,
    /// Defaults to weight 1 on every enabled signal.
    pub weights: Option<FusionConfig>,
    pub train: TrainConfig,
    pub mode: BudgetMode,
    pub max_topics: usize,
    pub max_sentences: usize,
    pub ext_max_select: usize,
    pub qa_max_select: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: PathBuf::new(),
            format: CorpusFormat::Jsonl,
            embeddings: PathBuf::new(),
            sentence_vectors: None,
            entities: None,
            qa_answers: None,
            out_dir: PathBuf::from("out"),
            signals: SignalName::ALL.to_vec(),
            weights: None,
            train: TrainConfig::default(),
            mode: BudgetMode::OneSentence,
            max_topics: DEFAULT_MAX_TOPICS,
            max_sentences: DEFAULT_MAX_SENTENCES,
            ext_max_select: weaksum::alignment::DEFAULT_REFERENCE_SELECT,
            qa_max_select: weaksum::alignment::DEFAULT_QA_SELECT,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub mode: Option<BudgetMode>,
}

fn resolve(base: &Path, path: &mut PathBuf) {
    if path.is_relative() && !path.as_os_str().is_empty() {
        *path = base.join(&*path);
    }
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        config.apply(overrides);
        config.validate()?;
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.corpus);
        resolve(base, &mut self.embeddings);
        resolve(base, &mut self.out_dir);
        for path in [&mut self.sentence_vectors, &mut self.entities, &mut self.qa_answers]
            .into_iter()
            .flatten()
        {
            resolve(base, path);
        }
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(dir) = &overrides.out_dir {
            self.out_dir = dir.clone();
        }
        if let Some(seed) = overrides.seed {
            self.train.seed = seed;
        }
        if let Some(mode) = overrides.mode {
            self.mode = mode;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let required = [("corpus", Some(&self.corpus)), ("embeddings", Some(&self.embeddings))];
        let optional = [
            ("sentence_vectors", self.sentence_vectors.as_ref()),
            ("entities", self.entities.as_ref()),
            ("qa_answers", self.qa_answers.as_ref()),
        ];
        for (key, path) in required.into_iter().chain(optional) {
            let Some(path) = path else { continue };
            if path.as_os_str().is_empty() {
                return Err(CliError::Config(format!("{key} is required")));
            }
            if !path.exists() {
                return Err(CliError::Config(format!(
                    "{key} path {} does not exist",
                    path.display()
                )));
            }
        }
        if self.signals.is_empty() {
            return Err(CliError::Config("no signals enabled".into()));
        }
        if let Some(weights) = &self.weights {
            if let Some((name, w)) = weights.weights.iter().find(|(_, w)| !w.is_finite() || **w < 0.0) {
                return Err(CliError::Config(format!("invalid weight {w} for {name}")));
            }
        }
        self.train.validate().map_err(|e| CliError::Config(e.to_string()))?;
        for (key, value) in [
            ("max_topics", self.max_topics),
            ("max_sentences", self.max_sentences),
            ("ext_max_select", self.ext_max_select),
            ("qa_max_select", self.qa_max_select),
        ] {
            if value == 0 {
                return Err(CliError::Config(format!("{key} must be at least 1")));
            }
        }
        Ok(())
    }

    pub fn signal_config(&self) -> SignalConfig {
        SignalConfig {
            enabled: self.signals.iter().copied().collect(),
            ext_max_select: self.ext_max_select,
            qa_max_select: self.qa_max_select,
        }
    }

    pub fn fusion(&self) -> FusionConfig {
        self.weights
            .clone()
            .unwrap_or_else(|| FusionConfig::equal(self.signals.iter().copied()))
    }

    pub fn enabled(&self) -> BTreeSet<SignalName> {
        self.signals.iter().copied().collect()
    }
}
