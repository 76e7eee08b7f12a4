//! λ-weighted fusion of supervision signals into soft targets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::signals::{SignalMatrix, SignalName};
use crate::{Error, Result};

/// Non-negative weights per signal. Weights are renormalized over the signals
/// actually present in a matrix, so they need not sum to one here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FusionConfig {
    pub weights: BTreeMap<SignalName, f64>,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self::equal(SignalName::ALL)
    }
}

impl FusionConfig {
    /// Weight 1 on each listed signal.
    pub fn equal(signals: impl IntoIterator<Item = SignalName>) -> Self {
        Self {
            weights: signals.into_iter().map(|s| (s, 1.0)).collect(),
        }
    }

    pub fn weight(&self, name: SignalName) -> f64 {
        self.weights.get(&name).copied().unwrap_or(0.0)
    }

    /// Signals with positive weight.
    pub fn active(&self) -> impl Iterator<Item = SignalName> + '_ {
        self.weights.iter().filter(|(_, &w)| w > 0.0).map(|(&n, _)| n)
    }

    fn validate(&self) -> Result<()> {
        for (&name, &weight) in &self.weights {
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::InvalidWeight { name, weight });
            }
        }
        Ok(())
    }
}

/// Zeroes the weights of `drop`.
pub fn ablate(config: &FusionConfig, drop: &BTreeSet<SignalName>) -> FusionConfig {
    let mut out = config.clone();
    for name in drop {
        if let Some(w) = out.weights.get_mut(name) {
            *w = 0.0;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedLabels {
    #[serde(rename = "id")]
    pub doc_id: String,
    #[serde(rename = "topic")]
    pub topic_text: String,
    pub targets: Vec<f64>,
}

/// Effective weights: config weights restricted to present signals, summing
/// to one.
pub fn effective_weights(matrix: &SignalMatrix, config: &FusionConfig) -> Result<Vec<(SignalName, f64)>> {
    config.validate()?;
    let present: Vec<(SignalName, f64)> = matrix.present().map(|n| (n, config.weight(n))).collect();
    let mass: f64 = present.iter().map(|(_, w)| w).sum();
    if mass <= 0.0 {
        return Err(Error::ZeroWeights(present.into_iter().map(|(n, _)| n).collect()));
    }
    Ok(present
        .into_iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|(n, w)| (n, w / mass))
        .collect())
}

/// `ỹ_i = Σ_s λ̂_s · y^s_i` over present signals.
pub fn fuse(matrix: &SignalMatrix, config: &FusionConfig) -> Result<FusedLabels> {
    let weights = effective_weights(matrix, config)?;
    let mut targets = vec![0.0; matrix.n];
    for (name, weight) in &weights {
        let values = matrix.get(*name).expect("present signal");
        for (t, v) in targets.iter_mut().zip(values) {
            *t += weight * v;
        }
    }
    // Rounding can push a convex combination a hair outside [0, 1].
    targets.iter_mut().for_each(|t| *t = t.clamp(0.0, 1.0));
    Ok(FusedLabels {
        doc_id: matrix.doc_id.clone(),
        topic_text: matrix.topic_text.clone(),
        targets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[(SignalName, &[f64])]) -> SignalMatrix {
        SignalMatrix {
            doc_id: "d".into(),
            topic_text: "t".into(),
            n: rows[0].1.len(),
            values: rows.iter().map(|(n, v)| (*n, v.to_vec())).collect(),
        }
    }

    #[test]
    fn equal_rows_pass_through() {
        let m = matrix(&[
            (SignalName::TopicSent, &[0.4, 0.8]),
            (SignalName::SentSent, &[0.4, 0.8]),
        ]);
        let mut config = FusionConfig::default();
        config.weights.insert(SignalName::TopicSent, 3.0);
        let fused = fuse(&m, &config).unwrap();
        for (got, want) in fused.targets.iter().zip([0.4, 0.8]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn one_hot_is_exact() {
        let rule = [1.0, 0.0, 1.0];
        let m = matrix(&[(SignalName::Rule, &rule), (SignalName::TopicSent, &[0.3, 0.2, 0.9])]);
        let fused = fuse(&m, &FusionConfig::equal([SignalName::Rule])).unwrap();
        assert_eq!(fused.targets, rule);
    }

    #[test]
    fn equal_weights_average() {
        let m = matrix(&[(SignalName::Ext, &[1.0, 0.0]), (SignalName::Rule, &[0.0, 1.0])]);
        let fused = fuse(&m, &FusionConfig::default()).unwrap();
        assert_eq!(fused.targets, [0.5 * 1.0 + 0.5 * 0.0, 0.5 * 0.0 + 0.5 * 1.0]);
    }

    #[test]
    fn ablation() {
        let config = FusionConfig::default();
        let no_qa = ablate(&config, &[SignalName::Qa].into_iter().collect());
        assert_eq!(no_qa.active().count(), 6);
        assert_eq!(ablate(&config, &BTreeSet::new()), config);

        let both = ablate(&config, &[SignalName::Ext, SignalName::Qa].into_iter().collect());
        let m = matrix(&[(SignalName::Ext, &[1.0]), (SignalName::Qa, &[0.0])]);
        assert!(matches!(fuse(&m, &both), Err(Error::ZeroWeights(_))));
    }

    #[test]
    fn bad_weights_rejected() {
        let m = matrix(&[(SignalName::Rule, &[1.0])]);
        let mut config = FusionConfig::default();
        config.weights.insert(SignalName::Ext, -1.0);
        assert!(matches!(fuse(&m, &config), Err(Error::InvalidWeight { .. })));
        config.weights.insert(SignalName::Ext, f64::NAN);
        assert!(fuse(&m, &config).is_err());
    }

    #[test]
    fn renormalization_scale_free() {
        let m = matrix(&[
            (SignalName::Ext, &[1.0, 0.0, 1.0]),
            (SignalName::WordSim, &[0.2, 0.7, 0.1]),
        ]);
        let big = FusionConfig {
            weights: [(SignalName::Ext, 2.0), (SignalName::WordSim, 2.0)]
                .into_iter()
                .collect(),
        };
        let small = FusionConfig {
            weights: [(SignalName::Ext, 0.5), (SignalName::WordSim, 0.5)]
                .into_iter()
                .collect(),
        };
        assert_eq!(fuse(&m, &big).unwrap().targets, fuse(&m, &small).unwrap().targets);
    }

    #[test]
    fn json_shape() {
        let fused = FusedLabels {
            doc_id: "d".into(),
            topic_text: "t".into(),
            targets: vec![0.5],
        };
        assert_eq!(
            serde_json::to_string(&fused).unwrap(),
            r#"{"id":"d","topic":"t","targets":[0.5]}"#
        );
        let config: FusionConfig = serde_json::from_str(r#"{"ext": 1, "qa": 0.5}"#).unwrap();
        assert_eq!(config.weight(SignalName::Qa), 0.5);
    }
}
