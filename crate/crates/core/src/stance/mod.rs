//! Two-level stance detection and sentence rationales.
//!
//! Level 1 gives `p_related`; level 2 gives agree/disagree/discuss
//! probabilities conditioned on relatedness. Both levels always run and the
//! flattened distribution is `p(unrelated) = 1 - p_related`,
//! `p(l) = p_related * p_l`.

mod features;
mod model;
pub mod toy;

use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use features::{FeatureConfig, FeatureVector, Featurizer, EXTRA_FEATURES};
pub use model::{
    level1_loss_grad, level2_loss_grad, sigmoid, softmax, train, StanceModel, TrainConfig,
    TrainReport, TrainingExample,
};

use crate::text::split_sentences;

#[derive(Debug, Error)]
pub enum StanceError {
    #[error("claim and document must both contain words")]
    EmptyText,
    #[error("model was trained for feature layout {model:016x}, featurizer is {featurizer:016x}")]
    ModelMismatch { model: u64, featurizer: u64 },
    #[error("feature dimension {got} does not match model dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training set is empty")]
    EmptyDataset,
    #[error("no related examples: level 2 cannot be trained")]
    Level2Untrainable,
    #[error("line {line}: {msg}")]
    Data { line: usize, msg: String },
    #[error("model format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StanceLabel {
    Agree,
    Disagree,
    Discuss,
    Unrelated,
}

impl StanceLabel {
    /// Canonical order; also the tie-break order for dominant labels.
    pub const ALL: [StanceLabel; 4] = [
        StanceLabel::Agree,
        StanceLabel::Disagree,
        StanceLabel::Discuss,
        StanceLabel::Unrelated,
    ];

    pub fn is_related(self) -> bool {
        self != StanceLabel::Unrelated
    }

    pub fn level2_index(self) -> Option<usize> {
        match self {
            StanceLabel::Agree => Some(0),
            StanceLabel::Disagree => Some(1),
            StanceLabel::Discuss => Some(2),
            StanceLabel::Unrelated => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StanceLabel::Agree => "agree",
            StanceLabel::Disagree => "disagree",
            StanceLabel::Discuss => "discuss",
            StanceLabel::Unrelated => "unrelated",
        }
    }
}

impl fmt::Display for StanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StanceLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StanceLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown stance label {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StanceDistribution {
    pub p_related: f64,
    pub p_agree: f64,
    pub p_disagree: f64,
    pub p_discuss: f64,
}

impl StanceDistribution {
    pub fn uniform() -> Self {
        StanceDistribution {
            p_related: 0.5,
            p_agree: 1.0 / 3.0,
            p_disagree: 1.0 / 3.0,
            p_discuss: 1.0 / 3.0,
        }
    }

    /// (agree, disagree, discuss, unrelated)
    pub fn flattened(&self) -> [f64; 4] {
        [
            self.p_related * self.p_agree,
            self.p_related * self.p_disagree,
            self.p_related * self.p_discuss,
            1.0 - self.p_related,
        ]
    }

    /// Inverse of [`StanceDistribution::flattened`]. With no related mass
    /// the conditionals are uniform.
    pub fn from_flattened(flat: [f64; 4]) -> Self {
        let related = flat[0] + flat[1] + flat[2];
        if related <= 0.0 {
            return StanceDistribution {
                p_related: 0.0,
                ..StanceDistribution::uniform()
            };
        }
        StanceDistribution {
            p_related: related,
            p_agree: flat[0] / related,
            p_disagree: flat[1] / related,
            p_discuss: flat[2] / related,
        }
    }

    pub fn prob(&self, label: StanceLabel) -> f64 {
        self.flattened()[label.index()]
    }

    /// Argmax of the flattened distribution; ties go to the earlier label.
    pub fn dominant(&self) -> StanceLabel {
        let flat = self.flattened();
        let mut best = 0;
        for i in 1..4 {
            if flat[i] > flat[best] {
                best = i;
            }
        }
        StanceLabel::ALL[best]
    }
}

/// Anything that can produce a stance distribution for a (claim, text) pair.
pub trait StanceScorer: Send + Sync {
    fn score(&self, claim: &str, text: &str) -> Result<StanceDistribution, StanceError>;
}

impl StanceScorer for StanceModel {
    fn score(&self, claim: &str, text: &str) -> Result<StanceDistribution, StanceError> {
        let x = self.featurizer().featurize(claim, text)?;
        self.predict_features(&x)
    }
}

/// Scores a pair with an explicit featurizer, rejecting layouts the model
/// was not trained on.
pub fn predict_stance(
    model: &StanceModel,
    featurizer: &Featurizer,
    claim: &str,
    document: &str,
) -> Result<StanceDistribution, StanceError> {
    if featurizer.config.hash() != model.config.hash() {
        return Err(StanceError::ModelMismatch {
            model: model.config.hash(),
            featurizer: featurizer.config.hash(),
        });
    }
    model.predict_features(&featurizer.featurize(claim, document)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRationale {
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub dist: StanceDistribution,
    pub dominant: StanceLabel,
}

/// One rationale per sentence, in document order. A sentence made only of
/// punctuation is scored as unrelated.
pub fn score_sentences(
    scorer: &dyn StanceScorer,
    claim: &str,
    document: &str,
) -> Result<Vec<SentenceRationale>, StanceError> {
    split_sentences(document)
        .into_iter()
        .map(|s| {
            let text = s.text(document).to_string();
            let dist = match scorer.score(claim, &text) {
                Ok(d) => d,
                Err(StanceError::EmptyText) if s.tokens.iter().all(|t| !t.is_word()) => StanceDistribution {
                    p_related: 0.0,
                    ..StanceDistribution::uniform()
                },
                Err(e) => return Err(e),
            };
            Ok(SentenceRationale {
                start: s.start,
                end: s.end,
                text,
                dominant: dist.dominant(),
                dist,
            })
        })
        .collect()
}

/// Stable sort by flattened `p(label)`, descending.
pub fn sort_rationales(mut rationales: Vec<SentenceRationale>, label: StanceLabel) -> Vec<SentenceRationale> {
    rationales.sort_by(|a, b| b.dist.prob(label).total_cmp(&a.dist.prob(label)));
    rationales
}

/// Reads training data as JSON lines with `claim`, `document`, `stance`.
pub fn read_training_data<R: BufRead>(reader: R) -> Result<Vec<TrainingExample>, StanceError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ex = serde_json::from_str(&line).map_err(|e| StanceError::Data {
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(ex);
    }
    Ok(out)
}

pub fn load_training_data(path: impl AsRef<Path>) -> Result<Vec<TrainingExample>, StanceError> {
    read_training_data(std::io::BufReader::new(std::fs::File::open(path)?))
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn config() -> FeatureConfig {
        FeatureConfig {
            buckets: 16,
            hash_seed: 1,
        }
    }

    fn random_model() -> impl Strategy<Value = StanceModel> {
        let d = config().dim();
        (
            proptest::collection::vec(-5.0f64..5.0, d),
            -5.0f64..5.0,
            proptest::collection::vec(-5.0f64..5.0, 3 * d),
            proptest::array::uniform3(-5.0f64..5.0),
        )
            .prop_map(|(w1, b1, w2, b2)| StanceModel {
                config: config(),
                seed: 0,
                level1_w: w1,
                level1_b: b1,
                level2_w: w2,
                level2_b: b2,
            })
    }

    proptest! {
        #[test]
        fn flattened_is_a_distribution(model in random_model(), a in "[a-z]{1,6}( [a-z]{1,6}){0,5}", b in "[a-z]{1,6}( [a-z]{1,6}){0,8}") {
            let d = model.score(&a, &b).unwrap();
            let flat = d.flattened();
            prop_assert!(flat.iter().all(|&p| p >= 0.0));
            prop_assert!((flat.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!((d.p_agree + d.p_disagree + d.p_discuss - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn logit_scaling_invariance(model in random_model(), c in 0.1f64..10.0) {
            let x = model.featurizer().featurize("alpha beta", "beta gamma delta").unwrap();
            let scaled_model = StanceModel {
                level1_w: model.level1_w.iter().map(|w| w / c).collect(),
                level2_w: model.level2_w.iter().map(|w| w / c).collect(),
                ..model.clone()
            };
            let a = model.predict_features(&x).unwrap();
            let b = scaled_model.predict_features(&x.scaled(c)).unwrap();
            prop_assert!((a.p_related - b.p_related).abs() < 1e-9);
            prop_assert!((a.p_agree - b.p_agree).abs() < 1e-9);
            prop_assert_eq!(a.dominant(), b.dominant());
        }
    }
}
