//! N-gram (+ optional embedding) features, a linear hinge-loss classifier
//! trained by stochastic subgradient descent, sigmoid calibration, metrics and
//! the repeated random-split evaluation protocol.

mod calibration;
mod eval;
mod features;
mod metrics;
mod model;
mod svm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use calibration::{calibrate, calibrate_margins, Calibration};
pub use eval::{repeated_eval, LabeledData};
pub use features::{fit_feature_space, FeatureSpace, SparseVector, MAX_FEATURE_ORDER};
pub use metrics::{auc, cohen_kappa, evaluate, MeanStd, MetricsReport, SplitMetrics};
pub use model::{CalibrationSource, ClassifierConfig, Prediction, TrainedClassifier, MODEL_FORMAT_VERSION};
pub use svm::{hinge_objective, hinge_subgradient, train, LinearModel, SvmConfig};

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("no training examples")]
    NoExamples,
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("feature space requires comment embeddings but none were supplied")]
    MissingEmbeddings,
    #[error("embedding has dimension {got}, feature space expects {expected}")]
    EmbeddingDim { expected: usize, got: usize },
    #[error("feature vector has dimension {got}, model expects {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("label lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("label lists are empty")]
    Empty,
    #[error("cannot draw a split with both classes in train: {0}")]
    SplitImpossible(String),
    #[error("invalid argument: {0}")]
    BadArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

/// How a labeled example entered the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Seed,
    Random,
    NnComment,
    Certainty,
    Uncertainty,
    NnUser,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Seed => "seed",
            Strategy::Random => "random",
            Strategy::NnComment => "nn_comment",
            Strategy::Certainty => "certainty",
            Strategy::Uncertainty => "uncertainty",
            Strategy::NnUser => "nn_user",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub comment_id: String,
    pub label: Label,
    pub round: u32,
    pub strategy: Strategy,
    #[serde(default)]
    pub annotator_labels: Vec<(String, Label)>,
    /// Set when the label came from an adjudication rather than agreement.
    #[serde(default)]
    pub adjudicated: bool,
}

impl LabeledExample {
    /// Label without annotator provenance (seed sets, oracle labels).
    pub fn direct(comment_id: impl Into<String>, label: Label, round: u32, strategy: Strategy) -> Self {
        LabeledExample {
            comment_id: comment_id.into(),
            label,
            round,
            strategy,
            annotator_labels: Vec::new(),
            adjudicated: false,
        }
    }

    /// Resolves annotator votes; disagreement needs an adjudicated label.
    pub fn resolve(
        comment_id: impl Into<String>,
        round: u32,
        strategy: Strategy,
        annotator_labels: Vec<(String, Label)>,
        adjudication: Option<Label>,
    ) -> Option<Self> {
        let agreed = annotator_labels.first().map(|f| f.1).filter(|l| annotator_labels.iter().all(|(_, x)| x == l));
        let (label, adjudicated) = match (agreed, adjudication) {
            (Some(l), None) => (l, false),
            (_, Some(l)) => (l, true),
            (None, None) => return None,
        };
        Some(LabeledExample { comment_id: comment_id.into(), label, round, strategy, annotator_labels, adjudicated })
    }

    /// True when the stored label is justified by agreement or adjudication.
    pub fn is_consistent(&self) -> bool {
        self.adjudicated || self.annotator_labels.iter().all(|(_, l)| *l == self.label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agreement_resolves() {
        let votes = vec![("a".into(), Label::Positive), ("b".into(), Label::Positive)];
        let ex = LabeledExample::resolve("c1", 1, Strategy::Random, votes, None).unwrap();
        assert_eq!(ex.label, Label::Positive);
        assert!(!ex.adjudicated && ex.is_consistent());
    }

    #[test]
    fn disagreement_needs_adjudication() {
        let votes = vec![("a".into(), Label::Positive), ("b".into(), Label::Negative)];
        assert!(LabeledExample::resolve("c1", 1, Strategy::Random, votes.clone(), None).is_none());
        let ex = LabeledExample::resolve("c1", 1, Strategy::Random, votes, Some(Label::Negative)).unwrap();
        assert!(ex.adjudicated && ex.is_consistent());
    }

    #[test]
    fn serde_names() {
        let ex = LabeledExample::direct("c", Label::Negative, 0, Strategy::NnComment);
        let json = serde_json::to_string(&ex).unwrap();
        assert!(json.contains(r#""label":"negative""#) && json.contains(r#""strategy":"nn_comment""#));
        assert_eq!(serde_json::from_str::<LabeledExample>(&json).unwrap(), ex);
    }
}
