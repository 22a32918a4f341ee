use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eval::LabeledData;
use super::{calibrate_margins, train, Calibration, ClassifierError, FeatureSpace, Label, LinearModel, SparseVector, SvmConfig};
use crate::corpus::{Corpus, TokenSequence};
use crate::embeddings::CommentVectorMap;
use crate::util::rng_for;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub min_df: usize,
    pub with_embeddings: bool,
    pub tfidf: bool,
    /// Multiplier on the unit-length embedding block. N-gram counts are
    /// integers, so a unit vector alone barely moves the margin.
    #[serde(default = "default_embedding_weight")]
    pub embedding_weight: f64,
    /// Share of the training rows held out (per class) to fit the calibration.
    pub calibration_fraction: f64,
    pub svm: SvmConfig,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            min_df: 2,
            with_embeddings: false,
            tfidf: false,
            embedding_weight: default_embedding_weight(),
            calibration_fraction: 0.1, svm: SvmConfig::default(),
        }
    }
}

fn default_embedding_weight() -> f64 {
    10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationSource {
    HeldOut,
    /// Held-out fit was impossible (too few rows of a class, or a
    /// non-increasing fit); calibrated on the training margins instead.
    InSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub margin: f64,
    pub prob: f64,
    pub label: Label,
}

/// Feature space, weights and calibration: everything needed to score a comment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub format_version: u32,
    pub space: FeatureSpace,
    pub model: LinearModel,
    pub calibration: Calibration,
    pub calibration_source: CalibrationSource,
    pub config: ClassifierConfig,
}

impl TrainedClassifier {
    /// Trains on `rows` of `data`. A stratified slice of the rows is held out
    /// for calibration; the feature space and weights see only the rest.
    pub fn fit(data: &LabeledData, rows: &[usize], config: &ClassifierConfig) -> Result<Self, ClassifierError> {
        if rows.is_empty() {
            return Err(ClassifierError::NoExamples);
        }
        let mut pos: Vec<usize> = rows.iter().copied().filter(|&r| data.labels[r].is_positive()).collect();
        let mut neg: Vec<usize> = rows.iter().copied().filter(|&r| !data.labels[r].is_positive()).collect();
        if pos.is_empty() || neg.is_empty() {
            return Err(ClassifierError::SingleClass);
        }
        if config.with_embeddings && data.embeddings.is_none() {
            return Err(ClassifierError::MissingEmbeddings);
        }

        let mut rng = rng_for(config.svm.rng_seed, 0xca1b, rows.len() as u64);
        pos.shuffle(&mut rng);
        neg.shuffle(&mut rng);
        let holdout_size = |n: usize| -> usize {
            if n < 2 || config.calibration_fraction <= 0.0 {
                0
            } else {
                ((n as f64 * config.calibration_fraction).round() as usize).clamp(1, n - 1)
            }
        };
        let (hp, hn) = (holdout_size(pos.len()), holdout_size(neg.len()));
        let (mut fit_rows, mut held) = (Vec::new(), Vec::new());
        if hp > 0 && hn > 0 {
            held.extend_from_slice(&pos[..hp]);
            held.extend_from_slice(&neg[..hn]);
            fit_rows.extend_from_slice(&pos[hp..]);
            fit_rows.extend_from_slice(&neg[hn..]);
        } else {
            fit_rows.extend_from_slice(&pos);
            fit_rows.extend_from_slice(&neg);
        }
        fit_rows.sort_unstable();
        held.sort_unstable();

        let docs: Vec<&TokenSequence> = fit_rows.iter().map(|&r| &data.docs[r]).collect();
        let emb_dims = if config.with_embeddings { data.embedding_dim() } else { 0 };
        let mut space = FeatureSpace::fit(&docs, config.min_df, emb_dims, config.tfidf)?;
        space.embedding_weight = config.embedding_weight;
        let featurize = |r: usize| space.featurize(&data.docs[r], data.embedding(r).filter(|_| emb_dims > 0));
        let xs: Vec<SparseVector> = fit_rows.iter().map(|&r| featurize(r)).collect::<Result<_, _>>()?;
        let ys: Vec<Label> = fit_rows.iter().map(|&r| data.labels[r]).collect();
        let model = train(&xs, &ys, space.len(), &config.svm)?;

        let held_fit = if held.is_empty() {
            None
        } else {
            let margins: Vec<f64> = held
                .iter()
                .map(|&r| featurize(r).and_then(|x| model.margin(&x)))
                .collect::<Result<_, _>>()?;
            let labels: Vec<Label> = held.iter().map(|&r| data.labels[r]).collect();
            calibrate_margins(&margins, &labels).ok()
        };
        let (calibration, calibration_source) = match held_fit {
            Some(c) => (c, CalibrationSource::HeldOut),
            None => {
                let margins: Vec<f64> = xs.iter().map(|x| model.margin(x)).collect::<Result<_, _>>()?;
                (calibrate_margins(&margins, &ys)?, CalibrationSource::InSample)
            }
        };
        Ok(TrainedClassifier {
            format_version: MODEL_FORMAT_VERSION,
            space,
            model,
            calibration,
            calibration_source,
            config: config.clone(),
        })
    }

    pub fn predict_features(&self, x: &SparseVector) -> Result<Prediction, ClassifierError> {
        let margin = self.model.margin(x)?;
        let prob = self.calibration.probability(margin);
        Ok(Prediction { margin, prob, label: Label::from_bool(prob >= 0.5) })
    }

    pub fn predict(&self, tokens: &TokenSequence, embedding: Option<&[f32]>) -> Result<Prediction, ClassifierError> {
        let x = self.space.featurize(tokens, embedding)?;
        self.predict_features(&x)
    }

    pub fn needs_embeddings(&self) -> bool {
        self.space.embedding_dims > 0
    }

    /// Scores corpus comments by id, in the order given. Unknown ids are skipped.
    pub fn score_comments(
        &self,
        corpus: &Corpus,
        ids: &[String],
        vectors: Option<&CommentVectorMap>,
    ) -> Result<Vec<(String, Prediction)>, ClassifierError> {
        if self.needs_embeddings() && vectors.is_none() {
            return Err(ClassifierError::MissingEmbeddings);
        }
        let zeros = vec![0.0f32; self.space.embedding_dims];
        ids.par_iter()
            .filter_map(|id| corpus.tokens(id).map(|t| (id, t)))
            .map(|(id, tokens)| {
                let emb = if self.needs_embeddings() {
                    Some(vectors.and_then(|m| m.get(id)).map_or(zeros.as_slice(), Vec::as_slice))
                } else {
                    None
                };
                self.predict(tokens, emb).map(|p| (id.clone(), p))
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string(self)
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
