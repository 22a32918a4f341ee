//! The full labeling loop: seed set, random batch, comment-NN batch, then
//! certainty and uncertainty batches from classifiers retrained after each
//! round. Labels come from a caller-supplied labeler (an oracle on synthetic
//! data).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{ClassifierConfig, ClassifierError, Label, LabeledData, LabeledExample, TrainedClassifier};
use crate::corpus::Corpus;
use crate::embeddings::{compose_all, compose_users, train_embeddings, vector_map, CommentVector, CommentVectorMap, EmbeddingError, EmbeddingTable, TrainConfig, UserVector};
use crate::nnindex::{IndexError, VectorIndex};
use crate::sampling::{
    certainty_sample, default_per_seed_k, nn_comment_sample, oracle_labels, predict_pool, random_sample, uncertainty_sample,
    ClassBalance, LabeledPool, NnMode, SamplingBatch, SamplingError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// Trained word vectors and the comment and user vectors derived from them.
#[derive(Debug, Clone)]
pub struct EmbeddingArtifacts {
    pub table: EmbeddingTable,
    pub comments: Vec<CommentVector>,
    pub comment_map: CommentVectorMap,
    pub comment_index: VectorIndex,
    pub users: Vec<UserVector>,
    pub user_index: VectorIndex,
}

impl EmbeddingArtifacts {
    pub fn build(corpus: &Corpus, config: &TrainConfig) -> Result<Self> {
        let table = train_embeddings(corpus, config)?;
        Self::from_table(corpus, table)
    }

    pub fn from_table(corpus: &Corpus, table: EmbeddingTable) -> Result<Self> {
        let comments = compose_all(&table, corpus);
        let comment_map = vector_map(&comments);
        let usable = comments.iter().filter(|v| v.usable).map(|v| (v.comment_id.clone(), v.values.clone()));
        let comment_index = VectorIndex::build(table.dim(), usable)?.index;
        let (users, _) = compose_users(&table, corpus, &comments);
        let user_index = VectorIndex::build(table.dim(), users.iter().map(|u| (u.user_id.clone(), u.values.clone())))?.index;
        Ok(EmbeddingArtifacts { table, comments, comment_map, comment_index, users, user_index })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub random_n: usize,
    pub nn_target: usize,
    pub nn_mode: NnMode,
    pub certainty_k: usize,
    pub uncertainty_k: usize,
    pub classifier: ClassifierConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            random_n: 300,
            nn_target: 300,
            nn_mode: NnMode::PerSeed,
            certainty_k: 1000,
            uncertainty_k: 1000,
            classifier: ClassifierConfig::default(),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub batch: SamplingBatch,
    pub labeled: usize,
    pub positives: usize,
    pub skipped: usize,
    pub pool_after: ClassBalance,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub pool: LabeledPool,
    pub rounds: Vec<RoundSummary>,
    /// Pool contents after the seed + random + NN rounds, after certainty and
    /// after uncertainty.
    pub stages: [Vec<LabeledExample>; 3],
}

/// Uses `labeler` to label a batch and feeds the result into the pool.
fn apply<F>(pool: &mut LabeledPool, batch: SamplingBatch, labeler: &F, rounds: &mut Vec<RoundSummary>) -> Result<()>
where
    F: Fn(&SamplingBatch) -> (Vec<LabeledExample>, Vec<String>),
{
    let (resolved, skipped) = labeler(&batch);
    let labeled = resolved.len();
    let positives = resolved.iter().filter(|e| e.label.is_positive()).count();
    let n_skipped = skipped.len();
    let pool_after = pool.run_round(&batch, resolved, &skipped)?;
    rounds.push(RoundSummary { batch, labeled, positives, skipped: n_skipped, pool_after });
    Ok(())
}

pub fn train_on_pool(pool: &[LabeledExample], corpus: &Corpus, vectors: Option<&CommentVectorMap>, config: &ClassifierConfig) -> Result<TrainedClassifier> {
    let data = LabeledData::from_examples(pool, corpus, vectors);
    let rows: Vec<usize> = (0..data.len()).collect();
    Ok(TrainedClassifier::fit(&data, &rows, config)?)
}

/// Runs seed, random, NN, certainty and uncertainty rounds in order.
pub fn run<F>(
    corpus: &Corpus,
    artifacts: &EmbeddingArtifacts,
    seed_positive: &[String],
    seed_negative: &[String],
    config: &PipelineConfig,
    labeler: F,
) -> Result<PipelineRun>
where
    F: Fn(&SamplingBatch) -> (Vec<LabeledExample>, Vec<String>),
{
    let mut pool = LabeledPool::new();
    let mut rounds = Vec::new();
    let vectors = config.classifier.with_embeddings.then_some(&artifacts.comment_map);

    let seeds: Vec<String> = seed_positive.iter().chain(seed_negative).cloned().collect();
    let batch = SamplingBatch::seed(seeds, pool.round_counter());
    apply(&mut pool, batch, &labeler, &mut rounds)?;

    let unlabeled = pool.unlabeled_ids(corpus);
    let batch = random_sample(&unlabeled, config.random_n, config.seed, pool.round_counter())?;
    apply(&mut pool, batch, &labeler, &mut rounds)?;

    let per_seed = default_per_seed_k(config.nn_target, seed_positive.len());
    let batch = nn_comment_sample(seed_positive, per_seed, &artifacts.comment_index, pool.labeled_ids(), config.nn_mode, pool.round_counter())?;
    apply(&mut pool, batch, &labeler, &mut rounds)?;
    let stage1 = pool.examples().to_vec();

    let model = train_on_pool(pool.examples(), corpus, vectors, &config.classifier)?;
    let probs = predict_pool(&model, corpus, &pool.unlabeled_ids(corpus), vectors)?;
    let batch = certainty_sample(&probs, config.certainty_k, pool.round_counter())?;
    apply(&mut pool, batch, &labeler, &mut rounds)?;
    let stage2 = pool.examples().to_vec();

    let model = train_on_pool(pool.examples(), corpus, vectors, &config.classifier)?;
    let probs = predict_pool(&model, corpus, &pool.unlabeled_ids(corpus), vectors)?;
    let batch = uncertainty_sample(&probs, config.uncertainty_k, pool.round_counter())?;
    apply(&mut pool, batch, &labeler, &mut rounds)?;
    let stage3 = pool.examples().to_vec();

    Ok(PipelineRun { pool, rounds, stages: [stage1, stage2, stage3] })
}

/// Labeler backed by a ground-truth map.
pub fn oracle(truth: &HashMap<String, Label>) -> impl Fn(&SamplingBatch) -> (Vec<LabeledExample>, Vec<String>) + '_ {
    move |batch| oracle_labels(batch, truth)
}
