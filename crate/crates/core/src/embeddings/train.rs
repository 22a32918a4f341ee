use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{subword_buckets, EmbeddingError, EmbeddingTable, SubwordConfig};
use crate::corpus::{Corpus, TokenSequence};

const NEGATIVE_TABLE_SIZE: usize = 1_000_000;
const MIN_LR_FRACTION: f32 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub epochs: usize,
    pub window: usize,
    pub negative_samples: usize,
    pub learning_rate: f32,
    pub min_count: u64,
    pub bucket_count: usize,
    pub subword_range: (usize, usize),
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            epochs: 5,
            window: 5,
            negative_samples: 5,
            learning_rate: 0.05,
            min_count: 2,
            bucket_count: 200_000,
            subword_range: (3, 6),
            rng_seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let bad = |m: &str| Err(EmbeddingError::BadConfig(m.to_string()));
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if self.epochs == 0 || self.window == 0 || self.negative_samples == 0 {
            return bad("epochs, window and negative_samples must be positive");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.min_count == 0 || self.bucket_count == 0 {
            return bad("min_count and bucket_count must be positive");
        }
        let (lo, hi) = self.subword_range;
        if lo == 0 || lo > hi {
            return bad("subword_range must satisfy 1 <= min_n <= max_n");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean negative-sampling loss per (center, context) pair, one per epoch.
    pub epoch_losses: Vec<f64>,
    pub vocab_size: usize,
    pub training_tokens: u64,
}

/// Trains on the English-filtered comments of `corpus`.
pub fn train_embeddings(corpus: &Corpus, config: &TrainConfig) -> Result<EmbeddingTable, EmbeddingError> {
    let seqs: Vec<&TokenSequence> = corpus.english_tokens().collect();
    train_on_sequences(seqs, config).map(|(t, _)| t)
}

/// Skip-gram with negative sampling. The hidden representation of a center
/// word is the mean of its word row and bucket rows; every row receives the
/// full gradient. Single-threaded and fully determined by `rng_seed`.
pub fn train_on_sequences<'a, I>(sequences: I, config: &TrainConfig) -> Result<(EmbeddingTable, TrainReport), EmbeddingError>
where
    I: IntoIterator<Item = &'a TokenSequence>,
{
    config.validate()?;
    let sequences: Vec<&TokenSequence> = sequences.into_iter().collect();
    if sequences.iter().all(|s| s.is_empty()) {
        return Err(EmbeddingError::EmptyCorpus);
    }
    let dim = config.dim;
    let (min_n, max_n) = config.subword_range;
    let subwords = SubwordConfig { min_n, max_n, bucket_count: config.bucket_count };

    let mut freq: HashMap<&str, u64> = HashMap::new();
    for s in &sequences {
        for t in s.iter() {
            *freq.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut vocab: Vec<(&str, u64)> = freq.into_iter().filter(|&(_, c)| c >= config.min_count).collect();
    vocab.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, &(w, _))| (w, i)).collect();
    let n_words = vocab.len();

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let bound = 1.0 / dim as f32;
    let mut input_words: Vec<f32> = (0..n_words * dim).map(|_| rng.gen_range(-bound..bound)).collect();
    let mut input_buckets: Vec<f32> = (0..config.bucket_count * dim).map(|_| rng.gen_range(-bound..bound)).collect();
    let mut output: Vec<f32> = vec![0.0; n_words * dim];

    let word_buckets: Vec<Vec<usize>> = vocab
        .iter()
        .map(|&(w, _)| subword_buckets(w, min_n, max_n, config.bucket_count))
        .collect();
    let corpus_ids: Vec<Vec<usize>> = sequences
        .iter()
        .map(|s| s.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();
    let total_tokens: u64 = corpus_ids.iter().map(|s| s.len() as u64).sum();
    let negatives = negative_table(&vocab);

    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let total_work = (total_tokens * config.epochs as u64).max(1) as f64;
    let mut processed: u64 = 0;
    let mut hidden = vec![0.0f32; dim];
    let mut grad = vec![0.0f32; dim];

    for _ in 0..config.epochs {
        let mut loss_sum = 0.0f64;
        let mut pairs = 0u64;
        for sentence in &corpus_ids {
            for (pos, &center) in sentence.iter().enumerate() {
                let progress = processed as f64 / total_work;
                let lr = config.learning_rate * ((1.0 - progress) as f32).max(MIN_LR_FRACTION);
                processed += 1;
                if sentence.len() < 2 {
                    continue;
                }
                let buckets = &word_buckets[center];
                let scale = 1.0 / (1 + buckets.len()) as f32;
                hidden.copy_from_slice(&input_words[center * dim..(center + 1) * dim]);
                for &b in buckets {
                    for (h, v) in hidden.iter_mut().zip(&input_buckets[b * dim..(b + 1) * dim]) {
                        *h += *v;
                    }
                }
                hidden.iter_mut().for_each(|h| *h *= scale);
                grad.iter_mut().for_each(|g| *g = 0.0);

                let reach = rng.gen_range(1..=config.window);
                let lo = pos.saturating_sub(reach);
                let hi = (pos + reach).min(sentence.len() - 1);
                for ctx_pos in lo..=hi {
                    if ctx_pos == pos {
                        continue;
                    }
                    let target = sentence[ctx_pos];
                    let mut pair_loss = update_output(&hidden, &mut grad, &mut output[target * dim..(target + 1) * dim], 1.0, lr);
                    if n_words > 1 {
                        for _ in 0..config.negative_samples {
                            let neg = loop {
                                let cand = negatives[rng.gen_range(0..negatives.len())];
                                if cand != target {
                                    break cand;
                                }
                            };
                            pair_loss += update_output(&hidden, &mut grad, &mut output[neg * dim..(neg + 1) * dim], 0.0, lr);
                        }
                    }
                    loss_sum += pair_loss;
                    pairs += 1;
                }

                for (w, g) in input_words[center * dim..(center + 1) * dim].iter_mut().zip(&grad) {
                    *w += *g;
                }
                for &b in buckets {
                    for (w, g) in input_buckets[b * dim..(b + 1) * dim].iter_mut().zip(&grad) {
                        *w += *g;
                    }
                }
            }
        }
        epoch_losses.push(if pairs == 0 { 0.0 } else { loss_sum / pairs as f64 });
    }

    let words: Vec<String> = vocab.iter().map(|&(w, _)| w.to_string()).collect();
    let counts: Vec<u64> = vocab.iter().map(|&(_, c)| c).collect();
    let table = EmbeddingTable::from_parts(dim, words, counts, input_words, Some(subwords), input_buckets);
    let report = TrainReport { epoch_losses, vocab_size: n_words, training_tokens: total_tokens };
    Ok((table, report))
}

/// One logistic step on an output row; returns the loss term.
fn update_output(hidden: &[f32], grad: &mut [f32], out_row: &mut [f32], label: f32, lr: f32) -> f64 {
    let score: f32 = hidden.iter().zip(out_row.iter()).map(|(h, o)| h * o).sum();
    let p = sigmoid(score);
    let g = lr * (label - p);
    for ((gr, o), h) in grad.iter_mut().zip(out_row.iter_mut()).zip(hidden) {
        *gr += g * *o;
        *o += g * *h;
    }
    let prob_of_label = if label > 0.5 { p } else { 1.0 - p };
    -(prob_of_label.max(1e-7) as f64).ln()
}

fn sigmoid(x: f32) -> f32 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Unigram^0.75 sampling table.
fn negative_table(vocab: &[(&str, u64)]) -> Vec<usize> {
    if vocab.is_empty() {
        return vec![0];
    }
    let weights: Vec<f64> = vocab.iter().map(|&(_, c)| (c as f64).powf(0.75)).collect();
    let z: f64 = weights.iter().sum();
    let mut table = Vec::with_capacity(NEGATIVE_TABLE_SIZE + vocab.len());
    for (i, w) in weights.iter().enumerate() {
        let slots = ((w / z) * NEGATIVE_TABLE_SIZE as f64).ceil() as usize;
        table.extend(std::iter::repeat(i).take(slots.max(1)));
    }
    table
}
