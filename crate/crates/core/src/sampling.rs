//! Batch selection strategies and the labeled pool they feed.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::classifier::{ClassifierError, Label, LabeledExample, Strategy, TrainedClassifier};
use crate::corpus::Corpus;
use crate::embeddings::CommentVectorMap;
use crate::nnindex::{rank_order, IndexError, VectorIndex};
use crate::util::rng_for;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("the unlabeled pool is empty")]
    EmptyPool,
    #[error("invalid argument: {0}")]
    BadArgument(String),
    #[error("seed '{0}' has no usable comment vector")]
    SeedWithoutVector(String),
    #[error("no unlabeled comment is predicted positive")]
    NoPositivePredictions,
    #[error("none of the authors {0:?} has a user vector")]
    AuthorsWithoutVectors(Vec<String>),
    #[error("neighbor users have no unlabeled comments")]
    EmptyNeighborPool,
    #[error("comments already labeled: {0:?}")]
    AlreadyLabeled(Vec<String>),
    #[error("labels for ids outside the batch: {0:?}")]
    OutsideBatch(Vec<String>),
    #[error("batch ids without a label or skip: {0:?}")]
    MissingLabels(Vec<String>),
    #[error("ids appear more than once: {0:?}")]
    Duplicate(Vec<String>),
    #[error("batch is for round {batch}, pool expects round {pool}")]
    RoundMismatch { batch: u32, pool: u32 },
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SamplingError>;

/// A set of comment ids proposed for labeling, with the parameters that
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingBatch {
    pub strategy: Strategy,
    pub round: u32,
    pub params: serde_json::Value,
    pub comment_ids: Vec<String>,
}

impl SamplingBatch {
    pub fn seed(comment_ids: Vec<String>, round: u32) -> Self {
        SamplingBatch { strategy: Strategy::Seed, round, params: json!({}), comment_ids }
    }

    pub fn len(&self) -> usize {
        self.comment_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comment_ids.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassBalance {
    pub positives: usize,
    pub negatives: usize,
}

impl ClassBalance {
    pub fn positive_fraction(&self) -> f64 {
        let n = self.positives + self.negatives;
        if n == 0 {
            0.0
        } else {
            self.positives as f64 / n as f64
        }
    }
}

/// Labeled examples accumulated over rounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledPool {
    examples: Vec<LabeledExample>,
    labeled_ids: HashSet<String>,
    round_counter: u32,
    /// (round, id) of batch items that were skipped and went back to the pool.
    skipped: Vec<(u32, String)>,
}

impl LabeledPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a pool from exported examples. The next round is one past the
    /// highest round seen.
    pub fn from_examples(examples: Vec<LabeledExample>) -> Result<Self> {
        let mut labeled_ids = HashSet::new();
        let mut dups = Vec::new();
        for ex in &examples {
            if !labeled_ids.insert(ex.comment_id.clone()) {
                dups.push(ex.comment_id.clone());
            }
        }
        if !dups.is_empty() {
            return Err(SamplingError::Duplicate(dups));
        }
        let round_counter = examples.iter().map(|e| e.round + 1).max().unwrap_or(0);
        Ok(LabeledPool { examples, labeled_ids, round_counter, skipped: Vec::new() })
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn labeled_ids(&self) -> &HashSet<String> {
        &self.labeled_ids
    }

    pub fn is_labeled(&self, id: &str) -> bool {
        self.labeled_ids.contains(id)
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Round number the next batch must carry.
    pub fn round_counter(&self) -> u32 {
        self.round_counter
    }

    pub fn skipped(&self) -> &[(u32, String)] {
        &self.skipped
    }

    pub fn balance(&self) -> ClassBalance {
        let positives = self.examples.iter().filter(|e| e.label.is_positive()).count();
        ClassBalance { positives, negatives: self.examples.len() - positives }
    }

    pub fn balance_by_strategy(&self) -> BTreeMap<Strategy, ClassBalance> {
        let mut out: BTreeMap<Strategy, ClassBalance> = BTreeMap::new();
        for e in &self.examples {
            let b = out.entry(e.strategy).or_insert(ClassBalance { positives: 0, negatives: 0 });
            if e.label.is_positive() {
                b.positives += 1;
            } else {
                b.negatives += 1;
            }
        }
        out
    }

    /// English corpus comments not yet labeled, in corpus order.
    pub fn unlabeled_ids(&self, corpus: &Corpus) -> Vec<String> {
        corpus.english().filter(|(_, c)| !self.labeled_ids.contains(&c.id)).map(|(_, c)| c.id.clone()).collect()
    }

    /// Adds the resolved labels of `batch`. Every batch id must appear exactly
    /// once, either in `resolved` or in `skipped`. Nothing changes on error.
    pub fn run_round(&mut self, batch: &SamplingBatch, resolved: Vec<LabeledExample>, skipped: &[String]) -> Result<ClassBalance> {
        if batch.round != self.round_counter {
            return Err(SamplingError::RoundMismatch { batch: batch.round, pool: self.round_counter });
        }
        let in_batch: HashSet<&str> = batch.comment_ids.iter().map(String::as_str).collect();
        if in_batch.len() != batch.comment_ids.len() {
            return Err(SamplingError::Duplicate(duplicates(batch.comment_ids.iter().map(String::as_str))));
        }
        let given: Vec<&str> = resolved.iter().map(|e| e.comment_id.as_str()).chain(skipped.iter().map(String::as_str)).collect();
        let outside: Vec<String> = given.iter().filter(|id| !in_batch.contains(**id)).map(|s| s.to_string()).collect();
        if !outside.is_empty() {
            return Err(SamplingError::OutsideBatch(outside));
        }
        let dups = duplicates(given.iter().copied());
        if !dups.is_empty() {
            return Err(SamplingError::Duplicate(dups));
        }
        let covered: HashSet<&str> = given.into_iter().collect();
        let missing: Vec<String> = batch.comment_ids.iter().filter(|id| !covered.contains(id.as_str())).cloned().collect();
        if !missing.is_empty() {
            return Err(SamplingError::MissingLabels(missing));
        }
        let already: Vec<String> = batch.comment_ids.iter().filter(|id| self.labeled_ids.contains(*id)).cloned().collect();
        if !already.is_empty() {
            return Err(SamplingError::AlreadyLabeled(already));
        }

        for mut ex in resolved {
            ex.round = batch.round;
            ex.strategy = batch.strategy;
            self.labeled_ids.insert(ex.comment_id.clone());
            self.examples.push(ex);
        }
        self.skipped.extend(skipped.iter().map(|id| (batch.round, id.clone())));
        self.round_counter += 1;
        Ok(self.balance())
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for ex in &self.examples {
            serde_json::to_writer(&mut out, ex)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self> {
        let mut examples = Vec::new();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            examples.push(serde_json::from_str(&line)?);
        }
        Self::from_examples(examples)
    }
}

fn duplicates<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut dups = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            dups.insert(id.to_string());
        }
    }
    dups.into_iter().collect()
}

/// Uniform sample without replacement. The pool is sorted first, so the
/// result depends only on the id set and the seed.
pub fn random_sample(unlabeled_ids: &[String], n: usize, seed: u64, round: u32) -> Result<SamplingBatch> {
    if n == 0 {
        return Err(SamplingError::BadArgument("n must be at least 1".into()));
    }
    let pool: Vec<&String> = unlabeled_ids.iter().collect::<BTreeSet<_>>().into_iter().collect();
    if pool.is_empty() {
        return Err(SamplingError::EmptyPool);
    }
    let take = n.min(pool.len());
    let mut rng = rng_for(seed, 0x5a3d, round as u64);
    let mut picked: Vec<usize> = sample(&mut rng, pool.len(), take).into_vec();
    picked.sort_unstable();
    let comment_ids = picked.into_iter().map(|i| pool[i].clone()).collect();
    Ok(SamplingBatch { strategy: Strategy::Random, round, params: json!({ "n": n, "seed": seed, "pool_size": pool.len() }), comment_ids })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NnMode {
    /// Top `per_seed_k` for every seed, merged by first occurrence.
    PerSeed,
    /// Global top `per_seed_k * seeds` by best similarity to any seed.
    Pooled,
}

/// `ceil(target / seeds)`, the default per-seed neighbor count.
pub fn default_per_seed_k(target: usize, n_seeds: usize) -> usize {
    if n_seeds == 0 {
        0
    } else {
        target.div_ceil(n_seeds)
    }
}

/// Nearest neighbors of the seed comments in comment-vector space, skipping
/// labeled comments and the seeds themselves.
pub fn nn_comment_sample(
    seed_ids: &[String],
    per_seed_k: usize,
    index: &VectorIndex,
    labeled_ids: &HashSet<String>,
    mode: NnMode,
    round: u32,
) -> Result<SamplingBatch> {
    if per_seed_k == 0 {
        return Err(SamplingError::BadArgument("per_seed_k must be at least 1".into()));
    }
    if seed_ids.is_empty() {
        return Err(SamplingError::BadArgument("no seeds given".into()));
    }
    let mut probes = Vec::with_capacity(seed_ids.len());
    for s in seed_ids {
        probes.push(index.get(s).ok_or_else(|| SamplingError::SeedWithoutVector(s.clone()))?.to_vec());
    }
    let mut exclude = labeled_ids.clone();
    exclude.extend(seed_ids.iter().cloned());
    let k = match mode {
        NnMode::PerSeed => per_seed_k,
        NnMode::Pooled => per_seed_k * seed_ids.len(),
    };
    let results = index.batch_query(&probes, k, &exclude)?;

    let comment_ids = match mode {
        NnMode::PerSeed => {
            let mut seen = HashSet::new();
            results.into_iter().flatten().map(|n| n.id).filter(|id| seen.insert(id.clone())).collect()
        }
        NnMode::Pooled => {
            let mut best: HashMap<String, f64> = HashMap::new();
            for n in results.into_iter().flatten() {
                let e = best.entry(n.id).or_insert(f64::NEG_INFINITY);
                *e = e.max(n.similarity);
            }
            let mut all: Vec<(String, f64)> = best.into_iter().collect();
            all.sort_by(|a, b| rank_order((a.1, &a.0), (b.1, &b.0)));
            all.truncate(k);
            all.into_iter().map(|(id, _)| id).collect()
        }
    };
    Ok(SamplingBatch {
        strategy: Strategy::NnComment,
        round,
        params: json!({ "seeds": seed_ids, "per_seed_k": per_seed_k, "mode": mode }),
        comment_ids,
    })
}

/// Calibrated positive probabilities for the given comments.
pub fn predict_pool(
    model: &TrainedClassifier,
    corpus: &Corpus,
    ids: &[String],
    vectors: Option<&CommentVectorMap>,
) -> Result<Vec<(String, f64)>> {
    Ok(model.score_comments(corpus, ids, vectors)?.into_iter().map(|(id, p)| (id, p.prob)).collect())
}

fn ranked_by<F: Fn(f64) -> f64>(probs: &[(String, f64)], key: F) -> Vec<&(String, f64)> {
    let mut v: Vec<&(String, f64)> = probs.iter().collect();
    v.sort_by(|a, b| key(a.1).total_cmp(&key(b.1)).then_with(|| a.0.cmp(&b.0)));
    v
}

/// The `k` highest probabilities, descending, ties by id.
pub fn certainty_sample(probs: &[(String, f64)], k: usize, round: u32) -> Result<SamplingBatch> {
    if k == 0 {
        return Err(SamplingError::BadArgument("k must be at least 1".into()));
    }
    if probs.is_empty() {
        return Err(SamplingError::EmptyPool);
    }
    let comment_ids = ranked_by(probs, |p| -p).into_iter().take(k).map(|(id, _)| id.clone()).collect();
    Ok(SamplingBatch { strategy: Strategy::Certainty, round, params: json!({ "k": k, "pool_size": probs.len() }), comment_ids })
}

/// The `k` probabilities closest to 0.5, ties by id.
pub fn uncertainty_sample(probs: &[(String, f64)], k: usize, round: u32) -> Result<SamplingBatch> {
    if k == 0 {
        return Err(SamplingError::BadArgument("k must be at least 1".into()));
    }
    if probs.is_empty() {
        return Err(SamplingError::EmptyPool);
    }
    let comment_ids = ranked_by(probs, |p| (p - 0.5).abs()).into_iter().take(k).map(|(id, _)| id.clone()).collect();
    Ok(SamplingBatch { strategy: Strategy::Uncertainty, round, params: json!({ "k": k, "pool_size": probs.len() }), comment_ids })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserNnParams {
    /// Top predicted-positive comments whose authors anchor the search.
    pub k: usize,
    /// Neighbor users per author.
    pub m: usize,
    pub n_comments: usize,
    pub seed: u64,
}

impl Default for UserNnParams {
    fn default() -> Self {
        UserNnParams { k: 10, m: 10, n_comments: 300, seed: 1 }
    }
}

/// Samples comments written by users whose vectors are near the authors of
/// the most confidently positive unlabeled comments.
pub fn user_nn_sample(
    probs: &[(String, f64)],
    corpus: &Corpus,
    user_index: &VectorIndex,
    labeled_ids: &HashSet<String>,
    params: UserNnParams,
    round: u32,
) -> Result<SamplingBatch> {
    if params.k == 0 || params.m == 0 || params.n_comments == 0 {
        return Err(SamplingError::BadArgument("k, m and n_comments must be at least 1".into()));
    }
    let positives: Vec<(String, f64)> =
        probs.iter().filter(|(id, p)| *p >= 0.5 && !labeled_ids.contains(id)).cloned().collect();
    if positives.is_empty() {
        return Err(SamplingError::NoPositivePredictions);
    }
    let top: Vec<String> = ranked_by(&positives, |p| -p).into_iter().take(params.k).map(|(id, _)| id.clone()).collect();

    let mut authors: Vec<String> = Vec::new();
    for id in &top {
        if let Some(c) = corpus.comment(id) {
            if !authors.contains(&c.user_id) {
                authors.push(c.user_id.clone());
            }
        }
    }
    let (with_vec, without_vec): (Vec<String>, Vec<String>) = authors.iter().cloned().partition(|a| user_index.contains(a));
    if with_vec.is_empty() {
        return Err(SamplingError::AuthorsWithoutVectors(without_vec));
    }

    let mut neighbor_lists = Vec::with_capacity(with_vec.len());
    let mut total_neighbors = 0;
    for a in &with_vec {
        let probe = user_index.get(a).expect("checked above").to_vec();
        let exclude: HashSet<String> = std::iter::once(a.clone()).collect();
        let ns = user_index.query_topk(&probe, params.m, &exclude)?;
        total_neighbors += ns.len();
        neighbor_lists.push(ns);
    }
    let mut seen = HashSet::new();
    let neighbors: Vec<String> =
        neighbor_lists.into_iter().flatten().map(|n| n.id).filter(|id| seen.insert(id.clone())).collect();

    let mut pool: Vec<String> = neighbors
        .iter()
        .filter_map(|u| corpus.user(u))
        .flat_map(|u| u.comment_ids.iter())
        .filter(|id| !labeled_ids.contains(*id) && corpus.comment(id).is_some_and(|c| c.is_english != Some(false)))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if pool.is_empty() {
        return Err(SamplingError::EmptyNeighborPool);
    }
    let take = params.n_comments.min(pool.len());
    let mut rng = rng_for(params.seed, 0x05e7, round as u64);
    let mut picked = sample(&mut rng, pool.len(), take).into_vec();
    picked.sort_unstable();
    let pool_size = pool.len();
    let comment_ids = picked.into_iter().map(|i| std::mem::take(&mut pool[i])).collect();

    Ok(SamplingBatch {
        strategy: Strategy::NnUser,
        round,
        params: json!({
            "k": params.k,
            "m": params.m,
            "n_comments": params.n_comments,
            "seed": params.seed,
            "top_comments": top,
            "authors": authors,
            "authors_without_vectors": without_vec,
            "neighbor_users": neighbors,
            "neighbor_count": total_neighbors,
            "pool_size": pool_size,
        }),
        comment_ids,
    })
}

/// Labels every batch id from a ground-truth map (synthetic runs).
pub fn oracle_labels(batch: &SamplingBatch, truth: &HashMap<String, Label>) -> (Vec<LabeledExample>, Vec<String>) {
    let mut resolved = Vec::new();
    let mut skipped = Vec::new();
    for id in &batch.comment_ids {
        match truth.get(id) {
            Some(&l) => resolved.push(LabeledExample::direct(id.clone(), l, batch.round, batch.strategy)),
            None => skipped.push(id.clone()),
        }
    }
    (resolved, skipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Comment, Record};

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn probs(v: &[(&str, f64)]) -> Vec<(String, f64)> {
        v.iter().map(|(a, p)| (a.to_string(), *p)).collect()
    }

    #[test]
    fn random_boundaries() {
        let pool = ids(&["c", "a", "b"]);
        let b = random_sample(&pool, 10, 1, 0).unwrap();
        assert_eq!(b.comment_ids, ids(&["a", "b", "c"]));
        let x = random_sample(&pool, 2, 9, 0).unwrap();
        let y = random_sample(&pool, 2, 9, 0).unwrap();
        assert_eq!(x, y);
        assert!(matches!(random_sample(&[], 2, 9, 0), Err(SamplingError::EmptyPool)));
        assert!(matches!(random_sample(&pool, 0, 9, 0), Err(SamplingError::BadArgument(_))));
    }

    #[test]
    fn random_ignores_input_order() {
        let a: Vec<String> = (0..50).map(|i| format!("c{i}")).collect();
        let mut b = a.clone();
        b.reverse();
        assert_eq!(random_sample(&a, 7, 3, 2).unwrap(), random_sample(&b, 7, 3, 2).unwrap());
    }

    #[test]
    fn certainty_and_uncertainty_orders() {
        let p = probs(&[("a", 0.9), ("b", 0.8), ("c", 0.3)]);
        assert_eq!(certainty_sample(&p, 2, 0).unwrap().comment_ids, ids(&["a", "b"]));
        assert_eq!(certainty_sample(&p, 9, 0).unwrap().comment_ids, ids(&["a", "b", "c"]));
        let eq = probs(&[("z", 0.5), ("y", 0.5), ("x", 0.5)]);
        assert_eq!(certainty_sample(&eq, 2, 0).unwrap().comment_ids, ids(&["x", "y"]));
        let u = probs(&[("a", 0.51), ("b", 0.9), ("c", 0.1)]);
        assert_eq!(uncertainty_sample(&u, 1, 0).unwrap().comment_ids, ids(&["a"]));
        let u = probs(&[("b", 0.6), ("a", 0.4)]);
        assert_eq!(uncertainty_sample(&u, 2, 0).unwrap().comment_ids, ids(&["a", "b"]));
    }

    fn line_index() -> VectorIndex {
        // points on the unit circle at increasing angles
        let vs = (0..10).map(|i| {
            let t = i as f32 * 0.15;
            (format!("c{i}"), vec![t.cos(), t.sin()])
        });
        VectorIndex::build(2, vs).unwrap().index
    }

    #[test]
    fn nn_dedup_and_exclusion() {
        let idx = line_index();
        let labeled: HashSet<String> = ["c1".to_string()].into();
        let b = nn_comment_sample(&ids(&["c0"]), 3, &idx, &labeled, NnMode::PerSeed, 0).unwrap();
        assert_eq!(b.comment_ids, ids(&["c2", "c3", "c4"]));
        // identical neighbor lists collapse to k
        let twin = VectorIndex::build(2, vec![("s1", vec![1.0, 0.0]), ("s2", vec![1.0, 0.0]), ("n1", vec![0.9, 0.1]), ("n2", vec![0.8, 0.3])]).unwrap().index;
        let b = nn_comment_sample(&ids(&["s1", "s2"]), 2, &twin, &HashSet::new(), NnMode::PerSeed, 0).unwrap();
        assert_eq!(b.comment_ids, ids(&["n1", "n2"]));
        let err = nn_comment_sample(&ids(&["nope"]), 2, &twin, &HashSet::new(), NnMode::PerSeed, 0).unwrap_err();
        assert!(matches!(err, SamplingError::SeedWithoutVector(s) if s == "nope"));
    }

    #[test]
    fn nn_id_set_ignores_seed_order() {
        let idx = line_index();
        let a = nn_comment_sample(&ids(&["c0", "c9"]), 3, &idx, &HashSet::new(), NnMode::PerSeed, 0).unwrap();
        let b = nn_comment_sample(&ids(&["c9", "c0"]), 3, &idx, &HashSet::new(), NnMode::PerSeed, 0).unwrap();
        let sa: BTreeSet<_> = a.comment_ids.iter().collect();
        let sb: BTreeSet<_> = b.comment_ids.iter().collect();
        assert_eq!(sa, sb);
        assert_eq!(a.comment_ids, ids(&["c1", "c2", "c3", "c8", "c7", "c6"]));
    }

    #[test]
    fn pooled_mode_takes_global_best() {
        let idx = line_index();
        let b = nn_comment_sample(&ids(&["c0", "c1"]), 2, &idx, &HashSet::new(), NnMode::Pooled, 0).unwrap();
        assert_eq!(b.comment_ids, ids(&["c2", "c3", "c4", "c5"]));
        assert_eq!(default_per_seed_k(300, 6), 50);
        assert_eq!(default_per_seed_k(300, 7), 43);
    }

    #[test]
    fn round_bookkeeping() {
        let mut pool = LabeledPool::new();
        let mut seed_ids = Vec::new();
        let mut resolved = Vec::new();
        for i in 0..11 {
            let id = format!("s{i}");
            resolved.push(LabeledExample::direct(&id, Label::from_bool(i < 6), 0, Strategy::Seed));
            seed_ids.push(id);
        }
        let batch = SamplingBatch::seed(seed_ids, 0);
        let bal = pool.run_round(&batch, resolved.clone(), &[]).unwrap();
        assert_eq!(pool.len(), 11);
        assert_eq!((bal.positives, bal.negatives), (6, 5));
        assert_eq!(pool.round_counter(), 1);
        let again = SamplingBatch { round: 1, ..batch };
        assert!(matches!(pool.run_round(&again, resolved, &[]), Err(SamplingError::AlreadyLabeled(_))));
        assert_eq!(pool.len(), 11);
    }

    #[test]
    fn run_round_validation() {
        let mut pool = LabeledPool::new();
        let batch = SamplingBatch { strategy: Strategy::Random, round: 0, params: json!({}), comment_ids: ids(&["a", "b", "c"]) };
        let ex = |id: &str| LabeledExample::direct(id, Label::Negative, 7, Strategy::Seed);
        let err = pool.run_round(&batch, vec![ex("a"), ex("z")], &ids(&["b", "c"])).unwrap_err();
        assert!(matches!(err, SamplingError::OutsideBatch(v) if v == ids(&["z"])));
        let err = pool.run_round(&batch, vec![ex("a")], &ids(&["b"])).unwrap_err();
        assert!(matches!(err, SamplingError::MissingLabels(v) if v == ids(&["c"])));
        assert!(pool.is_empty());
        pool.run_round(&batch, vec![ex("a"), ex("c")], &ids(&["b"])).unwrap();
        assert_eq!(pool.examples()[0].round, 0);
        assert_eq!(pool.examples()[0].strategy, Strategy::Random);
        assert_eq!(pool.skipped(), &[(0, "b".to_string())]);
        assert!(!pool.is_labeled("b"));
    }

    #[test]
    fn balance_arithmetic_after_certainty_round() {
        let mut examples = Vec::new();
        for i in 0..826 {
            examples.push(LabeledExample::direct(format!("p{i}"), Label::from_bool(i < 164), 0, Strategy::Random));
        }
        let mut pool = LabeledPool::from_examples(examples).unwrap();
        let ids: Vec<String> = (0..1000).map(|i| format!("q{i}")).collect();
        let resolved = ids.iter().enumerate().map(|(i, id)| LabeledExample::direct(id, Label::from_bool(i < 611), 0, Strategy::Seed)).collect();
        let batch = SamplingBatch { strategy: Strategy::Certainty, round: 1, params: json!({}), comment_ids: ids };
        let bal = pool.run_round(&batch, resolved, &[]).unwrap();
        assert_eq!((bal.positives, bal.negatives), (775, 1051));
    }

    #[test]
    fn pool_jsonl_round_trip() {
        let pool = LabeledPool::from_examples(vec![
            LabeledExample::direct("a", Label::Positive, 0, Strategy::Seed),
            LabeledExample::direct("b", Label::Negative, 2, Strategy::Uncertainty),
        ])
        .unwrap();
        let mut buf = Vec::new();
        pool.write_jsonl(&mut buf).unwrap();
        let back = LabeledPool::read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back.examples(), pool.examples());
        assert_eq!(back.round_counter(), 3);
    }

    fn user_corpus() -> Corpus {
        let mut b = Corpus::builder();
        let rows = [("c1", "u1"), ("c2", "u2"), ("c3", "u3"), ("c4", "u3"), ("c5", "u4"), ("c6", "u2")];
        for (i, (c, u)) in rows.iter().enumerate() {
            let comment = Comment {
                id: c.to_string(),
                video_id: "v".into(),
                user_id: u.to_string(),
                text: format!("text {i}"),
                posted_at: None,
                is_english: None,
            };
            b.push(Record::Comment(comment), i + 1).unwrap();
        }
        b.finish()
    }

    #[test]
    fn user_nn_steps() {
        let corpus = user_corpus();
        let users = VectorIndex::build(
            2,
            vec![("u1", vec![1.0, 0.0]), ("u2", vec![0.9, 0.1]), ("u3", vec![0.8, 0.2]), ("u4", vec![-1.0, 0.0])],
        )
        .unwrap()
        .index;
        let p = probs(&[("c1", 0.9), ("c2", 0.2), ("c3", 0.4), ("c5", 0.1)]);
        let labeled: HashSet<String> = ["c2".to_string()].into();
        let params = UserNnParams { k: 10, m: 2, n_comments: 10, seed: 4 };
        let b = user_nn_sample(&p, &corpus, &users, &labeled, params, 0).unwrap();
        assert_eq!(b.params["authors"], json!(["u1"]));
        assert_eq!(b.params["neighbor_users"], json!(["u2", "u3"]));
        assert_eq!(b.comment_ids, ids(&["c3", "c4", "c6"]));
        let none = probs(&[("c1", 0.1)]);
        assert!(matches!(user_nn_sample(&none, &corpus, &users, &labeled, params, 0), Err(SamplingError::NoPositivePredictions)));
    }
}
