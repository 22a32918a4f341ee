//! Subword-aware word embeddings (skip-gram with negative sampling over words
//! plus hashed character n-grams) and the comment / user vectors built on them.

mod compose;
mod io;
mod subword;
mod train;

use std::collections::HashMap;

use thiserror::Error;

pub use compose::{
    comment_embedding, comment_embedding_tokens, compose_all, compose_users, l2_norm, user_embedding, vector_map,
    CommentVector, CommentVectorMap, UserVector,
};
pub use io::{read_vector_store, write_vector_store, VectorRecord, VECTOR_STORE_MAGIC};
pub use subword::{char_ngrams, fnv1a_32, subword_buckets};
pub use train::{train_embeddings, train_on_sequences, TrainConfig, TrainReport};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("corpus has no tokens to train on")]
    EmptyCorpus,
    #[error("invalid training config: {0}")]
    BadConfig(String),
    #[error("user '{0}' has no comment with a usable vector")]
    NoUsableComments(String),
    #[error("malformed embedding file at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("malformed binary file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Hashed character n-gram configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubwordConfig {
    pub min_n: usize,
    pub max_n: usize,
    pub bucket_count: usize,
}

/// Word vectors plus optional subword bucket vectors. A token's effective
/// vector is its word vector (if any) plus the sum of its bucket vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    counts: Vec<u64>,
    word_index: HashMap<String, usize>,
    word_vectors: Vec<f32>,
    subwords: Option<SubwordConfig>,
    bucket_vectors: Vec<f32>,
}

/// Result of a vector lookup. `zero` marks tokens with no representation.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVector {
    pub values: Vec<f32>,
    pub zero: bool,
}

impl EmbeddingTable {
    pub(crate) fn from_parts(
        dim: usize,
        words: Vec<String>,
        counts: Vec<u64>,
        word_vectors: Vec<f32>,
        subwords: Option<SubwordConfig>,
        bucket_vectors: Vec<f32>,
    ) -> Self {
        assert_eq!(words.len() * dim, word_vectors.len());
        assert_eq!(words.len(), counts.len());
        if let Some(s) = subwords {
            assert!(s.bucket_count >= 1 && s.min_n >= 1 && s.min_n <= s.max_n);
            assert_eq!(s.bucket_count * dim, bucket_vectors.len());
        } else {
            assert!(bucket_vectors.is_empty());
        }
        let word_index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        EmbeddingTable { dim, words, counts, word_index, word_vectors, subwords, bucket_vectors }
    }

    /// Word-vector-only table, as produced by loading pretrained vectors.
    pub fn from_word_vectors(dim: usize, entries: Vec<(String, Vec<f32>)>) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::BadConfig("dim must be positive".into()));
        }
        let mut words = Vec::with_capacity(entries.len());
        let mut vectors = Vec::with_capacity(entries.len() * dim);
        let mut seen = std::collections::HashSet::new();
        for (w, v) in entries {
            if v.len() != dim {
                return Err(EmbeddingError::BadConfig(format!("vector for '{w}' has length {}", v.len())));
            }
            if !seen.insert(w.clone()) {
                return Err(EmbeddingError::BadConfig(format!("duplicate token '{w}'")));
            }
            words.push(w);
            vectors.extend(v);
        }
        let counts = vec![0; words.len()];
        Ok(Self::from_parts(dim, words, counts, vectors, None, Vec::new()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Vocabulary in frequency order (most frequent first) for trained tables.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word_count(&self, word: &str) -> Option<u64> {
        self.word_index.get(word).map(|&i| self.counts[i])
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn contains(&self, word: &str) -> bool {
        self.word_index.contains_key(word)
    }

    pub fn subwords(&self) -> Option<SubwordConfig> {
        self.subwords
    }

    pub fn word_vector(&self, word: &str) -> Option<&[f32]> {
        self.word_index.get(word).map(|&i| self.word_row(i))
    }

    pub(crate) fn word_row(&self, i: usize) -> &[f32] {
        &self.word_vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn bucket_vector(&self, bucket: usize) -> Option<&[f32]> {
        self.subwords
            .filter(|s| bucket < s.bucket_count)
            .map(|_| &self.bucket_vectors[bucket * self.dim..(bucket + 1) * self.dim])
    }

    pub fn buckets_for(&self, token: &str) -> Vec<usize> {
        match self.subwords {
            Some(s) => subword_buckets(token, s.min_n, s.max_n, s.bucket_count),
            None => Vec::new(),
        }
    }

    /// Adds the effective vector of `token` into `out`; false if the token has
    /// neither a word vector nor any subword bucket.
    pub fn accumulate_effective(&self, token: &str, out: &mut [f32]) -> bool {
        debug_assert_eq!(out.len(), self.dim);
        let mut any = false;
        if let Some(v) = self.word_vector(token) {
            add_into(out, v);
            any = true;
        }
        for b in self.buckets_for(token) {
            add_into(out, &self.bucket_vectors[b * self.dim..(b + 1) * self.dim]);
            any = true;
        }
        any
    }

    pub fn effective_word_vector(&self, token: &str) -> WordVector {
        let mut values = vec![0.0; self.dim];
        let any = self.accumulate_effective(token, &mut values);
        WordVector { values, zero: !any }
    }

    pub(crate) fn raw_parts(&self) -> (&[f32], &[f32]) {
        (&self.word_vectors, &self.bucket_vectors)
    }
}

pub(crate) fn add_into(dst: &mut [f32], src: &[f32]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += *s;
    }
}

pub(crate) fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        dot += x as f64 * y as f64;
        na += x as f64 * x as f64;
        nb += y as f64 * y as f64;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

/// Cosine similarity of two vectors; 0 when either is zero.
pub fn cosine_similarity(a: &[f32], b: &[f32]) -> f64 {
    cosine(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_table() -> EmbeddingTable {
        let dim = 2;
        let sub = SubwordConfig { min_n: 3, max_n: 3, bucket_count: 5 };
        let buckets: Vec<f32> = (0..10).map(|i| i as f32 * 0.5).collect();
        EmbeddingTable::from_parts(dim, vec!["war".into()], vec![3], vec![1.0, -1.0], Some(sub), buckets)
    }

    #[test]
    fn in_vocab_is_sum_of_parts() {
        let t = tiny_table();
        let mut expected = t.word_vector("war").unwrap().to_vec();
        for b in t.buckets_for("war") {
            let bv = t.bucket_vector(b).unwrap();
            expected[0] += bv[0];
            expected[1] += bv[1];
        }
        let got = t.effective_word_vector("war");
        assert!(!got.zero);
        assert_eq!(got.values, expected);
    }

    #[test]
    fn oov_uses_buckets_only() {
        let t = tiny_table();
        let got = t.effective_word_vector("wart");
        let mut expected = vec![0.0f32; 2];
        for b in t.buckets_for("wart") {
            add_into(&mut expected, t.bucket_vector(b).unwrap());
        }
        assert_eq!(got.values, expected);
        assert!(!got.zero);
    }

    #[test]
    fn short_oov_is_flagged_zero() {
        let t = tiny_table();
        let got = t.effective_word_vector("ab");
        assert!(got.zero);
        assert_eq!(got.values, [0.0, 0.0]);
    }

    #[test]
    fn lookups_are_repeatable() {
        let t = tiny_table();
        assert_eq!(t.effective_word_vector("warring"), t.effective_word_vector("warring"));
    }

    #[test]
    fn pretrained_tables_have_no_subwords() {
        let t = EmbeddingTable::from_word_vectors(2, vec![("peace".into(), vec![1.0, 0.0])]).unwrap();
        assert!(t.subwords().is_none());
        assert!(t.effective_word_vector("peaceful").zero);
        assert!(EmbeddingTable::from_word_vectors(2, vec![("a".into(), vec![1.0])]).is_err());
    }
}
