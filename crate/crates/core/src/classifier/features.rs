use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::ClassifierError;
use crate::corpus::{Comment, TokenSequence};
use crate::embeddings::{comment_embedding, EmbeddingTable};

/// Highest n-gram order used as a feature.
pub const MAX_FEATURE_ORDER: usize = 3;

/// Sparse feature vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    pub dim: usize,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        SparseVector { dim, indices: Vec::new(), values: Vec::new() }
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let mut v = SparseVector::zeros(dense.len());
        for (i, &x) in dense.iter().enumerate() {
            if x != 0.0 {
                v.indices.push(i);
                v.values.push(x);
            }
        }
        v
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: usize) -> f64 {
        self.indices.binary_search(&index).map(|p| self.values[p]).unwrap_or(0.0)
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, x)| dense[i] * x).sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for (i, x) in self.iter() {
            d[i] = x;
        }
        d
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FeatureSpaceRepr {
    ngrams: Vec<Vec<String>>,
    embedding_dims: usize,
    #[serde(default = "unit_weight")]
    embedding_weight: f64,
    min_df: usize,
    #[serde(default)]
    idf: Option<Vec<f64>>,
}

fn unit_weight() -> f64 {
    1.0
}

/// Vocabulary of 1..=3-grams mapped to dense indices in sorted n-gram order,
/// optionally followed by an embedding block of `embedding_dims` entries
/// multiplied by `embedding_weight`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "FeatureSpaceRepr", into = "FeatureSpaceRepr")]
pub struct FeatureSpace {
    ngrams: Vec<Vec<String>>,
    index: HashMap<Vec<String>, usize>,
    pub embedding_dims: usize,
    pub embedding_weight: f64,
    pub min_df: usize,
    idf: Option<Vec<f64>>,
}

impl From<FeatureSpaceRepr> for FeatureSpace {
    fn from(r: FeatureSpaceRepr) -> Self {
        let index = r.ngrams.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
        FeatureSpace { ngrams: r.ngrams, index, embedding_dims: r.embedding_dims, embedding_weight: r.embedding_weight, min_df: r.min_df, idf: r.idf }
    }
}

impl From<FeatureSpace> for FeatureSpaceRepr {
    fn from(s: FeatureSpace) -> Self {
        FeatureSpaceRepr { ngrams: s.ngrams, embedding_dims: s.embedding_dims, embedding_weight: s.embedding_weight, min_df: s.min_df, idf: s.idf }
    }
}

fn distinct_grams(doc: &TokenSequence) -> BTreeSet<&[String]> {
    (1..=MAX_FEATURE_ORDER).flat_map(|n| doc.ngrams(n)).collect()
}

impl FeatureSpace {
    /// Keeps every 1..=3-gram that appears in at least `min_df` documents.
    pub fn fit(docs: &[&TokenSequence], min_df: usize, embedding_dims: usize, tfidf: bool) -> Result<Self, ClassifierError> {
        if docs.is_empty() {
            return Err(ClassifierError::NoExamples);
        }
        let mut df: HashMap<&[String], usize> = HashMap::new();
        for doc in docs {
            for g in distinct_grams(doc) {
                *df.entry(g).or_default() += 1;
            }
        }
        let mut kept: Vec<(&[String], usize)> = df.into_iter().filter(|&(_, c)| c >= min_df.max(1)).collect();
        kept.sort_unstable_by(|a, b| a.0.cmp(b.0));
        let n_docs = docs.len() as f64;
        let idf = tfidf.then(|| kept.iter().map(|&(_, c)| ((1.0 + n_docs) / (1.0 + c as f64)).ln() + 1.0).collect());
        let ngrams: Vec<Vec<String>> = kept.into_iter().map(|(g, _)| g.to_vec()).collect();
        let index = ngrams.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
        Ok(FeatureSpace { ngrams, index, embedding_dims, embedding_weight: 1.0, min_df, idf })
    }

    pub fn ngram_count(&self) -> usize {
        self.ngrams.len()
    }

    pub fn len(&self) -> usize {
        self.ngrams.len() + self.embedding_dims
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ngrams(&self) -> &[Vec<String>] {
        &self.ngrams
    }

    pub fn index_of<S: AsRef<str>>(&self, gram: &[S]) -> Option<usize> {
        let key: Vec<String> = gram.iter().map(|s| s.as_ref().to_string()).collect();
        self.index.get(&key).copied()
    }

    pub fn uses_tfidf(&self) -> bool {
        self.idf.is_some()
    }

    /// Raw n-gram counts (scaled by idf when enabled) followed by the
    /// embedding block. N-grams outside the vocabulary are ignored.
    pub fn featurize(&self, tokens: &TokenSequence, embedding: Option<&[f32]>) -> Result<SparseVector, ClassifierError> {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for n in 1..=MAX_FEATURE_ORDER {
            for g in tokens.ngrams(n) {
                if let Some(&i) = self.index.get(g) {
                    *counts.entry(i).or_default() += 1.0;
                }
            }
        }
        let mut entries: Vec<(usize, f64)> = counts.into_iter().collect();
        entries.sort_unstable_by_key(|e| e.0);
        if let Some(idf) = &self.idf {
            for e in entries.iter_mut() {
                e.1 *= idf[e.0];
            }
        }
        if self.embedding_dims > 0 {
            let emb = embedding.ok_or(ClassifierError::MissingEmbeddings)?;
            if emb.len() != self.embedding_dims {
                return Err(ClassifierError::EmbeddingDim { expected: self.embedding_dims, got: emb.len() });
            }
            let base = self.ngrams.len();
            entries.extend(emb.iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(j, &x)| (base + j, x as f64 * self.embedding_weight)));
        }
        let (indices, values) = entries.into_iter().unzip();
        Ok(SparseVector { dim: self.len(), indices, values })
    }

    /// Featurizes a comment, composing its normalized embedding from `table`
    /// when the space has an embedding block.
    pub fn featurize_comment(&self, comment: &Comment, table: Option<&EmbeddingTable>) -> Result<SparseVector, ClassifierError> {
        let tokens = crate::corpus::tokenize(&comment.text);
        if self.embedding_dims == 0 {
            return self.featurize(&tokens, None);
        }
        let table = table.ok_or(ClassifierError::MissingEmbeddings)?;
        let v = comment_embedding(table, comment, true);
        self.featurize(&tokens, Some(&v.values))
    }
}

/// Feature space over the texts of labeled examples.
pub fn fit_feature_space(
    examples: &[super::LabeledExample],
    corpus: &crate::corpus::Corpus,
    min_df: usize,
    table: Option<&EmbeddingTable>,
) -> Result<FeatureSpace, ClassifierError> {
    let docs: Vec<&TokenSequence> = examples.iter().filter_map(|e| corpus.tokens(&e.comment_id)).collect();
    FeatureSpace::fit(&docs, min_df, table.map_or(0, |t| t.dim()), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn space(min_df: usize, emb: usize) -> FeatureSpace {
        let (a, b) = (tokenize("a b"), tokenize("b c"));
        FeatureSpace::fit(&[&a, &b], min_df, emb, false).unwrap()
    }

    #[test]
    fn vocabulary_by_hand() {
        let s = space(1, 0);
        let grams: Vec<String> = s.ngrams().iter().map(|g| g.join(" ")).collect();
        assert_eq!(grams, ["a", "a b", "b", "b c", "c"]);
        assert_eq!(s.len(), 5);
    }

    #[test]
    fn min_df_two() {
        let s = space(2, 0);
        assert_eq!(s.ngrams(), [vec!["b".to_string()]]);
    }

    #[test]
    fn embedding_block_size() {
        assert_eq!(space(1, 100).len(), 105);
    }

    #[test]
    fn counts_for_repeated_tokens() {
        let (ab, ba) = (tokenize("a b"), tokenize("b a"));
        let s = FeatureSpace::fit(&[&ab, &ba], 1, 0, false).unwrap();
        let v = s.featurize(&tokenize("a b a"), None).unwrap();
        assert_eq!(v.get(s.index_of(&["a"]).unwrap()), 2.0);
        assert_eq!(v.get(s.index_of(&["b"]).unwrap()), 1.0);
        assert_eq!(v.get(s.index_of(&["a", "b"]).unwrap()), 1.0);
        assert_eq!(v.get(s.index_of(&["b", "a"]).unwrap()), 1.0);
        assert_eq!(v.nnz(), 4);
    }

    #[test]
    fn unseen_grams_give_zero_vector() {
        let v = space(1, 0).featurize(&tokenize("x y z"), None).unwrap();
        assert_eq!(v.nnz(), 0);
        assert_eq!(v.dim, 5);
    }

    #[test]
    fn embedding_block_is_last() {
        let s = space(1, 3);
        let v = s.featurize(&tokenize("a"), Some(&[0.5, 0.0, -0.25])).unwrap();
        let dense = v.to_dense();
        assert_eq!(&dense[5..], &[0.5, 0.0, -0.25]);
        assert_eq!(s.featurize(&tokenize("a"), None), Err(ClassifierError::MissingEmbeddings));
        assert!(matches!(s.featurize(&tokenize("a"), Some(&[1.0])), Err(ClassifierError::EmbeddingDim { .. })));
    }

    #[test]
    fn empty_examples_rejected() {
        assert_eq!(FeatureSpace::fit(&[], 1, 0, false), Err(ClassifierError::NoExamples));
    }

    #[test]
    fn tfidf_scales_counts() {
        let (a, b) = (tokenize("a b"), tokenize("b c"));
        let s = FeatureSpace::fit(&[&a, &b], 1, 0, true).unwrap();
        let v = s.featurize(&tokenize("a b"), None).unwrap();
        let rare = v.get(s.index_of(&["a"]).unwrap());
        let common = v.get(s.index_of(&["b"]).unwrap());
        assert!(rare > common && common == 1.0);
    }

    #[test]
    fn serde_rebuilds_index() {
        let s = space(1, 2);
        let json = serde_json::to_string(&s).unwrap();
        let back: FeatureSpace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.index_of(&["b", "c"]), Some(3));
    }
}
