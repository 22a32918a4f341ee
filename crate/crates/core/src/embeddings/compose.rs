use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EmbeddingError, EmbeddingTable};
use crate::corpus::{tokenize, Comment, Corpus, TokenSequence};

/// Comment id to comment vector.
pub type CommentVectorMap = HashMap<String, Vec<f32>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentVector {
    pub comment_id: String,
    pub values: Vec<f32>,
    pub normalized: bool,
    /// False when the comment had no tokens or its average was the zero vector.
    pub usable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserVector {
    pub user_id: String,
    pub values: Vec<f32>,
    /// Comments that contributed to the mean.
    pub comment_count: usize,
    /// Comments dropped because their vectors were unusable.
    pub excluded: usize,
}

pub fn l2_norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt()
}

fn normalize_in_place(v: &mut [f32]) -> bool {
    let norm = l2_norm(v);
    if norm == 0.0 || !norm.is_finite() {
        return false;
    }
    for x in v.iter_mut() {
        *x = (*x as f64 / norm) as f32;
    }
    true
}

pub fn comment_embedding(table: &EmbeddingTable, comment: &Comment, normalize: bool) -> CommentVector {
    comment_embedding_tokens(table, &comment.id, &tokenize(&comment.text), normalize)
}

/// Mean of the effective word vectors of `tokens`, optionally L2-normalized.
pub fn comment_embedding_tokens(
    table: &EmbeddingTable,
    comment_id: &str,
    tokens: &TokenSequence,
    normalize: bool,
) -> CommentVector {
    let dim = table.dim();
    let mut sum = vec![0.0f32; dim];
    for t in tokens {
        table.accumulate_effective(t, &mut sum);
    }
    let mut values = sum;
    let mut usable = false;
    if !tokens.is_empty() {
        let inv = 1.0 / tokens.len() as f32;
        values.iter_mut().for_each(|x| *x *= inv);
        usable = values.iter().any(|&x| x != 0.0);
    }
    if usable && normalize {
        usable = normalize_in_place(&mut values);
    }
    if !usable {
        values.iter_mut().for_each(|x| *x = 0.0);
    }
    CommentVector { comment_id: comment_id.to_string(), values, normalized: normalize && usable, usable }
}

/// Mean of the user's L2-normalized comment vectors. Accumulation runs in
/// comment-id order so the result does not depend on input order.
pub fn user_embedding(
    table: &EmbeddingTable,
    user_id: &str,
    comments: &[(&str, &TokenSequence)],
) -> Result<UserVector, EmbeddingError> {
    let vectors: Vec<CommentVector> = comments
        .iter()
        .map(|(id, tokens)| comment_embedding_tokens(table, id, tokens, true))
        .collect();
    user_embedding_from_vectors(user_id, table.dim(), vectors)
}

pub(crate) fn user_embedding_from_vectors(
    user_id: &str,
    dim: usize,
    mut vectors: Vec<CommentVector>,
) -> Result<UserVector, EmbeddingError> {
    let total = vectors.len();
    vectors.retain(|v| v.usable);
    if vectors.is_empty() {
        return Err(EmbeddingError::NoUsableComments(user_id.to_string()));
    }
    vectors.sort_by(|a, b| a.comment_id.cmp(&b.comment_id));
    let mut acc = vec![0.0f64; dim];
    for v in &mut vectors {
        if !v.normalized {
            normalize_in_place(&mut v.values);
        }
        for (a, &x) in acc.iter_mut().zip(&v.values) {
            *a += x as f64;
        }
    }
    let n = vectors.len();
    let values = acc.iter().map(|&a| (a / n as f64) as f32).collect();
    Ok(UserVector { user_id: user_id.to_string(), values, comment_count: n, excluded: total - n })
}

/// Normalized vectors for every English comment, in corpus order.
pub fn compose_all(table: &EmbeddingTable, corpus: &Corpus) -> Vec<CommentVector> {
    let english: Vec<(usize, &Comment)> = corpus.english().collect();
    english
        .par_iter()
        .map(|&(pos, c)| comment_embedding_tokens(table, &c.id, corpus.tokens_at(pos), true))
        .collect()
}

/// User vectors over English comments, in user order. Users without a usable
/// comment are returned separately.
pub fn compose_users(table: &EmbeddingTable, corpus: &Corpus, comments: &[CommentVector]) -> (Vec<UserVector>, Vec<String>) {
    let by_id: HashMap<&str, &CommentVector> = comments.iter().map(|v| (v.comment_id.as_str(), v)).collect();
    let users: Vec<_> = corpus.users().collect();
    let results: Vec<Result<UserVector, EmbeddingError>> = users
        .par_iter()
        .map(|u| {
            let vs = u.comment_ids.iter().filter_map(|id| by_id.get(id.as_str()).map(|v| (*v).clone())).collect();
            user_embedding_from_vectors(&u.id, table.dim(), vs)
        })
        .collect();
    let mut ok = Vec::new();
    let mut missing = Vec::new();
    for (u, r) in users.iter().zip(results) {
        match r {
            Ok(v) => ok.push(v),
            Err(_) => missing.push(u.id.clone()),
        }
    }
    (ok, missing)
}

pub fn vector_map(vectors: &[CommentVector]) -> CommentVectorMap {
    vectors.iter().map(|v| (v.comment_id.clone(), v.values.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis_table() -> EmbeddingTable {
        EmbeddingTable::from_word_vectors(
            2,
            vec![("x".into(), vec![1.0, 0.0]), ("y".into(), vec![0.0, 1.0]), ("big".into(), vec![3.0, 4.0])],
        )
        .unwrap()
    }

    fn seq(text: &str) -> TokenSequence {
        tokenize(text)
    }

    #[test]
    fn plain_average() {
        let v = comment_embedding_tokens(&axis_table(), "c", &seq("x y"), false);
        assert_eq!(v.values, [0.5, 0.5]);
        assert!(v.usable && !v.normalized);
    }

    #[test]
    fn single_token_normalized() {
        let v = comment_embedding_tokens(&axis_table(), "c", &seq("big"), true);
        assert_eq!(v.values, [0.6, 0.8]);
        assert!((l2_norm(&v.values) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn empty_comment_is_flagged() {
        let v = comment_embedding_tokens(&axis_table(), "c", &seq("?!"), true);
        assert!(!v.usable && !v.normalized);
        assert_eq!(v.values, [0.0, 0.0]);
        let unknown = comment_embedding_tokens(&axis_table(), "c", &seq("zz"), true);
        assert!(!unknown.usable);
    }

    #[test]
    fn user_mean_of_normalized() {
        let t = axis_table();
        let (a, b) = (seq("x"), seq("big y"));
        let u = user_embedding(&t, "u", &[("c1", &a)]).unwrap();
        assert_eq!(u.values, [1.0, 0.0]);
        let (x, y) = (seq("x"), seq("y"));
        let u = user_embedding(&t, "u", &[("c1", &x), ("c2", &y)]).unwrap();
        assert_eq!(u.values, [0.5, 0.5]);
        assert_eq!(u.comment_count, 2);
        let u = user_embedding(&t, "u", &[("c1", &a), ("c2", &b), ("c3", &seq(""))]).unwrap();
        assert_eq!(u.excluded, 1);
    }

    #[test]
    fn user_without_usable_comments() {
        let empty = seq("");
        match user_embedding(&axis_table(), "ghost", &[("c1", &empty)]) {
            Err(EmbeddingError::NoUsableComments(u)) => assert_eq!(u, "ghost"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
