use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError, TokenSequence};

pub const MAX_NGRAM: usize = 4;

/// Frequencies of all n-grams of one order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NgramTable {
    pub n: usize,
    pub counts: HashMap<Vec<String>, u64>,
}

impl NgramTable {
    pub fn get<S: AsRef<str>>(&self, gram: &[S]) -> u64 {
        let key: Vec<String> = gram.iter().map(|s| s.as_ref().to_string()).collect();
        self.counts.get(&key).copied().unwrap_or(0)
    }

    pub fn unique(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Entries by descending count, then lexicographic n-gram.
    pub fn sorted(&self) -> Vec<(&[String], u64)> {
        let mut rows: Vec<_> = self.counts.iter().map(|(k, &v)| (k.as_slice(), v)).collect();
        rows.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        rows
    }
}

/// Counts n-grams within each sequence; grams never span two sequences.
pub fn count_ngrams<'a, I>(sequences: I, n: usize) -> Result<NgramTable, CorpusError>
where
    I: IntoIterator<Item = &'a TokenSequence>,
{
    if !(1..=MAX_NGRAM).contains(&n) {
        return Err(CorpusError::BadNgramOrder(n));
    }
    let mut counts: HashMap<Vec<String>, u64> = HashMap::new();
    for seq in sequences {
        for gram in seq.ngrams(n) {
            if let Some(c) = counts.get_mut(gram) {
                *c += 1;
            } else {
                counts.insert(gram.to_vec(), 1);
            }
        }
    }
    Ok(NgramTable { n, counts })
}

/// N-gram counts over the English-filtered comments of a corpus.
pub fn ngram_counts(corpus: &Corpus, n: usize) -> Result<NgramTable, CorpusError> {
    count_ngrams(corpus.english_tokens(), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use proptest::prelude::*;

    fn seqs(texts: &[&str]) -> Vec<TokenSequence> {
        texts.iter().map(|t| tokenize(t)).collect()
    }

    #[test]
    fn repeated_bigram() {
        let t = count_ngrams(&seqs(&["a b a b"]), 2).unwrap();
        assert_eq!(t.unique(), 2);
        assert_eq!(t.get(&["a", "b"]), 2);
        assert_eq!(t.get(&["b", "a"]), 1);
    }

    #[test]
    fn grams_do_not_cross_comments() {
        let t = count_ngrams(&seqs(&["a b", "a b"]), 2).unwrap();
        assert_eq!(t.unique(), 1);
        assert_eq!(t.get(&["a", "b"]), 2);
        assert_eq!(t.get(&["b", "a"]), 0);
    }

    #[test]
    fn empty_and_out_of_range() {
        assert_eq!(count_ngrams(&seqs(&[]), 1).unwrap().unique(), 0);
        assert!(matches!(count_ngrams(&seqs(&["a"]), 0), Err(CorpusError::BadNgramOrder(0))));
        assert!(matches!(count_ngrams(&seqs(&["a"]), 5), Err(CorpusError::BadNgramOrder(5))));
    }

    #[test]
    fn sorted_is_by_count_then_gram() {
        let t = count_ngrams(&seqs(&["b a b c"]), 1).unwrap();
        let order: Vec<_> = t.sorted().into_iter().map(|(g, c)| (g[0].clone(), c)).collect();
        assert_eq!(order, [("b".to_string(), 2), ("a".to_string(), 1), ("c".to_string(), 1)]);
    }

    proptest! {
        #[test]
        fn total_matches_window_count(
            docs in prop::collection::vec(prop::collection::vec("[a-d]", 0..12), 0..8),
            n in 1usize..=4,
        ) {
            let seqs: Vec<TokenSequence> = docs.into_iter().map(TokenSequence::new).collect();
            let expected: usize = seqs.iter().map(|s| s.len().saturating_sub(n - 1)).sum();
            let table = count_ngrams(&seqs, n).unwrap();
            prop_assert_eq!(table.total(), expected as u64);
        }
    }
}
