use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{evaluate, ClassifierConfig, ClassifierError, Label, LabeledExample, MetricsReport, SplitMetrics, TrainedClassifier};
use crate::corpus::{Corpus, TokenSequence};
use crate::embeddings::CommentVectorMap;
use crate::util::rng_for;

const MAX_SPLIT_ATTEMPTS: u64 = 1000;

/// Tokenized documents with gold labels and, optionally, their normalized
/// comment embeddings (row-aligned).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    pub ids: Vec<String>,
    pub docs: Vec<TokenSequence>,
    pub labels: Vec<Label>,
    pub embeddings: Option<Vec<Vec<f32>>>,
}

impl LabeledData {
    pub fn new(docs: Vec<TokenSequence>, labels: Vec<Label>, embeddings: Option<Vec<Vec<f32>>>) -> Self {
        assert_eq!(docs.len(), labels.len());
        if let Some(e) = &embeddings {
            assert_eq!(e.len(), docs.len());
        }
        let ids = (0..docs.len()).map(|i| i.to_string()).collect();
        LabeledData { ids, docs, labels, embeddings }
    }

    /// Rows for labeled examples whose comments exist in `corpus`.
    pub fn from_examples(examples: &[LabeledExample], corpus: &Corpus, vectors: Option<&CommentVectorMap>) -> Self {
        let mut data = LabeledData { ids: Vec::new(), docs: Vec::new(), labels: Vec::new(), embeddings: vectors.map(|_| Vec::new()) };
        let dim = vectors.and_then(|m| m.values().next().map(Vec::len)).unwrap_or(0);
        for ex in examples {
            let Some(tokens) = corpus.tokens(&ex.comment_id) else { continue };
            data.ids.push(ex.comment_id.clone());
            data.docs.push(tokens.clone());
            data.labels.push(ex.label);
            if let (Some(out), Some(m)) = (data.embeddings.as_mut(), vectors) {
                out.push(m.get(&ex.comment_id).cloned().unwrap_or_else(|| vec![0.0; dim]));
            }
        }
        data
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn embedding(&self, row: usize) -> Option<&[f32]> {
        self.embeddings.as_ref().map(|e| e[row].as_slice())
    }

    pub fn embedding_dim(&self) -> usize {
        self.embeddings.as_ref().and_then(|e| e.first().map(Vec::len)).unwrap_or(0)
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|l| l.is_positive()).count()
    }
}

fn draw_split(n: usize, n_test: usize, labels: &[Label], seed: u64, split: usize) -> Result<(Vec<usize>, Vec<usize>), ClassifierError> {
    for attempt in 0..MAX_SPLIT_ATTEMPTS {
        let mut rng = rng_for(seed, split as u64, attempt);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let (test, train) = perm.split_at(n_test);
        let has_pos = train.iter().any(|&i| labels[i].is_positive());
        let has_neg = train.iter().any(|&i| !labels[i].is_positive());
        if has_pos && has_neg {
            let mut train = train.to_vec();
            let mut test = test.to_vec();
            train.sort_unstable();
            test.sort_unstable();
            return Ok((train, test));
        }
    }
    Err(ClassifierError::SplitImpossible(format!("no valid split after {MAX_SPLIT_ATTEMPTS} attempts")))
}

/// Trains and tests on `n_splits` random train/test splits. Split `i` is drawn
/// from a stream derived from `(seed, i)`, so splits can run in parallel and
/// the report is reproducible. Splits whose training part lacks a class are
/// redrawn.
pub fn repeated_eval(
    data: &LabeledData,
    config: &ClassifierConfig,
    n_splits: usize,
    train_fraction: f64,
    seed: u64,
) -> Result<MetricsReport, ClassifierError> {
    if n_splits == 0 {
        return Err(ClassifierError::BadArgument("n_splits must be positive".into()));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(ClassifierError::BadArgument(format!("train_fraction {train_fraction} outside (0, 1)")));
    }
    let n = data.len();
    let n_pos = data.positives();
    if n_pos == 0 || n_pos == n {
        return Err(ClassifierError::SingleClass);
    }
    let n_test = ((n as f64 * (1.0 - train_fraction)).round() as usize).max(1);
    if n < n_test + 2 {
        return Err(ClassifierError::SplitImpossible(format!("{n} rows cannot leave two for training")));
    }
    let splits: Vec<SplitMetrics> = (0..n_splits)
        .into_par_iter()
        .map(|i| {
            let (train, test) = draw_split(n, n_test, &data.labels, seed, i)?;
            let clf = TrainedClassifier::fit(data, &train, config)?;
            let preds: Vec<(f64, Label)> = test
                .iter()
                .map(|&r| clf.predict(&data.docs[r], data.embedding(r).filter(|_| clf.needs_embeddings())).map(|p| (p.prob, data.labels[r])))
                .collect::<Result<_, _>>()?;
            Ok(evaluate(&preds))
        })
        .collect::<Result<_, ClassifierError>>()?;
    Ok(MetricsReport::from_splits(&splits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn separable(n: usize) -> LabeledData {
        let mut docs = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            docs.push(tokenize(&format!("help the people {}", i % 3)));
            labels.push(Label::Positive);
            docs.push(tokenize(&format!("deport all of them {}", i % 3)));
            labels.push(Label::Negative);
        }
        LabeledData::new(docs, labels, None)
    }

    #[test]
    fn perfectly_separable_gives_unit_f1() {
        let cfg = ClassifierConfig { min_df: 1, ..Default::default() };
        let r = repeated_eval(&separable(40), &cfg, 10, 0.9, 3).unwrap();
        assert_eq!(r.f1.mean, 1.0);
        assert_eq!(r.f1.std, 0.0);
        assert_eq!(r.n_splits, 10);
    }

    #[test]
    fn single_split_has_zero_std() {
        let cfg = ClassifierConfig { min_df: 1, ..Default::default() };
        let r = repeated_eval(&separable(20), &cfg, 1, 0.9, 3).unwrap();
        assert_eq!(r.precision.std, 0.0);
        assert_eq!(r.auc.std, 0.0);
    }

    #[test]
    fn reproducible_for_a_seed() {
        let cfg = ClassifierConfig { min_df: 1, ..Default::default() };
        let mut data = separable(30);
        data.labels[0] = Label::Negative;
        data.labels[5] = Label::Positive;
        let a = repeated_eval(&data, &cfg, 8, 0.8, 11).unwrap();
        let b = repeated_eval(&data, &cfg, 8, 0.8, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_small_is_an_error() {
        let data = LabeledData::new(vec![tokenize("a"), tokenize("b")], vec![Label::Positive, Label::Negative], None);
        let cfg = ClassifierConfig { min_df: 1, ..Default::default() };
        assert!(matches!(repeated_eval(&data, &cfg, 5, 0.9, 1), Err(ClassifierError::SplitImpossible(_))));
        let one_class = LabeledData::new(vec![tokenize("a"); 5], vec![Label::Positive; 5], None);
        assert_eq!(repeated_eval(&one_class, &cfg, 5, 0.9, 1), Err(ClassifierError::SingleClass));
    }
}
