use serde::{Deserialize, Serialize};

use super::{ClassifierError, Label};
use crate::util::mean_std;

/// Positive-class metrics for one test split. Predicted positive iff prob >= 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub f1: f64,
    /// Absent when the gold labels contain a single class.
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let (mean, std) = mean_std(values);
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub accuracy: MeanStd,
    pub f1: MeanStd,
    pub auc: MeanStd,
    pub n_splits: usize,
    /// Splits whose test set had both classes and therefore an AUC.
    pub n_auc_splits: usize,
}

impl MetricsReport {
    pub fn from_splits(splits: &[SplitMetrics]) -> Self {
        let col = |f: fn(&SplitMetrics) -> f64| -> Vec<f64> { splits.iter().map(f).collect() };
        let aucs: Vec<f64> = splits.iter().filter_map(|s| s.auc).collect();
        MetricsReport {
            precision: MeanStd::of(&col(|s| s.precision)),
            recall: MeanStd::of(&col(|s| s.recall)),
            accuracy: MeanStd::of(&col(|s| s.accuracy)),
            f1: MeanStd::of(&col(|s| s.f1)),
            auc: MeanStd::of(&aucs),
            n_splits: splits.len(),
            n_auc_splits: aucs.len(),
        }
    }
}

/// Mann-Whitney AUC with average ranks for ties (ties count one half).
pub fn auc(scores: &[f64], gold: &[Label]) -> Option<f64> {
    let n_pos = gold.iter().filter(|l| l.is_positive()).count();
    let n_neg = gold.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[i].partial_cmp(&scores[j]).unwrap_or(std::cmp::Ordering::Equal));
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // 1-based ranks start+1..=end share their average
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        let pos_in_group = order[start..end].iter().filter(|&&i| gold[i].is_positive()).count();
        rank_sum_pos += avg_rank * pos_in_group as f64;
        start = end;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Some((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

pub fn evaluate(predictions: &[(f64, Label)]) -> SplitMetrics {
    let (mut tp, mut fp, mut tn, mut fneg) = (0usize, 0usize, 0usize, 0usize);
    for &(p, gold) in predictions {
        match (p >= 0.5, gold.is_positive()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fneg += 1,
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fneg);
    let accuracy = ratio(tp + tn, predictions.len());
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    let scores: Vec<f64> = predictions.iter().map(|p| p.0).collect();
    let gold: Vec<Label> = predictions.iter().map(|p| p.1).collect();
    SplitMetrics { precision, recall, accuracy, f1, auc: auc(&scores, &gold) }
}

/// Chance-corrected agreement between two aligned binary label lists.
pub fn cohen_kappa(a: &[Label], b: &[Label]) -> Result<f64, ClassifierError> {
    if a.len() != b.len() {
        return Err(ClassifierError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(ClassifierError::Empty);
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let pa = a.iter().filter(|l| l.is_positive()).count() as f64 / n;
    let pb = b.iter().filter(|l| l.is_positive()).count() as f64 / n;
    let p_o = agree / n;
    let p_e = pa * pb + (1.0 - pa) * (1.0 - pb);
    if p_e == 1.0 {
        return Ok(if p_o == 1.0 { 1.0 } else { 0.0 });
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}
