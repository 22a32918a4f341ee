//! Two-annotator labeling protocol: durable label and adjudication logs,
//! round resolution, agreement, and the annotation session state served over
//! HTTP by the CLI.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{cohen_kappa, Label, LabeledExample};
use crate::sampling::SamplingBatch;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: line {line}: {message}")]
    CorruptLog { path: String, line: usize, message: String },
    #[error("comment '{comment_id}' is not in the round {round} batch")]
    NotInBatch { comment_id: String, round: u32 },
    #[error("annotator '{annotator}' already labeled '{comment_id}' in round {round}")]
    AlreadyLabeled { annotator: String, comment_id: String, round: u32 },
    #[error("a round needs exactly two annotators, found {0:?}")]
    AnnotatorCount(Vec<String>),
    #[error("annotator '{annotator}' has not labeled {missing:?}")]
    Incomplete { annotator: String, missing: Vec<String> },
    #[error("disagreements without adjudication: {0:?}")]
    Unresolved(Vec<String>),
    #[error("'{0}' has no disagreement to adjudicate")]
    NothingToAdjudicate(String),
    #[error("'{0}' was already adjudicated")]
    AlreadyAdjudicated(String),
    #[error("a third annotator '{0}' cannot join this round")]
    TooManyAnnotators(String),
    #[error("annotator id must be non-empty")]
    EmptyAnnotator,
    #[error("round is not complete yet")]
    RoundIncomplete,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelValue {
    Positive,
    Negative,
    Skip,
}

impl LabelValue {
    pub fn as_label(self) -> Option<Label> {
        match self {
            LabelValue::Positive => Some(Label::Positive),
            LabelValue::Negative => Some(Label::Negative),
            LabelValue::Skip => None,
        }
    }
}

impl From<Label> for LabelValue {
    fn from(l: Label) -> Self {
        match l {
            Label::Positive => LabelValue::Positive,
            Label::Negative => LabelValue::Negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub comment_id: String,
    pub annotator_id: String,
    pub label: LabelValue,
    pub round: u32,
    /// Milliseconds since the Unix epoch.
    pub recorded_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjudicationRecord {
    pub comment_id: String,
    pub resolved_label: Label,
    pub round: u32,
    #[serde(default)]
    pub note: String,
}

pub fn now_millis() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// Append-only line-delimited JSON file. Every append is flushed and synced
/// before it returns. A torn final line (no trailing newline) left by a crash
/// is dropped on open.
#[derive(Debug)]
pub struct JsonlLog<T> {
    path: PathBuf,
    file: File,
    records: Vec<T>,
}

impl<T: Serialize + DeserializeOwned + Clone> JsonlLog<T> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new().read(true).create(true).append(true).open(&path)?;
        let mut records = Vec::new();
        let mut good_len = 0u64;
        {
            let mut reader = BufReader::new(&file);
            let mut line = String::new();
            let mut line_no = 0;
            loop {
                line.clear();
                let n = reader.read_line(&mut line)?;
                if n == 0 {
                    break;
                }
                line_no += 1;
                if !line.ends_with('\n') {
                    break;
                }
                if !line.trim().is_empty() {
                    let rec = serde_json::from_str(line.trim_end()).map_err(|e| HarnessError::CorruptLog {
                        path: path.display().to_string(),
                        line: line_no,
                        message: e.to_string(),
                    })?;
                    records.push(rec);
                }
                good_len += n as u64;
            }
        }
        if file.metadata()?.len() != good_len {
            file.set_len(good_len)?;
            file.sync_all()?;
        }
        file.seek(SeekFrom::End(0))?;
        Ok(JsonlLog { path, file, records })
    }

    pub fn append(&mut self, record: T) -> Result<()> {
        let mut line = serde_json::to_vec(&record)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[T] {
        &self.records
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(reader: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| HarnessError::CorruptLog {
            path: "<input>".into(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Per-item labels of a round: comment id to annotator to label.
fn votes_by_item<'a>(records: &'a [LabelRecord], round: u32) -> BTreeMap<&'a str, BTreeMap<&'a str, LabelValue>> {
    let mut out: BTreeMap<&str, BTreeMap<&str, LabelValue>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.round == round) {
        out.entry(r.comment_id.as_str()).or_default().insert(r.annotator_id.as_str(), r.label);
    }
    out
}

fn annotators(records: &[LabelRecord], round: u32) -> Vec<String> {
    records.iter().filter(|r| r.round == round).map(|r| r.annotator_id.clone()).collect::<BTreeSet<_>>().into_iter().collect()
}

/// Checks that exactly two annotators labeled every batch item; returns them.
fn complete_pair(records: &[LabelRecord], batch: &SamplingBatch) -> Result<(String, String)> {
    let ann = annotators(records, batch.round);
    if ann.len() != 2 {
        return Err(HarnessError::AnnotatorCount(ann));
    }
    let votes = votes_by_item(records, batch.round);
    for a in &ann {
        let missing: Vec<String> = batch
            .comment_ids
            .iter()
            .filter(|id| !votes.get(id.as_str()).is_some_and(|v| v.contains_key(a.as_str())))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(HarnessError::Incomplete { annotator: a.clone(), missing });
        }
    }
    Ok((ann[0].clone(), ann[1].clone()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundResolution {
    pub resolved: Vec<LabeledExample>,
    /// Items that stay unlabeled (a skip without adjudication).
    pub skipped: Vec<String>,
}

/// Resolves a round: agreement gives the label, anything else needs an
/// adjudication; a skip that nobody adjudicated leaves the item unlabeled.
pub fn resolve_round(records: &[LabelRecord], adjudications: &[AdjudicationRecord], batch: &SamplingBatch) -> Result<RoundResolution> {
    let (a, b) = complete_pair(records, batch)?;
    let votes = votes_by_item(records, batch.round);
    let adj: HashMap<&str, Label> =
        adjudications.iter().filter(|r| r.round == batch.round).map(|r| (r.comment_id.as_str(), r.resolved_label)).collect();
    let mut out = RoundResolution { resolved: Vec::new(), skipped: Vec::new() };
    let mut unresolved = Vec::new();
    for id in &batch.comment_ids {
        let v = &votes[id.as_str()];
        let (la, lb) = (v[a.as_str()], v[b.as_str()]);
        let mut annotator_labels = Vec::new();
        for (who, l) in [(&a, la), (&b, lb)] {
            if let Some(l) = l.as_label() {
                annotator_labels.push((who.clone(), l));
            }
        }
        let adjudicated = adj.get(id.as_str()).copied();
        match (la.as_label(), lb.as_label(), adjudicated) {
            (Some(x), Some(y), None) if x == y => {
                out.resolved.push(LabeledExample::resolve(id, batch.round, batch.strategy, annotator_labels, None).expect("agreement"))
            }
            (_, _, Some(l)) => {
                out.resolved.push(LabeledExample::resolve(id, batch.round, batch.strategy, annotator_labels, Some(l)).expect("adjudicated"))
            }
            (Some(_), Some(_), None) => unresolved.push(id.clone()),
            _ => out.skipped.push(id.clone()),
        }
    }
    if !unresolved.is_empty() {
        return Err(HarnessError::Unresolved(unresolved));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub annotators: (String, String),
    /// Items both annotators labeled positive or negative.
    pub n_items: usize,
    pub n_agree: usize,
    /// Items where at least one annotator skipped.
    pub n_with_skip: usize,
    /// None when no item was labeled by both.
    pub kappa: Option<f64>,
}

/// Cohen's kappa over the round's items that both annotators labeled.
pub fn agreement(records: &[LabelRecord], batch: &SamplingBatch) -> Result<AgreementReport> {
    let (a, b) = complete_pair(records, batch)?;
    let votes = votes_by_item(records, batch.round);
    let (mut xa, mut xb) = (Vec::new(), Vec::new());
    let mut n_with_skip = 0;
    for id in &batch.comment_ids {
        let v = &votes[id.as_str()];
        match (v[a.as_str()].as_label(), v[b.as_str()].as_label()) {
            (Some(x), Some(y)) => {
                xa.push(x);
                xb.push(y);
            }
            _ => n_with_skip += 1,
        }
    }
    let n_agree = xa.iter().zip(&xb).filter(|(x, y)| x == y).count();
    let kappa = if xa.is_empty() { None } else { Some(cohen_kappa(&xa, &xb).expect("aligned non-empty")) };
    Ok(AgreementReport { annotators: (a, b), n_items: xa.len(), n_agree, n_with_skip, kappa })
}

/// Cohen's kappa pooled over several complete rounds.
pub fn pooled_kappa(records: &[LabelRecord], batches: &[SamplingBatch]) -> Result<Option<f64>> {
    let (mut xa, mut xb) = (Vec::new(), Vec::new());
    for batch in batches {
        let (a, b) = complete_pair(records, batch)?;
        let votes = votes_by_item(records, batch.round);
        for id in &batch.comment_ids {
            let v = &votes[id.as_str()];
            if let (Some(x), Some(y)) = (v[a.as_str()].as_label(), v[b.as_str()].as_label()) {
                xa.push(x);
                xb.push(y);
            }
        }
    }
    if xa.is_empty() {
        return Ok(None);
    }
    Ok(Some(cohen_kappa(&xa, &xb).expect("aligned non-empty")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub comment_id: String,
    pub labels: BTreeMap<String, LabelValue>,
    pub adjudicated: Option<Label>,
}

/// Items whose two labels differ (including skips).
pub fn disagreements(records: &[LabelRecord], adjudications: &[AdjudicationRecord], batch: &SamplingBatch) -> Result<Vec<Disagreement>> {
    let (a, b) = complete_pair(records, batch)?;
    let votes = votes_by_item(records, batch.round);
    let adj: HashMap<&str, Label> =
        adjudications.iter().filter(|r| r.round == batch.round).map(|r| (r.comment_id.as_str(), r.resolved_label)).collect();
    Ok(batch
        .comment_ids
        .iter()
        .filter_map(|id| {
            let v = &votes[id.as_str()];
            let (la, lb) = (v[a.as_str()], v[b.as_str()]);
            let split = la != lb || la == LabelValue::Skip;
            split.then(|| Disagreement {
                comment_id: id.clone(),
                labels: [(a.clone(), la), (b.clone(), lb)].into(),
                adjudicated: adj.get(id.as_str()).copied(),
            })
        })
        .collect())
}

/// Unlabeled comments by descending probability, ties by id.
pub fn rank_wild(probs: &[(String, f64)], labeled_ids: &HashSet<String>, top_n: usize) -> Vec<(String, f64)> {
    let mut v: Vec<(String, f64)> = probs.iter().filter(|(id, _)| !labeled_ids.contains(id)).cloned().collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(top_n);
    v
}

/// Short statement of the labeling criteria shown to annotators.
pub const LABEL_DEFINITION: &str = r#"{
  "positive": [
    "The comment takes the side of the persecuted minority: it defends them, expresses sympathy or solidarity, or calls for help, rights or protection for them.",
    "Support may be explicit or implied, for example criticising their persecutors or countering hostile claims about them."
  ],
  "negative": [
    "Hostile, dehumanising or exclusionary content about the minority.",
    "Neutral, off-topic or purely factual comments that do not take their side.",
    "Comments that are merely not hateful but express no support."
  ],
  "skip": "Use when the comment cannot be judged, for example it is unreadable or not in English."
}"#;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchItem {
    pub comment_id: String,
    pub text: String,
    /// This annotator's own label, if already given.
    pub label: Option<LabelValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub round: u32,
    pub batch_size: usize,
    pub labeled: BTreeMap<String, usize>,
    pub complete: bool,
    pub adjudications: usize,
}

/// State of one annotation round: the batch, comment texts and the two logs.
/// Mutations go through `&mut self`, so a single owner serializes writes.
#[derive(Debug)]
pub struct AnnotationSession {
    batch: SamplingBatch,
    in_batch: HashSet<String>,
    texts: HashMap<String, String>,
    labels: JsonlLog<LabelRecord>,
    adjudications: JsonlLog<AdjudicationRecord>,
}

impl AnnotationSession {
    pub fn open(
        batch: SamplingBatch,
        texts: HashMap<String, String>,
        label_log: impl AsRef<Path>,
        adjudication_log: impl AsRef<Path>,
    ) -> Result<Self> {
        let in_batch = batch.comment_ids.iter().cloned().collect();
        Ok(AnnotationSession {
            batch,
            in_batch,
            texts,
            labels: JsonlLog::open(label_log)?,
            adjudications: JsonlLog::open(adjudication_log)?,
        })
    }

    pub fn batch(&self) -> &SamplingBatch {
        &self.batch
    }

    pub fn label_records(&self) -> &[LabelRecord] {
        self.labels.records()
    }

    pub fn adjudication_records(&self) -> &[AdjudicationRecord] {
        self.adjudications.records()
    }

    fn round_records(&self) -> impl Iterator<Item = &LabelRecord> {
        self.labels.records().iter().filter(move |r| r.round == self.batch.round)
    }

    /// Batch items with only the requesting annotator's own labels.
    pub fn items_for(&self, annotator: &str) -> Result<Vec<BatchItem>> {
        if annotator.is_empty() {
            return Err(HarnessError::EmptyAnnotator);
        }
        let own: HashMap<&str, LabelValue> =
            self.round_records().filter(|r| r.annotator_id == annotator).map(|r| (r.comment_id.as_str(), r.label)).collect();
        Ok(self
            .batch
            .comment_ids
            .iter()
            .map(|id| BatchItem {
                comment_id: id.clone(),
                text: self.texts.get(id).cloned().unwrap_or_default(),
                label: own.get(id.as_str()).copied(),
            })
            .collect())
    }

    /// Validates and durably appends one label.
    pub fn record_label(&mut self, annotator: &str, comment_id: &str, label: LabelValue) -> Result<LabelRecord> {
        if annotator.is_empty() {
            return Err(HarnessError::EmptyAnnotator);
        }
        let round = self.batch.round;
        if !self.in_batch.contains(comment_id) {
            return Err(HarnessError::NotInBatch { comment_id: comment_id.to_string(), round });
        }
        if self.round_records().any(|r| r.annotator_id == annotator && r.comment_id == comment_id) {
            return Err(HarnessError::AlreadyLabeled { annotator: annotator.to_string(), comment_id: comment_id.to_string(), round });
        }
        let known: BTreeSet<&str> = self.round_records().map(|r| r.annotator_id.as_str()).collect();
        if known.len() >= 2 && !known.contains(annotator) {
            return Err(HarnessError::TooManyAnnotators(annotator.to_string()));
        }
        let rec = LabelRecord { comment_id: comment_id.to_string(), annotator_id: annotator.to_string(), label, round, recorded_at: now_millis() };
        self.labels.append(rec.clone())?;
        Ok(rec)
    }

    pub fn progress(&self) -> Progress {
        let mut labeled: BTreeMap<String, usize> = BTreeMap::new();
        for r in self.round_records() {
            *labeled.entry(r.annotator_id.clone()).or_default() += 1;
        }
        let n = self.batch.comment_ids.len();
        let complete = labeled.len() == 2 && labeled.values().all(|&c| c == n);
        let adjudications = self.adjudications.records().iter().filter(|r| r.round == self.batch.round).count();
        Progress { round: self.batch.round, batch_size: n, labeled, complete, adjudications }
    }

    fn require_complete(&self) -> Result<()> {
        if self.progress().complete {
            Ok(())
        } else {
            Err(HarnessError::RoundIncomplete)
        }
    }

    pub fn agreement(&self) -> Result<AgreementReport> {
        self.require_complete()?;
        agreement(self.labels.records(), &self.batch)
    }

    pub fn disagreements(&self) -> Result<Vec<Disagreement>> {
        self.require_complete()?;
        disagreements(self.labels.records(), self.adjudications.records(), &self.batch)
    }

    pub fn adjudicate(&mut self, comment_id: &str, resolved_label: Label, note: String) -> Result<AdjudicationRecord> {
        let round = self.batch.round;
        if !self.in_batch.contains(comment_id) {
            return Err(HarnessError::NotInBatch { comment_id: comment_id.to_string(), round });
        }
        let open = self.disagreements()?;
        let Some(d) = open.iter().find(|d| d.comment_id == comment_id) else {
            return Err(HarnessError::NothingToAdjudicate(comment_id.to_string()));
        };
        if d.adjudicated.is_some() {
            return Err(HarnessError::AlreadyAdjudicated(comment_id.to_string()));
        }
        let rec = AdjudicationRecord { comment_id: comment_id.to_string(), resolved_label, round, note };
        self.adjudications.append(rec.clone())?;
        Ok(rec)
    }

    pub fn resolve(&self) -> Result<RoundResolution> {
        resolve_round(self.labels.records(), self.adjudications.records(), &self.batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::Strategy;
    use serde_json::json;

    fn batch(ids: &[&str]) -> SamplingBatch {
        SamplingBatch { strategy: Strategy::Random, round: 1, params: json!({}), comment_ids: ids.iter().map(|s| s.to_string()).collect() }
    }

    fn rec(c: &str, a: &str, l: LabelValue) -> LabelRecord {
        LabelRecord { comment_id: c.into(), annotator_id: a.into(), label: l, round: 1, recorded_at: 0 }
    }

    use LabelValue::{Negative as N, Positive as P, Skip as S};

    #[test]
    fn full_agreement() {
        let b = batch(&["x", "y"]);
        let log = [rec("x", "a", P), rec("y", "a", N), rec("x", "b", P), rec("y", "b", N)];
        let r = resolve_round(&log, &[], &b).unwrap();
        let labels: Vec<Label> = r.resolved.iter().map(|e| e.label).collect();
        assert_eq!(labels, [Label::Positive, Label::Negative]);
        assert!(r.skipped.is_empty());
    }

    #[test]
    fn disagreement_rules() {
        let b = batch(&["x", "y"]);
        let log = [rec("x", "a", P), rec("y", "a", N), rec("x", "b", N), rec("y", "b", N)];
        match resolve_round(&log, &[], &b) {
            Err(HarnessError::Unresolved(ids)) => assert_eq!(ids, ["x"]),
            other => panic!("{other:?}"),
        }
        let adj = [AdjudicationRecord { comment_id: "x".into(), resolved_label: Label::Negative, round: 1, note: String::new() }];
        let r = resolve_round(&log, &adj, &b).unwrap();
        assert_eq!(r.resolved[0].label, Label::Negative);
        assert!(r.resolved[0].adjudicated);
    }

    #[test]
    fn skips_return_to_pool() {
        let b = batch(&["x", "y"]);
        let log = [rec("x", "a", S), rec("y", "a", P), rec("x", "b", P), rec("y", "b", P)];
        let r = resolve_round(&log, &[], &b).unwrap();
        assert_eq!(r.skipped, ["x"]);
        assert_eq!(r.resolved.len(), 1);
    }

    #[test]
    fn incomplete_and_annotator_count() {
        let b = batch(&["x", "y"]);
        let log = [rec("x", "a", P), rec("y", "a", P), rec("x", "b", P)];
        assert!(matches!(resolve_round(&log, &[], &b), Err(HarnessError::Incomplete { annotator, missing }) if annotator == "b" && missing == ["y"]));
        assert!(matches!(resolve_round(&log[..2], &[], &b), Err(HarnessError::AnnotatorCount(_))));
    }

    #[test]
    fn kappa_report() {
        let b = batch(&["w", "x", "y", "z"]);
        let log = [
            rec("w", "a", P), rec("x", "a", P), rec("y", "a", N), rec("z", "a", N),
            rec("w", "b", P), rec("x", "b", N), rec("y", "b", N), rec("z", "b", N),
        ];
        let r = agreement(&log, &b).unwrap();
        assert_eq!(r.kappa, Some(0.5));
        assert_eq!((r.n_items, r.n_agree), (4, 3));
    }

    #[test]
    fn ranking() {
        let probs = vec![("a".to_string(), 0.2), ("b".to_string(), 0.9), ("c".to_string(), 0.9), ("d".to_string(), 0.95)];
        let labeled: HashSet<String> = ["d".to_string()].into();
        let r = rank_wild(&probs, &labeled, 2);
        assert_eq!(r, vec![("b".to_string(), 0.9), ("c".to_string(), 0.9)]);
        assert_eq!(rank_wild(&probs, &labeled, 100).len(), 3);
    }

    #[test]
    fn log_survives_reopen_and_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels.jsonl");
        {
            let mut log: JsonlLog<LabelRecord> = JsonlLog::open(&p).unwrap();
            log.append(rec("x", "a", P)).unwrap();
            log.append(rec("y", "a", N)).unwrap();
        }
        std::fs::OpenOptions::new().append(true).open(&p).unwrap().write_all(b"{\"comment_id\":\"z").unwrap();
        let mut log: JsonlLog<LabelRecord> = JsonlLog::open(&p).unwrap();
        assert_eq!(log.records().len(), 2);
        log.append(rec("z", "a", S)).unwrap();
        let again: JsonlLog<LabelRecord> = JsonlLog::open(&p).unwrap();
        assert_eq!(again.records(), log.records());
    }

    #[test]
    fn session_flow() {
        let dir = tempfile::tempdir().unwrap();
        let b = batch(&["x", "y"]);
        let texts = [("x".to_string(), "text x".to_string()), ("y".to_string(), "text y".to_string())].into();
        let mut s = AnnotationSession::open(b, texts, dir.path().join("l"), dir.path().join("a")).unwrap();
        assert!(matches!(s.record_label("a", "nope", P), Err(HarnessError::NotInBatch { .. })));
        s.record_label("a", "x", P).unwrap();
        assert!(matches!(s.record_label("a", "x", N), Err(HarnessError::AlreadyLabeled { .. })));
        // b sees none of a's labels
        assert!(s.items_for("b").unwrap().iter().all(|i| i.label.is_none()));
        assert_eq!(s.items_for("a").unwrap()[0].label, Some(P));
        assert!(matches!(s.agreement(), Err(HarnessError::RoundIncomplete)));
        s.record_label("a", "y", N).unwrap();
        s.record_label("b", "x", N).unwrap();
        assert!(matches!(s.record_label("c", "x", N), Err(HarnessError::TooManyAnnotators(_))));
        s.record_label("b", "y", N).unwrap();
        assert!(s.progress().complete);
        assert_eq!(s.disagreements().unwrap().len(), 1);
        assert!(matches!(s.adjudicate("y", Label::Negative, String::new()), Err(HarnessError::NothingToAdjudicate(_))));
        s.adjudicate("x", Label::Positive, "discussed".into()).unwrap();
        assert!(matches!(s.adjudicate("x", Label::Positive, String::new()), Err(HarnessError::AlreadyAdjudicated(_))));
        let r = s.resolve().unwrap();
        assert_eq!(r.resolved.len(), 2);
    }

    #[test]
    fn definition_is_json() {
        let v: serde_json::Value = serde_json::from_str(LABEL_DEFINITION).unwrap();
        assert!(v["positive"].is_array());
    }
}
