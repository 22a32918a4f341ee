use serde::Serialize;
use serde_json::{json, Value};

use rarevoice::analytics::AnalyticsError;
use rarevoice::classifier::ClassifierError;
use rarevoice::corpus::CorpusError;
use rarevoice::embeddings::EmbeddingError;
use rarevoice::harness::HarnessError;
use rarevoice::lexicon::LexiconError;
use rarevoice::nnindex::IndexError;
use rarevoice::pipeline::PipelineError;
use rarevoice::sampling::SamplingError;

/// Machine-readable failure: a stable code, a message and optional details.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub details: Value,
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError { code, message: message.into(), details: Value::Null }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::new("io", format!("{}: {e}", path.display())).with_details(json!({ "path": path.display().to_string() }))
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self }).to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for CliError {}

macro_rules! from_error {
    ($ty:ty, $code:expr) => {
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::new($code, e.to_string())
            }
        }
    };
}

from_error!(CorpusError, "corpus");
from_error!(EmbeddingError, "embeddings");
from_error!(IndexError, "index");
from_error!(ClassifierError, "classifier");
from_error!(LexiconError, "lexicon");
from_error!(AnalyticsError, "analytics");
from_error!(PipelineError, "pipeline");
from_error!(serde_json::Error, "json");

impl From<SamplingError> for CliError {
    fn from(e: SamplingError) -> Self {
        let details = match &e {
            SamplingError::AlreadyLabeled(ids)
            | SamplingError::OutsideBatch(ids)
            | SamplingError::MissingLabels(ids)
            | SamplingError::Duplicate(ids) => json!({ "comment_ids": ids }),
            SamplingError::RoundMismatch { batch, pool } => json!({ "batch_round": batch, "pool_round": pool }),
            _ => Value::Null,
        };
        CliError::new("sampling", e.to_string()).with_details(details)
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        let (code, details) = match &e {
            HarnessError::NotInBatch { comment_id, round } => ("not_in_batch", json!({ "comment_id": comment_id, "round": round })),
            HarnessError::AlreadyLabeled { annotator, comment_id, round } => {
                ("already_labeled", json!({ "annotator": annotator, "comment_id": comment_id, "round": round }))
            }
            HarnessError::AnnotatorCount(found) => ("annotator_count", json!({ "annotators": found })),
            HarnessError::Incomplete { annotator, missing } => ("incomplete", json!({ "annotator": annotator, "missing": missing })),
            HarnessError::Unresolved(ids) => ("unresolved", json!({ "comment_ids": ids })),
            HarnessError::NothingToAdjudicate(id) => ("nothing_to_adjudicate", json!({ "comment_id": id })),
            HarnessError::AlreadyAdjudicated(id) => ("already_adjudicated", json!({ "comment_id": id })),
            HarnessError::TooManyAnnotators(a) => ("too_many_annotators", json!({ "annotator": a })),
            HarnessError::EmptyAnnotator => ("empty_annotator", Value::Null),
            HarnessError::RoundIncomplete => ("round_incomplete", Value::Null),
            HarnessError::CorruptLog { path, line, .. } => ("corrupt_log", json!({ "path": path, "line": line })),
            HarnessError::Io(_) => ("io", Value::Null),
            HarnessError::Json(_) => ("json", Value::Null),
        };
        CliError::new(code, e.to_string()).with_details(details)
    }
}
