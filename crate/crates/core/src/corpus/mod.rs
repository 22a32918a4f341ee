//! Comment corpus: ingestion of pre-crawled records, tokenization, the
//! language filter and n-gram statistics.

mod language;
mod ngram;
mod tokenize;

use std::collections::HashMap;
use std::io::{BufRead, Write};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use language::{
    function_word_ratio, is_function_word, passes_english_filter, DEFAULT_STOPWORD_RATIO,
    FUNCTION_WORDS, MIN_TOKENS_FOR_FILTER,
};
pub use ngram::{count_ngrams, ngram_counts, NgramTable, MAX_NGRAM};
pub use tokenize::{tokenize, TokenSequence};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {kind} '{id}' conflicts with an earlier record of the same id")]
    ConflictingDuplicate { kind: &'static str, id: String, line: usize },
    #[error("threshold {0} is outside [0, 1]")]
    BadThreshold(f64),
    #[error("n-gram order {0} is outside 1..={max}", max = MAX_NGRAM)]
    BadNgramOrder(usize),
    #[error("comment '{0}' has empty text")]
    EmptyText(String),
    #[error("unknown comment '{0}'")]
    UnknownComment(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    pub video_id: String,
    pub user_id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posted_at: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_english: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Video {
    pub id: String,
    pub channel_id: String,
    pub title: String,
    pub views: u64,
    pub likes: u64,
    pub dislikes: u64,
    pub comment_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub id: String,
    pub comment_ids: Vec<String>,
}

/// One line of the ingest format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Record {
    Comment(Comment),
    Video(Video),
    User(UserRecord),
}

/// A reference that did not resolve after ingest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DanglingRef {
    pub kind: String,
    pub id: String,
    pub field: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

/// Immutable comment corpus. Comments keep their ingest order.
#[derive(Debug, Clone)]
pub struct Corpus {
    comments: Vec<Comment>,
    tokens: Vec<TokenSequence>,
    comment_pos: HashMap<String, usize>,
    videos: Vec<Video>,
    video_pos: HashMap<String, usize>,
    users: IndexMap<String, UserRecord>,
    dangling: Vec<DanglingRef>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.comments == other.comments
            && self.videos == other.videos
            && self.users == other.users
            && self.dangling == other.dangling
    }
}

#[derive(Debug)]
pub struct IngestOutcome {
    pub corpus: Corpus,
    pub line_errors: Vec<LineError>,
    pub duplicates_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub n_comments: usize,
    pub n_videos: usize,
    pub n_users: usize,
    pub n_english: usize,
    pub duplicates_skipped: usize,
    pub dangling: Vec<DanglingRef>,
    pub line_errors: Vec<LineError>,
}

/// Accumulates records; duplicates with identical payloads are ignored.
#[derive(Debug, Default)]
pub struct CorpusBuilder {
    comments: Vec<Comment>,
    comment_pos: HashMap<String, usize>,
    videos: Vec<Video>,
    video_pos: HashMap<String, usize>,
    explicit_users: IndexMap<String, UserRecord>,
    duplicates: usize,
}

impl CorpusBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `Ok(false)` when an identical record was already present.
    pub fn push(&mut self, record: Record, line: usize) -> Result<bool, CorpusError> {
        match record {
            Record::Comment(c) => self.push_comment(c, line),
            Record::Video(v) => self.push_video(v, line),
            Record::User(u) => self.push_user(u, line),
        }
    }

    pub fn push_comment(&mut self, comment: Comment, line: usize) -> Result<bool, CorpusError> {
        if comment.text.trim().is_empty() {
            return Err(CorpusError::EmptyText(comment.id));
        }
        if let Some(&pos) = self.comment_pos.get(&comment.id) {
            return self.duplicate(&self.comments[pos] == &comment, "comment", comment.id, line);
        }
        self.comment_pos.insert(comment.id.clone(), self.comments.len());
        self.comments.push(comment);
        Ok(true)
    }

    pub fn push_video(&mut self, video: Video, line: usize) -> Result<bool, CorpusError> {
        if let Some(&pos) = self.video_pos.get(&video.id) {
            return self.duplicate(self.videos[pos] == video, "video", video.id, line);
        }
        self.video_pos.insert(video.id.clone(), self.videos.len());
        self.videos.push(video);
        Ok(true)
    }

    pub fn push_user(&mut self, user: UserRecord, line: usize) -> Result<bool, CorpusError> {
        if let Some(existing) = self.explicit_users.get(&user.id) {
            return self.duplicate(existing == &user, "user", user.id, line);
        }
        self.explicit_users.insert(user.id.clone(), user);
        Ok(true)
    }

    fn duplicate(
        &mut self,
        identical: bool,
        kind: &'static str,
        id: String,
        line: usize,
    ) -> Result<bool, CorpusError> {
        if identical {
            self.duplicates += 1;
            Ok(false)
        } else {
            Err(CorpusError::ConflictingDuplicate { kind, id, line })
        }
    }

    pub fn duplicates_skipped(&self) -> usize {
        self.duplicates
    }

    pub fn finish(self) -> Corpus {
        let mut dangling = Vec::new();
        for c in &self.comments {
            if !self.video_pos.contains_key(&c.video_id) {
                dangling.push(DanglingRef {
                    kind: "comment".into(),
                    id: c.id.clone(),
                    field: "video_id".into(),
                    target: c.video_id.clone(),
                });
            }
        }

        let mut users: IndexMap<String, UserRecord> = IndexMap::new();
        for c in &self.comments {
            users
                .entry(c.user_id.clone())
                .or_insert_with(|| UserRecord { id: c.user_id.clone(), comment_ids: Vec::new() })
                .comment_ids
                .push(c.id.clone());
        }
        for (id, explicit) in &self.explicit_users {
            for cid in &explicit.comment_ids {
                let owned = self
                    .comment_pos
                    .get(cid)
                    .is_some_and(|&p| &self.comments[p].user_id == id);
                if !owned {
                    dangling.push(DanglingRef {
                        kind: "user".into(),
                        id: id.clone(),
                        field: "comment_ids".into(),
                        target: cid.clone(),
                    });
                }
            }
            users
                .entry(id.clone())
                .or_insert_with(|| UserRecord { id: id.clone(), comment_ids: Vec::new() });
        }

        let tokens = self.comments.iter().map(|c| tokenize(&c.text)).collect();
        Corpus {
            comments: self.comments,
            tokens,
            comment_pos: self.comment_pos,
            videos: self.videos,
            video_pos: self.video_pos,
            users,
            dangling,
        }
    }
}

/// Reads line-delimited JSON records. Malformed lines are collected with their
/// 1-based line numbers; a conflicting duplicate aborts the ingest.
pub fn ingest<R: BufRead>(reader: R) -> Result<IngestOutcome, CorpusError> {
    let mut builder = CorpusBuilder::new();
    let mut line_errors = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                line_errors.push(LineError { line: line_no, message: e.to_string() });
                continue;
            }
        };
        match builder.push(record, line_no) {
            Ok(_) => {}
            Err(e @ CorpusError::EmptyText(_)) => {
                line_errors.push(LineError { line: line_no, message: e.to_string() })
            }
            Err(e) => return Err(e),
        }
    }
    let duplicates_skipped = builder.duplicates_skipped();
    Ok(IngestOutcome { corpus: builder.finish(), line_errors, duplicates_skipped })
}

impl Corpus {
    pub fn builder() -> CorpusBuilder {
        CorpusBuilder::new()
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    pub fn len(&self) -> usize {
        self.comments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comments.is_empty()
    }

    pub fn comment(&self, id: &str) -> Option<&Comment> {
        self.comment_pos.get(id).map(|&p| &self.comments[p])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.comment_pos.get(id).copied()
    }

    /// Tokens of the comment at ingest position `pos`.
    pub fn tokens_at(&self, pos: usize) -> &TokenSequence {
        &self.tokens[pos]
    }

    pub fn tokens(&self, id: &str) -> Option<&TokenSequence> {
        self.comment_pos.get(id).map(|&p| &self.tokens[p])
    }

    pub fn videos(&self) -> &[Video] {
        &self.videos
    }

    pub fn video(&self, id: &str) -> Option<&Video> {
        self.video_pos.get(id).map(|&p| &self.videos[p])
    }

    pub fn users(&self) -> impl Iterator<Item = &UserRecord> {
        self.users.values()
    }

    pub fn user(&self, id: &str) -> Option<&UserRecord> {
        self.users.get(id)
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn dangling(&self) -> &[DanglingRef] {
        &self.dangling
    }

    /// Comments that have not been marked non-English, with their positions.
    pub fn english(&self) -> impl Iterator<Item = (usize, &Comment)> {
        self.comments.iter().enumerate().filter(|(_, c)| c.is_english != Some(false))
    }

    pub fn english_tokens(&self) -> impl Iterator<Item = &TokenSequence> {
        self.english().map(|(p, _)| &self.tokens[p])
    }

    /// Fills `is_english` on every comment; returns how many passed.
    pub fn apply_language_filter(&mut self, threshold: f64) -> Result<usize, CorpusError> {
        check_threshold(threshold)?;
        let mut passed = 0;
        for (c, t) in self.comments.iter_mut().zip(&self.tokens) {
            let ok = passes_english_filter(t, threshold);
            c.is_english = Some(ok);
            passed += ok as usize;
        }
        Ok(passed)
    }

    pub fn manifest(&self, line_errors: &[LineError], duplicates_skipped: usize) -> CorpusManifest {
        CorpusManifest {
            n_comments: self.comments.len(),
            n_videos: self.videos.len(),
            n_users: self.users.len(),
            n_english: self.english().count(),
            duplicates_skipped,
            dangling: self.dangling.clone(),
            line_errors: line_errors.to_vec(),
        }
    }

    /// Writes videos then comments in the ingest format.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), CorpusError> {
        for v in &self.videos {
            serde_json::to_writer(&mut out, &Record::Video(v.clone()))?;
            out.write_all(b"\n")?;
        }
        for c in &self.comments {
            serde_json::to_writer(&mut out, &Record::Comment(c.clone()))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Language filter on a single comment.
pub fn filter_english(comment: &Comment, threshold: f64) -> Result<bool, CorpusError> {
    check_threshold(threshold)?;
    Ok(passes_english_filter(&tokenize(&comment.text), threshold))
}

fn check_threshold(threshold: f64) -> Result<(), CorpusError> {
    if (0.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(CorpusError::BadThreshold(threshold))
    }
}
