//! Descriptive corpus reports: template continuations, n-gram ranks, the
//! channel-based video partition and its commenter overlap, dominant-side
//! users, lexicon sentiment shares and per-video engagement statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, NgramTable, TokenSequence, MAX_NGRAM};
use crate::lexicon::{classify_sentiment, score_comment, Lexicon, Sentiment};
use crate::util::mean_std;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("invalid argument: {0}")]
    BadArgument(String),
    #[error("both sides of the partition have no commenters")]
    NoCommenters,
    #[error("no comments to score")]
    NoComments,
    #[error("corpus has no videos")]
    NoVideos,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AnalyticsError>;

/// Counts of the token right after each occurrence of `template`.
pub fn template_following_tokens<'a, I>(docs: I, template: &[String]) -> Result<BTreeMap<String, u64>>
where
    I: IntoIterator<Item = &'a TokenSequence>,
{
    if template.is_empty() {
        return Err(AnalyticsError::BadArgument("template is empty".into()));
    }
    let n = template.len();
    let mut out = BTreeMap::new();
    for doc in docs {
        let toks = doc.tokens();
        if toks.len() <= n {
            continue;
        }
        for i in 0..toks.len() - n {
            if toks[i..i + n] == *template {
                *out.entry(toks[i + n].clone()).or_insert(0) += 1;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramRank {
    pub phrase: Vec<String>,
    /// None when the phrase does not occur.
    pub rank: Option<usize>,
    pub count: u64,
    pub unique_ngrams: usize,
    pub percentile: Option<f64>,
}

/// Competition rank of `phrase` among the n-grams of its order (ties share the
/// best rank) and its percentile `100 * (1 - (rank - 1) / unique)`.
pub fn ngram_rank(table: &NgramTable, phrase: &[String]) -> Result<NgramRank> {
    if phrase.is_empty() || phrase.len() > MAX_NGRAM {
        return Err(AnalyticsError::BadArgument(format!("phrase length {} outside 1..={MAX_NGRAM}", phrase.len())));
    }
    if phrase.len() != table.n {
        return Err(AnalyticsError::BadArgument(format!("table holds {}-grams, phrase has {} tokens", table.n, phrase.len())));
    }
    let unique = table.unique();
    let count = table.get(phrase);
    let rank = (count > 0).then(|| 1 + table.counts.values().filter(|&&c| c > count).count());
    let percentile = rank.map(|r| 100.0 * (1.0 - (r - 1) as f64 / unique as f64));
    Ok(NgramRank { phrase: phrase.to_vec(), rank, count, unique_ngrams: unique, percentile })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoPartition {
    pub roh_video_ids: BTreeSet<String>,
    pub other_video_ids: BTreeSet<String>,
    pub roh_channel_ids: Vec<String>,
}

impl VideoPartition {
    pub fn is_roh(&self, video_id: &str) -> Option<bool> {
        if self.roh_video_ids.contains(video_id) {
            Some(true)
        } else if self.other_video_ids.contains(video_id) {
            Some(false)
        } else {
            None
        }
    }
}

pub fn partition_videos(corpus: &Corpus, roh_channel_ids: &[String]) -> Result<VideoPartition> {
    if roh_channel_ids.is_empty() {
        return Err(AnalyticsError::BadArgument("channel list is empty".into()));
    }
    let chans: BTreeSet<&String> = roh_channel_ids.iter().collect();
    let (roh, other): (Vec<_>, Vec<_>) = corpus.videos().iter().partition(|v| chans.contains(&v.channel_id));
    Ok(VideoPartition {
        roh_video_ids: roh.into_iter().map(|v| v.id.clone()).collect(),
        other_video_ids: other.into_iter().map(|v| v.id.clone()).collect(),
        roh_channel_ids: roh_channel_ids.to_vec(),
    })
}

/// Reads one channel id per line, ignoring blank lines.
pub fn parse_channel_list(text: &str) -> Vec<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserOverlap {
    pub n_roh_users: usize,
    pub n_other_users: usize,
    pub n_both: usize,
    pub jaccard: f64,
}

/// |A ∩ B| / |A ∪ B| of two sets.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Option<f64> {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    (union > 0).then(|| inter as f64 / union as f64)
}

fn side_counts(corpus: &Corpus, partition: &VideoPartition) -> BTreeMap<String, (usize, usize)> {
    let mut per_user: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for c in corpus.comments() {
        match partition.is_roh(&c.video_id) {
            Some(true) => per_user.entry(c.user_id.clone()).or_default().0 += 1,
            Some(false) => per_user.entry(c.user_id.clone()).or_default().1 += 1,
            None => {}
        }
    }
    per_user
}

pub fn user_overlap(corpus: &Corpus, partition: &VideoPartition) -> Result<UserOverlap> {
    let counts = side_counts(corpus, partition);
    let a: BTreeSet<&String> = counts.iter().filter(|(_, c)| c.0 > 0).map(|(u, _)| u).collect();
    let b: BTreeSet<&String> = counts.iter().filter(|(_, c)| c.1 > 0).map(|(u, _)| u).collect();
    let j = jaccard(&a, &b).ok_or(AnalyticsError::NoCommenters)?;
    Ok(UserOverlap { n_roh_users: a.len(), n_other_users: b.len(), n_both: a.intersection(&b).count(), jaccard: j })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominantSideUsers {
    pub roh_to_other: BTreeSet<String>,
    pub other_to_roh: BTreeSet<String>,
    pub threshold: f64,
    /// Users with at least one comment on each side.
    pub n_considered: usize,
}

/// Among users active on both sides, those with strictly more than
/// `threshold` of their comments on one side.
pub fn dominant_side_users(corpus: &Corpus, partition: &VideoPartition, threshold: f64) -> Result<DominantSideUsers> {
    if !(threshold > 0.5 && threshold <= 1.0) {
        return Err(AnalyticsError::BadArgument(format!("threshold {threshold} outside (0.5, 1]")));
    }
    let mut out = DominantSideUsers { roh_to_other: BTreeSet::new(), other_to_roh: BTreeSet::new(), threshold, n_considered: 0 };
    for (user, (r, o)) in side_counts(corpus, partition) {
        if r == 0 || o == 0 {
            continue;
        }
        out.n_considered += 1;
        let total = (r + o) as f64;
        if r as f64 / total > threshold {
            out.roh_to_other.insert(user);
        } else if o as f64 / total > threshold {
            out.other_to_roh.insert(user);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentShare {
    pub positive: f64,
    pub negative: f64,
    pub neutral: f64,
    pub n: usize,
    pub cutoff: f64,
}

pub fn sentiment_share<'a, I>(docs: I, lexicon: &Lexicon, cutoff: f64) -> Result<SentimentShare>
where
    I: IntoIterator<Item = &'a TokenSequence>,
{
    let (mut p, mut n, mut z) = (0usize, 0usize, 0usize);
    for d in docs {
        match classify_sentiment(score_comment(lexicon, d), cutoff) {
            Sentiment::Positive => p += 1,
            Sentiment::Negative => n += 1,
            Sentiment::Neutral => z += 1,
        }
    }
    let total = p + n + z;
    if total == 0 {
        return Err(AnalyticsError::NoComments);
    }
    let t = total as f64;
    Ok(SentimentShare { positive: p as f64 / t, negative: n as f64 / t, neutral: z as f64 / t, n: total, cutoff })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoStats {
    pub n_videos: usize,
    pub views: FieldStats,
    pub likes: FieldStats,
    pub dislikes: FieldStats,
    pub comment_count: FieldStats,
}

/// Mean and sample standard deviation of the engagement fields.
pub fn video_stats(corpus: &Corpus) -> Result<VideoStats> {
    let videos = corpus.videos();
    if videos.is_empty() {
        return Err(AnalyticsError::NoVideos);
    }
    let field = |f: fn(&crate::corpus::Video) -> u64| {
        let xs: Vec<f64> = videos.iter().map(|v| f(v) as f64).collect();
        let (mean, std) = mean_std(&xs);
        FieldStats { mean, std }
    };
    Ok(VideoStats {
        n_videos: videos.len(),
        views: field(|v| v.views),
        likes: field(|v| v.likes),
        dislikes: field(|v| v.dislikes),
        comment_count: field(|v| v.comment_count),
    })
}

/// Per-side video stats, keyed "roh" and "other".
pub fn video_stats_by_side(corpus: &Corpus, partition: &VideoPartition) -> BTreeMap<&'static str, Option<VideoStats>> {
    let mut out = BTreeMap::new();
    for (name, ids) in [("roh", &partition.roh_video_ids), ("other", &partition.other_video_ids)] {
        let mut b = Corpus::builder();
        for (i, v) in corpus.videos().iter().filter(|v| ids.contains(&v.id)).enumerate() {
            let _ = b.push_video(v.clone(), i + 1);
        }
        out.insert(name, video_stats(&b.finish()).ok());
    }
    out
}

/// Writes `header` then one CSV row per record, quoting fields that need it.
pub fn write_csv<W: Write>(mut out: W, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let quote = |f: &str| {
        if f.contains([',', '"', '\n', '\r']) {
            format!("\"{}\"", f.replace('"', "\"\""))
        } else {
            f.to_string()
        }
    };
    writeln!(out, "{}", header.iter().map(|h| quote(h)).collect::<Vec<_>>().join(","))?;
    for r in rows {
        writeln!(out, "{}", r.iter().map(|f| quote(f)).collect::<Vec<_>>().join(","))?;
    }
    Ok(())
}

/// Per-user comment totals on each side, for CSV export.
pub fn user_side_table(corpus: &Corpus, partition: &VideoPartition) -> Vec<(String, usize, usize)> {
    side_counts(corpus, partition).into_iter().map(|(u, (r, o))| (u, r, o)).collect()
}

/// Comment counts per video id, keyed in id order.
pub fn comments_per_video(corpus: &Corpus) -> BTreeMap<String, usize> {
    let mut m: HashMap<&str, usize> = HashMap::new();
    for c in corpus.comments() {
        *m.entry(&c.video_id).or_default() += 1;
    }
    m.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
