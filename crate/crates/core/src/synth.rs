//! Synthetic corpora with planted ground truth.
//!
//! A supportive comment picks one facet of support (sympathy, rights, aid,
//! condemnation of the oppressor, ...) and draws its cues from that facet's
//! core words and from one small cluster of rare tail words, sometimes
//! misspelled. Other comments are hostile, neutral chatter, or "hard": they
//! mix supportive and hostile cues. A small set of sympathetic users writes
//! mostly supportive comments, shares a few community words, and prefers
//! videos of the focus channels.

use std::collections::{BTreeSet, HashMap};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::Label;
use crate::corpus::{tokenize, Comment, Corpus, Record, TokenSequence, Video, FUNCTION_WORDS};
use crate::util::rng_for;

/// Supportive words used across every facet of support.
const SUPPORT_GENERAL: &[&str] = &["support", "please", "welcome", "accept", "protect", "stand", "brothers", "sisters"];
/// Facets of support, each with its own cue words, and their shares of
/// supportive comments.
const FACETS: &[(&[&str], f64)] = &[
    (&["pray", "love", "sad", "tears", "heartbreaking", "innocent", "poor", "sympathy", "crying", "care"], 0.35),
    (&["humanity", "humane", "compassion", "mercy", "dignity", "peace", "peaceful", "solidarity", "kindness"], 0.20),
    (&["rights", "justice", "citizenship", "equality", "freedom", "stateless", "recognition", "belong"], 0.15),
    (&["help", "donate", "rescue", "shelter", "save", "food", "aid", "medicine", "volunteer"], 0.10),
    (&["unhcr", "intervene", "sanctions", "urge", "leaders", "international", "icc", "embassy", "petition"], 0.10),
    (&["junta", "generals", "perpetrators", "accountable", "brutal", "oppressors", "atrocities", "shame", "evil"], 0.10),
];
const HOSTILE_CORE: &[&str] = &[
    "terrorists", "illegal", "deport", "invaders", "breeding", "criminals", "infiltrators", "expel", "hell",
    "deserve", "burden", "parasites", "evil", "hate", "shame", "bad", "jihadis", "extremists", "kick", "throw",
];
/// Crisis vocabulary used by supporters and opponents alike.
const CRISIS: &[&str] = &["genocide", "war", "violence", "killing", "burned", "fled", "military", "attacks", "crisis"];
const TOPIC: &[&str] = &[
    "rohingya", "rohingyas", "muslims", "myanmar", "burma", "bangladesh", "rakhine", "india", "border", "camp",
    "camps", "government", "un", "news", "video", "army", "buddhists", "hindus", "people", "country", "world",
    "media", "refugees", "children", "women", "families", "village", "boats",
];
/// Off-topic chatter typical of comments that take no side.
const CHATTER: &[&str] = &[
    "subscribe", "channel", "watch", "first", "link", "song", "bro", "lol", "upload", "episode", "sir", "nice",
    "thumbnail", "views", "anyone", "2017", "background", "music", "full", "part", "next", "wow", "sound", "quality",
];
const TOPIC_WORDS: usize = 8;
/// Zipf exponent over the tail clusters of a facet.
const TOPIC_ZIPF: f64 = 0.3;
/// Probability that a hostile cue comes from the hostile tail.
const HOSTILE_TAIL_SHARE: f64 = 0.02;
const MAX_FILLER: usize = 6;
/// Facet whose comments sound hostile toward the oppressor.
const CONDEMN: usize = 5;
const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ra", "te", "su", "van", "dor", "pe", "li", "zu", "ben", "ta", "mor", "si", "qua", "re",
    "no", "gal", "fi", "ser", "tu", "ma", "ko", "dri", "la", "vo", "nex", "pa", "hu",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_comments: usize,
    pub positive_rate: f64,
    pub n_users: usize,
    /// Share of users who are sympathetic.
    pub sympathetic_user_fraction: f64,
    /// Share of all comments written by sympathetic users.
    pub sympathetic_comment_share: f64,
    pub sympathetic_positive_rate: f64,
    pub n_videos: usize,
    pub n_channels: usize,
    pub focus_channel_fraction: f64,
    /// Share of non-supportive comments that mix supportive and hostile cues.
    pub hard_negative_rate: f64,
    /// Share of supportive comments with weak or indirect cues.
    pub hard_positive_rate: f64,
    pub misspell_rate: f64,
    /// Rare supportive and hostile words in the long tail.
    pub tail_words: usize,
    /// Probability that a cue word comes from the tail.
    pub tail_share: f64,
    pub non_english_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_comments: 10_000,
            positive_rate: 0.10,
            n_users: 2_000,
            sympathetic_user_fraction: 0.05,
            sympathetic_comment_share: 0.08,
            sympathetic_positive_rate: 0.70,
            n_videos: 300,
            n_channels: 80,
            focus_channel_fraction: 0.25,
            hard_negative_rate: 0.02,
            hard_positive_rate: 0.5,
            misspell_rate: 0.1,
            tail_words: 400,
            tail_share: 0.75,
            non_english_rate: 0.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommentKind {
    Supportive,
    WeakSupportive,
    Hostile,
    Neutral,
    Mixed,
    Foreign,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub truth: HashMap<String, Label>,
    pub kinds: HashMap<String, CommentKind>,
    pub seed_positive: Vec<String>,
    pub seed_negative: Vec<String>,
    pub sympathetic_users: BTreeSet<String>,
    pub focus_channels: Vec<String>,
}

impl SyntheticCorpus {
    pub fn positives(&self) -> usize {
        self.truth.values().filter(|l| l.is_positive()).count()
    }

    pub fn label(&self, id: &str) -> Option<Label> {
        self.truth.get(id).copied()
    }

    /// Fraction of `ids` that are planted positives.
    pub fn positive_fraction(&self, ids: &[String]) -> f64 {
        if ids.is_empty() {
            return 0.0;
        }
        ids.iter().filter(|id| self.label(id) == Some(Label::Positive)).count() as f64 / ids.len() as f64
    }
}

struct Vocab {
    /// Small clusters of rare supportive words; each comment draws on one.
    support_topics: Vec<Vec<String>>,
    hostile_tail: Vec<String>,
    filler: Vec<String>,
    community: Vec<String>,
    foreign: Vec<String>,
}

fn pseudo_word(rng: &mut ChaCha8Rng, syllables: usize) -> String {
    (0..syllables).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect()
}

fn distinct_words(rng: &mut ChaCha8Rng, n: usize, syl: std::ops::RangeInclusive<usize>, taken: &mut BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let len = rng.gen_range(syl.clone());
        let w = pseudo_word(rng, len);
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

impl Vocab {
    fn new(rng: &mut ChaCha8Rng, tail: usize) -> Self {
        let mut taken: BTreeSet<String> = SUPPORT_GENERAL
            .iter()
            .chain(FACETS.iter().flat_map(|(words, _)| words.iter()))
            .chain(HOSTILE_CORE)
            .chain(CRISIS)
            .chain(TOPIC)
            .chain(FUNCTION_WORDS)
            .chain(CHATTER)
            .map(|s| s.to_string())
            .collect();
        let n_topics = tail.div_ceil(TOPIC_WORDS);
        Vocab {
            support_topics: (0..n_topics).map(|_| distinct_words(rng, TOPIC_WORDS, 3..=4, &mut taken)).collect(),
            hostile_tail: distinct_words(rng, tail / 4, 3..=4, &mut taken),
            filler: distinct_words(rng, 1500, 2..=3, &mut taken),
            community: distinct_words(rng, 12, 3..=3, &mut taken),
            foreign: distinct_words(rng, 300, 2..=3, &mut taken),
        }
    }
}

fn zipf(n: usize, s: f64) -> WeightedIndex<f64> {
    WeightedIndex::new((1..=n).map(|r| 1.0 / (r as f64).powf(s))).expect("non-empty")
}

/// One random edit: drop, double, swap or replace a letter.
pub fn misspell(word: &str, rng: &mut impl Rng) -> String {
    let mut c: Vec<char> = word.chars().collect();
    if c.len() < 4 {
        return word.to_string();
    }
    let i = rng.gen_range(1..c.len() - 1);
    match rng.gen_range(0..4) {
        0 => {
            c.remove(i);
        }
        1 => c.insert(i, c[i]),
        2 => c.swap(i, i + 1),
        _ => c[i] = (b'a' + rng.gen_range(0..26)) as char,
    }
    c.into_iter().collect()
}

struct Writer<'a> {
    cfg: &'a SynthConfig,
    vocab: Vocab,
    facet: WeightedIndex<f64>,
    facet_core: Vec<WeightedIndex<f64>>,
    /// Tail clusters of each facet and a Zipf draw over them.
    facet_topics: Vec<(Vec<usize>, WeightedIndex<f64>)>,
    hostile_core: WeightedIndex<f64>,
    hostile_tail: WeightedIndex<f64>,
    filler: WeightedIndex<f64>,
    function: WeightedIndex<f64>,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a SynthConfig, vocab: Vocab) -> Self {
        Writer {
            cfg,
            facet: WeightedIndex::new(FACETS.iter().map(|(_, w)| *w)).expect("positive weights"),
            facet_core: FACETS.iter().map(|(words, _)| zipf(words.len(), 0.8)).collect(),
            hostile_core: zipf(HOSTILE_CORE.len(), 0.8),
            facet_topics: (0..FACETS.len())
                .filter_map(|f| {
                    let ts: Vec<usize> = (f..vocab.support_topics.len()).step_by(FACETS.len()).collect();
                    (!ts.is_empty()).then(|| {
                        let d = zipf(ts.len(), TOPIC_ZIPF);
                        (ts, d)
                    })
                })
                .collect(),
            hostile_tail: zipf(vocab.hostile_tail.len().max(1), 1.0),
            filler: zipf(vocab.filler.len(), 1.05),
            function: zipf(FUNCTION_WORDS.len(), 0.7),
            vocab,
        }
    }

    /// A supportive cue from `facet` and tail cluster `topic`, or a hostile
    /// cue when `support` is None.
    fn cue(&self, rng: &mut ChaCha8Rng, support: Option<(usize, Option<usize>)>) -> String {
        let w = match support {
            Some((f, topic)) => {
                if f != CONDEMN && rng.gen_bool(0.15) {
                    SUPPORT_GENERAL.choose(rng).expect("non-empty").to_string()
                } else if let Some(t) = topic.filter(|_| rng.gen_bool(self.cfg.tail_share)) {
                    self.vocab.support_topics[t].choose(rng).expect("non-empty").clone()
                } else {
                    FACETS[f].0[self.facet_core[f].sample(rng)].to_string()
                }
            }
            None => {
                let tail = &self.vocab.hostile_tail;
                if !tail.is_empty() && rng.gen_bool(HOSTILE_TAIL_SHARE) {
                    tail[self.hostile_tail.sample(rng)].clone()
                } else {
                    HOSTILE_CORE[self.hostile_core.sample(rng)].to_string()
                }
            }
        };
        if rng.gen_bool(self.cfg.misspell_rate) {
            misspell(&w, rng)
        } else {
            w
        }
    }

    /// Writes a comment of `kind` with `community` community words; returns
    /// its text and supportive facet.
    fn write(&self, rng: &mut ChaCha8Rng, kind: CommentKind, community: usize) -> (String, usize) {
        if kind == CommentKind::Foreign {
            let n = rng.gen_range(5..=15);
            let text = (0..n).map(|_| self.vocab.foreign.choose(rng).expect("non-empty").as_str()).collect::<Vec<_>>().join(" ");
            return (text, 0);
        }
        let mut content: Vec<String> = Vec::new();
        let (n_support, n_hostile, n_crisis) = match kind {
            CommentKind::Supportive => (rng.gen_range(1..=3), 0, rng.gen_range(0..=1)),
            CommentKind::WeakSupportive => (1, 0, rng.gen_range(0..=2)),
            CommentKind::Hostile => (0, rng.gen_range(2..=3), rng.gen_range(0..=1)),
            // hard negatives: mostly supportive words around one hostile remark
            CommentKind::Mixed => (rng.gen_range(3..=5), 1, rng.gen_range(0..=1)),
            CommentKind::Neutral => (0, usize::from(rng.gen_bool(0.05)), usize::from(rng.gen_bool(0.1))),
            CommentKind::Foreign => unreachable!(),
        };
        let facet = self.facet.sample(rng);
        let topic = self.facet_topics.get(facet).map(|(ts, d)| ts[d.sample(rng)]);
        content.extend((0..n_support).map(|_| self.cue(rng, Some((facet, topic)))));
        content.extend((0..n_hostile).map(|_| self.cue(rng, None)));
        content.extend((0..n_crisis).map(|_| CRISIS.choose(rng).expect("non-empty").to_string()));
        if kind == CommentKind::Neutral {
            content.extend((0..rng.gen_range(1..=3)).map(|_| CHATTER.choose(rng).expect("non-empty").to_string()));
        }
        let topic_range = if kind == CommentKind::Neutral { 0..=3 } else { 1..=3 };
        for _ in 0..rng.gen_range(topic_range) {
            content.push(TOPIC.choose(rng).expect("non-empty").to_string());
        }
        for _ in 0..rng.gen_range(2..=MAX_FILLER) {
            content.push(self.vocab.filler[self.filler.sample(rng)].clone());
        }
        for _ in 0..community {
            content.push(self.vocab.community.choose(rng).expect("non-empty").clone());
        }
        content.shuffle(rng);
        let mut words = Vec::with_capacity(content.len() * 2);
        for w in content {
            if rng.gen_bool(0.6) {
                words.push(FUNCTION_WORDS[self.function.sample(rng)].to_string());
            }
            words.push(w);
        }
        (words.join(" "), facet)
    }
}

/// Generates a corpus, its planted labels, 6 positive and 5 negative seeds.
pub fn generate(cfg: &SynthConfig) -> SyntheticCorpus {
    let mut rng = rng_for(cfg.seed, 0x5717, 0);
    let vocab = Vocab::new(&mut rng, cfg.tail_words);
    let writer = Writer::new(cfg, vocab);

    let n = cfg.n_comments;
    let n_users = cfg.n_users.max(2);
    let n_symp_users = ((n_users as f64 * cfg.sympathetic_user_fraction).round() as usize).clamp(1, n_users - 1);
    let user_id = |i: usize| format!("u{i:05}");
    let channel_id = |i: usize| format!("ch{i:03}");
    let video_id = |i: usize| format!("v{i:04}");

    // Channels 0..n_focus are focus channels; videos round-robin over channels.
    let n_channels = cfg.n_channels.max(2);
    let n_focus = ((n_channels as f64 * cfg.focus_channel_fraction).round() as usize).clamp(1, n_channels - 1);
    let n_videos = cfg.n_videos.max(2);
    let video_channel: Vec<usize> = (0..n_videos).map(|v| v % n_channels).collect();
    let focus_videos: Vec<usize> = (0..n_videos).filter(|&v| video_channel[v] < n_focus).collect();
    let other_videos: Vec<usize> = (0..n_videos).filter(|&v| video_channel[v] >= n_focus).collect();

    // Comment slots: the first n_symp belong to sympathetic users.
    let n_symp = ((n as f64 * cfg.sympathetic_comment_share).round() as usize).min(n);
    let n_pos_total = (n as f64 * cfg.positive_rate).round() as usize;
    let n_symp_pos = ((n_symp as f64 * cfg.sympathetic_positive_rate).round() as usize).min(n_pos_total);
    let n_other_pos = n_pos_total - n_symp_pos;

    let mut slot_labels: Vec<bool> = Vec::with_capacity(n);
    let mut symp_labels: Vec<bool> = (0..n_symp).map(|i| i < n_symp_pos).collect();
    symp_labels.shuffle(&mut rng);
    let mut other_labels: Vec<bool> = (0..n - n_symp).map(|i| i < n_other_pos).collect();
    other_labels.shuffle(&mut rng);
    slot_labels.extend(symp_labels);
    slot_labels.extend(other_labels);

    let other_activity = zipf(n_users - n_symp_users, 0.6);
    let mut rows: Vec<(String, String, usize, CommentKind, bool, usize)> = Vec::with_capacity(n);
    for (slot, &positive) in slot_labels.iter().enumerate() {
        let sympathetic = slot < n_symp;
        let user = if sympathetic {
            // spread evenly, each sympathetic user gets a similar number of comments
            slot % n_symp_users
        } else {
            n_symp_users + other_activity.sample(&mut rng)
        };
        let focus_pref = if sympathetic { 0.8 } else { 0.3 };
        let pool = if rng.gen_bool(focus_pref) { &focus_videos } else { &other_videos };
        let video = *pool.choose(&mut rng).expect("videos on both sides");
        let kind = if !positive && cfg.non_english_rate > 0.0 && rng.gen_bool(cfg.non_english_rate) {
            CommentKind::Foreign
        } else if positive {
            if rng.gen_bool(cfg.hard_positive_rate) {
                CommentKind::WeakSupportive
            } else {
                CommentKind::Supportive
            }
        } else {
            let r: f64 = rng.gen();
            if r < cfg.hard_negative_rate {
                CommentKind::Mixed
            } else if r < cfg.hard_negative_rate + (1.0 - cfg.hard_negative_rate) * 0.45 {
                CommentKind::Hostile
            } else {
                CommentKind::Neutral
            }
        };
        let community = if sympathetic {
            rng.gen_range(1..=2)
        } else {
            usize::from(rng.gen_bool(0.01))
        };
        let (text, facet) = writer.write(&mut rng, kind, community);
        rows.push((user_id(user), text, video, kind, positive, facet));
    }
    // Interleave sympathetic and other comments.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let width = n.to_string().len().max(5);
    let mut builder = Corpus::builder();
    let mut truth = HashMap::with_capacity(n);
    let mut kinds = HashMap::with_capacity(n);
    let mut per_video = vec![0u64; n_videos];
    let mut comments = Vec::with_capacity(n);
    let mut facets = HashMap::with_capacity(n);
    for (pos, &i) in order.iter().enumerate() {
        let (user, text, video, kind, positive, facet) = &rows[i];
        let id = format!("c{pos:0width$}");
        per_video[*video] += 1;
        truth.insert(id.clone(), Label::from_bool(*positive));
        kinds.insert(id.clone(), *kind);
        facets.insert(id.clone(), *facet);
        comments.push(Comment {
            id,
            video_id: video_id(*video),
            user_id: user.clone(),
            text: text.clone(),
            posted_at: Some(1_500_000_000 + pos as i64 * 60),
            is_english: None,
        });
    }
    let mut line = 0;
    for v in 0..n_videos {
        line += 1;
        let u: f64 = rng.gen_range(0.01..1.0);
        let views = (1000.0 / u.powf(1.2)) as u64;
        let likes = (views as f64 * rng.gen_range(0.005..0.05)) as u64;
        let dislikes = (likes as f64 * rng.gen_range(0.05..0.6)) as u64;
        let title: Vec<&str> = (0..4).map(|_| *TOPIC.choose(&mut rng).expect("non-empty")).collect();
        let video = Video {
            id: video_id(v),
            channel_id: channel_id(video_channel[v]),
            title: title.join(" "),
            views,
            likes,
            dislikes,
            comment_count: per_video[v],
        };
        builder.push(Record::Video(video), line).expect("unique video ids");
    }
    for c in comments {
        line += 1;
        builder.push(Record::Comment(c), line).expect("unique comment ids");
    }
    let corpus = builder.finish();

    // Seeds: prototypical comments of each class, in corpus order.
    let mut candidates_pos: Vec<&str> = Vec::new();
    let mut candidates_neg: Vec<&str> = Vec::new();
    for c in corpus.comments() {
        match kinds[&c.id] {
            CommentKind::Supportive if facets[&c.id] != CONDEMN => candidates_pos.push(&c.id),
            CommentKind::Hostile => candidates_neg.push(&c.id),
            _ => {}
        }
    }
    let seed_positive: Vec<String> = candidates_pos.choose_multiple(&mut rng, 6).map(|s| s.to_string()).collect();
    let seed_negative: Vec<String> = candidates_neg.choose_multiple(&mut rng, 5).map(|s| s.to_string()).collect();

    SyntheticCorpus {
        corpus,
        truth,
        kinds,
        seed_positive,
        seed_negative,
        sympathetic_users: (0..n_symp_users).map(user_id).collect(),
        focus_channels: (0..n_focus).map(channel_id).collect(),
    }
}

/// Short sentences for embedding sanity checks: fruit words that co-occur,
/// geology words that do not, and group nouns (several ending in "-ists")
/// sharing contexts. The misspelling "bhudists" never occurs.
pub fn toy_embedding_corpus(n_sentences: usize, seed: u64) -> Vec<TokenSequence> {
    let mut rng = rng_for(seed, 0x70e, 0);
    let fruit = ["apple", "fruit", "banana", "orange", "mango", "juice", "sweet", "ripe"];
    let rock = ["rock", "stone", "granite", "cliff", "mountain", "boulder", "mineral", "quarry"];
    let groups = [
        "buddhists", "buddhist", "buddhism", "monks", "extremists", "nationalists", "activists", "journalists",
        "communists", "hindus", "muslims", "christians", "villagers", "soldiers",
    ];
    let group_ctx = [
        "the", "in", "myanmar", "temple", "pray", "protest", "march", "against", "support", "many", "local",
        "leaders", "said", "were", "are", "told", "police", "country", "community", "rights",
    ];
    let mut filler_taken = BTreeSet::new();
    let filler = distinct_words(&mut rng, 400, 2..=3, &mut filler_taken);
    let fill_w = zipf(filler.len(), 1.0);
    let mut out = Vec::with_capacity(n_sentences);
    for _ in 0..n_sentences {
        let mut words: Vec<String> = Vec::new();
        match rng.gen_range(0..3) {
            0 => {
                words.push("apple".into());
                words.push("fruit".into());
                for _ in 0..rng.gen_range(2..=4) {
                    words.push(fruit.choose(&mut rng).expect("non-empty").to_string());
                }
            }
            1 => {
                for _ in 0..rng.gen_range(3..=5) {
                    words.push(rock.choose(&mut rng).expect("non-empty").to_string());
                }
            }
            _ => {
                // one or two group nouns with shared context; "buddhists" is frequent
                let g = if rng.gen_bool(0.4) { "buddhists" } else { groups.choose(&mut rng).expect("non-empty") };
                words.push(g.to_string());
                if rng.gen_bool(0.3) {
                    words.push(groups.choose(&mut rng).expect("non-empty").to_string());
                }
                for _ in 0..rng.gen_range(3..=5) {
                    words.push(group_ctx.choose(&mut rng).expect("non-empty").to_string());
                }
            }
        }
        for _ in 0..rng.gen_range(1..=3) {
            words.push(filler[fill_w.sample(&mut rng)].clone());
        }
        words.shuffle(&mut rng);
        out.push(tokenize(&words.join(" ")));
    }
    out
}
