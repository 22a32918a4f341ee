//! Seed-anchored sentiment lexicon induction by random walks with restart over
//! a word similarity graph, and lexicon-based comment scoring.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::TokenSequence;
use crate::embeddings::EmbeddingTable;
use crate::nnindex::VectorIndex;

pub const DEFAULT_GRAPH_K: usize = 25;
pub const DEFAULT_RESTART_BETA: f64 = 0.9;
pub const DEFAULT_CUTOFF: f64 = 3.0;
const TOLERANCE: f64 = 1e-8;
const MAX_ITER: usize = 10_000;

pub const POSITIVE_SEEDS: [&str; 10] =
    ["peace", "great", "peaceful", "accept", "kind", "thank", "love", "care", "humanity", "innocent"];
pub const NEGATIVE_SEEDS: [&str; 10] =
    ["terrorist", "genocide", "war", "hate", "bad", "violence", "rape", "illegal", "evil", "shame"];

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("no {0} seed word is in the vocabulary")]
    NoSeeds(&'static str),
    #[error("seed sets overlap on {0:?}")]
    OverlappingSeeds(Vec<String>),
    #[error("invalid argument: {0}")]
    BadArgument(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

impl Default for SeedSet {
    fn default() -> Self {
        SeedSet {
            positive: POSITIVE_SEEDS.iter().map(|s| s.to_string()).collect(),
            negative: NEGATIVE_SEEDS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl SeedSet {
    pub fn swapped(&self) -> Self {
        SeedSet { positive: self.negative.clone(), negative: self.positive.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LexiconConfig {
    pub graph_k: usize,
    pub restart_beta: f64,
    /// Only the most frequent words enter the graph when set.
    pub max_vocab: Option<usize>,
}

impl Default for LexiconConfig {
    fn default() -> Self {
        LexiconConfig { graph_k: DEFAULT_GRAPH_K, restart_beta: DEFAULT_RESTART_BETA, max_vocab: None }
    }
}

/// Sparse weighted graph with row-stochastic transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct WordGraph {
    pub nodes: Vec<String>,
    /// Outgoing (target, probability) per node; rows sum to 1 or are empty.
    transitions: Vec<Vec<(usize, f64)>>,
}

impl WordGraph {
    /// Builds from undirected weighted edges. Non-positive weights are dropped
    /// and parallel edges keep the larger weight.
    pub fn from_edges(nodes: Vec<String>, edges: &[(usize, usize, f64)]) -> Self {
        let mut adj: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); nodes.len()];
        for &(a, b, w) in edges {
            if w <= 0.0 || a == b {
                continue;
            }
            for (x, y) in [(a, b), (b, a)] {
                let e = adj[x].entry(y).or_insert(0.0);
                *e = e.max(w);
            }
        }
        let transitions = adj
            .into_iter()
            .map(|row| {
                let total: f64 = row.values().sum();
                row.into_iter().map(|(j, w)| (j, w / total)).collect()
            })
            .collect();
        WordGraph { nodes, transitions }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.transitions[i].len()
    }

    /// Dense row-stochastic matrix, for inspection and tests.
    pub fn dense_transitions(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for (i, row) in self.transitions.iter().enumerate() {
            for &(j, p) in row {
                m[i][j] = p;
            }
        }
        m
    }

    /// Iterates `p <- beta * T^T p + (1 - beta) * s` from `p = s` until the L1
    /// change drops below 1e-8. Returns the vector and the per-iteration L1
    /// changes.
    pub fn random_walk(&self, seeds: &[usize], beta: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let mut s = vec![0.0; n];
        for &i in seeds {
            s[i] = 1.0 / seeds.len() as f64;
        }
        let mut p = s.clone();
        let mut deltas = Vec::new();
        for _ in 0..MAX_ITER {
            let mut next: Vec<f64> = s.iter().map(|x| (1.0 - beta) * x).collect();
            for (i, row) in self.transitions.iter().enumerate() {
                let mass = beta * p[i];
                if mass == 0.0 {
                    continue;
                }
                for &(j, t) in row {
                    next[j] += mass * t;
                }
            }
            let delta: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
            p = next;
            deltas.push(delta);
            if delta < TOLERANCE {
                break;
            }
        }
        (p, deltas)
    }

    /// Raw polarity `p+ / (p+ + p-)` per node (0.5 where both vanish).
    pub fn polarity(&self, positive: &[usize], negative: &[usize], beta: f64) -> Vec<f64> {
        let (pp, _) = self.random_walk(positive, beta);
        let (pn, _) = self.random_walk(negative, beta);
        pp.iter().zip(&pn).map(|(a, b)| if a + b == 0.0 { 0.5 } else { a / (a + b) }).collect()
    }
}

/// Z-scores with the population standard deviation. A constant input maps to
/// all zeros.
pub fn standardize(raw: &[f64]) -> Vec<f64> {
    let n = raw.len() as f64;
    if raw.is_empty() {
        return Vec::new();
    }
    let mean = raw.iter().sum::<f64>() / n;
    let var = raw.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 {
        return vec![0.0; raw.len()];
    }
    let mut z: Vec<f64> = raw.iter().map(|x| (x - mean) / std).collect();
    // remove the residual rounding offset so the mean is zero to ~1e-16
    let resid = z.iter().sum::<f64>() / n;
    z.iter_mut().for_each(|x| *x -= resid);
    z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    pub scores: BTreeMap<String, f64>,
    pub config: LexiconConfig,
    /// Seed words missing from the vocabulary.
    #[serde(default)]
    pub dropped_seeds: Vec<String>,
}

impl Lexicon {
    pub fn from_scores(scores: BTreeMap<String, f64>) -> Self {
        Lexicon { scores, config: LexiconConfig::default(), dropped_seeds: Vec::new() }
    }

    pub fn score(&self, token: &str) -> Option<f64> {
        self.scores.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> Result<(), LexiconError> {
        for (t, s) in &self.scores {
            writeln!(out, "{t} {s}")?;
        }
        Ok(())
    }

    /// Reads `<token> <score>` lines; blank lines are ignored.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self, LexiconError> {
        let mut scores = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |m: &str| LexiconError::Parse { line: i + 1, message: m.to_string() };
            let (tok, score) = line.rsplit_once(char::is_whitespace).ok_or_else(|| parse_err("expected '<token> <score>'"))?;
            let score: f64 = score.parse().map_err(|_| parse_err("score is not a number"))?;
            if !score.is_finite() {
                return Err(parse_err("score is not finite"));
            }
            scores.insert(tok.trim().to_string(), score);
        }
        Ok(Self::from_scores(scores))
    }
}

/// Sum of token scores; unknown tokens count zero.
pub fn score_comment(lexicon: &Lexicon, tokens: &TokenSequence) -> f64 {
    tokens.iter().filter_map(|t| lexicon.score(t)).sum()
}

/// Strict threshold rule: above `cutoff` positive, below `-cutoff` negative.
pub fn classify_sentiment(score: f64, cutoff: f64) -> Sentiment {
    if score > cutoff {
        Sentiment::Positive
    } else if score < -cutoff {
        Sentiment::Negative
    } else {
        Sentiment::Neutral
    }
}

/// Lexicon over the words of `graph` from the given seed node sets.
pub fn propagate(graph: &WordGraph, positive: &[usize], negative: &[usize], config: LexiconConfig) -> Result<Lexicon, LexiconError> {
    if positive.is_empty() {
        return Err(LexiconError::NoSeeds("positive"));
    }
    if negative.is_empty() {
        return Err(LexiconError::NoSeeds("negative"));
    }
    if !(0.0..=1.0).contains(&config.restart_beta) || config.restart_beta == 1.0 {
        return Err(LexiconError::BadArgument(format!("restart_beta {} outside [0, 1)", config.restart_beta)));
    }
    let raw = graph.polarity(positive, negative, config.restart_beta);
    let z = standardize(&raw);
    let scores = graph.nodes.iter().cloned().zip(z).collect();
    Ok(Lexicon { scores, config, dropped_seeds: Vec::new() })
}

/// Builds the symmetric cosine k-NN graph over the table vocabulary and
/// propagates polarity from the seed words.
pub fn induce_lexicon(table: &EmbeddingTable, seeds: &SeedSet, config: LexiconConfig) -> Result<Lexicon, LexiconError> {
    if config.graph_k == 0 {
        return Err(LexiconError::BadArgument("graph_k must be at least 1".into()));
    }
    let pos_set: HashSet<&String> = seeds.positive.iter().collect();
    let mut overlap: Vec<String> = seeds.negative.iter().filter(|w| pos_set.contains(w)).cloned().collect();
    if !overlap.is_empty() {
        overlap.sort();
        return Err(LexiconError::OverlappingSeeds(overlap));
    }

    let mut words: Vec<String> = table.words().to_vec();
    if let Some(max) = config.max_vocab {
        let counts = table.counts();
        let mut order: Vec<usize> = (0..words.len()).collect();
        order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then_with(|| words[a].cmp(&words[b])));
        let mut keep: HashSet<usize> = order.into_iter().take(max).collect();
        // seeds always stay in the graph
        for (i, w) in words.iter().enumerate() {
            if pos_set.contains(w) || seeds.negative.contains(w) {
                keep.insert(i);
            }
        }
        words = words.into_iter().enumerate().filter(|(i, _)| keep.contains(i)).map(|(_, w)| w).collect();
    }
    let vectors: Vec<(String, Vec<f32>)> = words.iter().map(|w| (w.clone(), table.effective_word_vector(w).values)).collect();
    let built = VectorIndex::build(table.dim(), vectors).map_err(|e| LexiconError::BadArgument(e.to_string()))?;
    let index = built.index;
    let nodes: Vec<String> = index.ids().to_vec();
    let pos_of: HashMap<String, usize> = nodes.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();

    let probes: Vec<Vec<f32>> = nodes.iter().map(|w| index.get(w).expect("indexed").to_vec()).collect();
    let k = config.graph_k.min(nodes.len().saturating_sub(1)).max(1);
    let mut edges = Vec::new();
    if nodes.len() > 1 {
        let none = HashSet::new();
        // k+1 so the node itself can be dropped
        let lists = index.batch_query(&probes, k + 1, &none).map_err(|e| LexiconError::BadArgument(e.to_string()))?;
        for (i, list) in lists.into_iter().enumerate() {
            for n in list.into_iter().filter(|n| n.id != nodes[i]).take(k) {
                edges.push((i, pos_of[n.id.as_str()], n.similarity.max(0.0)));
            }
        }
    }
    let graph = WordGraph::from_edges(nodes, &edges);

    let mut dropped = Vec::new();
    let mut resolve = |ws: &[String]| -> Vec<usize> {
        ws.iter()
            .filter_map(|w| {
                let hit = pos_of.get(w.as_str()).copied();
                if hit.is_none() {
                    dropped.push(w.clone());
                }
                hit
            })
            .collect()
    };
    let pos = resolve(&seeds.positive);
    let neg = resolve(&seeds.negative);
    let mut lex = propagate(&graph, &pos, &neg, config)?;
    lex.dropped_seeds = dropped;
    Ok(lex)
}
