//! Exact top-k cosine nearest-neighbor search.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::{l2_norm, VectorRecord};

#[derive(Debug, Error, PartialEq)]
pub enum IndexError {
    #[error("vector '{id}' has dimension {got}, expected {expected}")]
    DimensionMismatch { id: String, expected: usize, got: usize },
    #[error("duplicate id '{0}'")]
    DuplicateId(String),
    #[error("probe vector is zero")]
    ZeroProbe,
    #[error("k must be at least 1")]
    BadK,
    #[error("index dimension must be positive")]
    ZeroDim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: String,
    pub similarity: f64,
}

impl Neighbor {
    pub fn distance(&self) -> f64 {
        1.0 - self.similarity
    }
}

/// Unit-normalized vectors keyed by id, kept in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex {
    dim: usize,
    ids: Vec<String>,
    data: Vec<f32>,
    pos: HashMap<String, usize>,
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub index: VectorIndex,
    /// Ids whose vectors were zero and therefore not inserted.
    pub skipped: Vec<String>,
}

/// Total order used everywhere: similarity descending, then id ascending.
pub fn rank_order(a: (f64, &str), b: (f64, &str)) -> Ordering {
    b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then_with(|| a.1.cmp(b.1))
}

fn unit(v: &[f32]) -> Option<Vec<f32>> {
    let norm = l2_norm(v);
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    Some(v.iter().map(|&x| (x as f64 / norm) as f32).collect())
}

impl VectorIndex {
    pub fn build<I, S>(dim: usize, vectors: I) -> Result<BuildOutcome, IndexError>
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: Into<String>,
    {
        if dim == 0 {
            return Err(IndexError::ZeroDim);
        }
        let mut index = VectorIndex { dim, ids: Vec::new(), data: Vec::new(), pos: HashMap::new() };
        let mut skipped = Vec::new();
        let mut seen = HashSet::new();
        for (id, v) in vectors {
            let id = id.into();
            if v.len() != dim {
                return Err(IndexError::DimensionMismatch { id, expected: dim, got: v.len() });
            }
            if !seen.insert(id.clone()) {
                return Err(IndexError::DuplicateId(id));
            }
            match unit(&v) {
                Some(u) => {
                    index.pos.insert(id.clone(), index.ids.len());
                    index.ids.push(id);
                    index.data.extend(u);
                }
                None => skipped.push(id),
            }
        }
        Ok(BuildOutcome { index, skipped })
    }

    /// Builds from store records, skipping those flagged unusable.
    pub fn from_records(dim: usize, records: &[VectorRecord]) -> Result<BuildOutcome, IndexError> {
        let mut unusable = Vec::new();
        let usable = records.iter().filter_map(|r| {
            if r.usable {
                Some((r.id.clone(), r.values.clone()))
            } else {
                unusable.push(r.id.clone());
                None
            }
        });
        let usable: Vec<_> = usable.collect();
        let mut out = Self::build(dim, usable)?;
        out.skipped.extend(unusable);
        Ok(out)
    }

    pub fn to_records(&self) -> Vec<VectorRecord> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, id)| VectorRecord {
                id: id.clone(),
                values: self.row(i).to_vec(),
                weight: 1,
                normalized: true,
                usable: true,
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn contains(&self, id: &str) -> bool {
        self.pos.contains_key(id)
    }

    /// Stored (unit) vector for `id`.
    pub fn get(&self, id: &str) -> Option<&[f32]> {
        self.pos.get(id).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Cosine similarity between a unit probe (f64) and stored row `i`.
    fn similarity(&self, probe: &[f64], i: usize) -> f64 {
        self.row(i).iter().zip(probe).map(|(&x, &p)| x as f64 * p).sum()
    }

    fn unit_probe(&self, probe: &[f32]) -> Result<Vec<f64>, IndexError> {
        if probe.len() != self.dim {
            return Err(IndexError::DimensionMismatch { id: "<probe>".into(), expected: self.dim, got: probe.len() });
        }
        let norm = l2_norm(probe);
        if norm == 0.0 || !norm.is_finite() {
            return Err(IndexError::ZeroProbe);
        }
        Ok(probe.iter().map(|&x| x as f64 / norm).collect())
    }

    pub fn query_topk(&self, probe: &[f32], k: usize, exclude: &HashSet<String>) -> Result<Vec<Neighbor>, IndexError> {
        if k == 0 {
            return Err(IndexError::BadK);
        }
        let probe = self.unit_probe(probe)?;
        let mut scored: Vec<(f64, usize)> = (0..self.ids.len())
            .filter(|&i| !exclude.contains(&self.ids[i]))
            .map(|i| (self.similarity(&probe, i), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| rank_order((a.0, &self.ids[a.1]), (b.0, &self.ids[b.1]));
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, cmp);
            scored.truncate(k);
        }
        scored.sort_unstable_by(cmp);
        Ok(scored
            .into_iter()
            .map(|(s, i)| Neighbor { id: self.ids[i].clone(), similarity: s })
            .collect())
    }

    /// Independent queries, one result list per probe.
    pub fn batch_query(
        &self,
        probes: &[Vec<f32>],
        k: usize,
        exclude: &HashSet<String>,
    ) -> Result<Vec<Vec<Neighbor>>, IndexError> {
        probes.par_iter().map(|p| self.query_topk(p, k, exclude)).collect()
    }
}
