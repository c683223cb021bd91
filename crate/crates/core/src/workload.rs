// SPDX-License-Identifier: Apache-2.0

//! Seeded request streams with temporal, geographic and spatial locality.
//!
//! Each interval draws from a ChaCha8 generator seeded with the run seed and
//! switched to stream `interval`, so any interval can be regenerated from
//! the seed and the history it starts with.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{FileId, NodeId};
use crate::state::{dependent_files, DependencyMatrix};
use crate::topology::Topology;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkloadParams {
    pub requests_per_interval: usize,
    pub temporal_weight: f64,
    pub geo_weight: f64,
    pub spatial_weight: f64,
    pub zipf_exponent: f64,
    pub history_window: usize,
    /// Dependencies strictly above this count as related for the spatial
    /// branch.
    pub spatial_threshold: f64,
    /// Overrides the run seed for request generation.
    pub rng_seed: Option<u64>,
    /// Load requests from a JSON-lines file instead of generating them.
    pub replay: Option<PathBuf>,
}

impl Default for WorkloadParams {
    fn default() -> Self {
        WorkloadParams {
            requests_per_interval: 200,
            temporal_weight: 0.3,
            geo_weight: 0.2,
            spatial_weight: 0.2,
            zipf_exponent: 0.8,
            history_window: 100,
            spatial_threshold: 0.5,
            rng_seed: None,
            replay: None,
        }
    }
}

impl WorkloadParams {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("temporal_weight", self.temporal_weight),
            ("geo_weight", self.geo_weight),
            ("spatial_weight", self.spatial_weight),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        let sum = self.temporal_weight + self.geo_weight + self.spatial_weight;
        if sum > 1.0 + 1e-12 {
            return Err(Error::config(format!("locality weights sum to {sum} > 1")));
        }
        if !(self.zipf_exponent > 0.0) || !self.zipf_exponent.is_finite() {
            return Err(Error::config("zipf_exponent must be > 0"));
        }
        if self.history_window == 0 {
            return Err(Error::config("history_window must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.spatial_threshold) {
            return Err(Error::config("spatial_threshold must be in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub interval: u32,
    pub requester: NodeId,
    pub file: FileId,
}

/// Other cluster headers by ascending distance from `header`, ties by id.
pub fn neighbor_clusters(topology: &Topology, header: NodeId) -> Vec<NodeId> {
    let mut others: Vec<(f64, NodeId)> = topology
        .headers()
        .iter()
        .filter(|&&h| h != header)
        .map(|&h| (topology.tree().distance(header, h), h))
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    others.into_iter().map(|(_, h)| h).collect()
}

/// Unnormalised weights `k^-s` for file ids `1..=n`.
pub fn zipf_weights(n: usize, exponent: f64) -> Vec<f64> {
    (1..=n).map(|k| (k as f64).powf(-exponent)).collect()
}

#[derive(Clone, Debug)]
pub struct WorkloadGenerator {
    params: WorkloadParams,
    seed: u64,
    headers: Vec<NodeId>,
    neighbors: Vec<Vec<usize>>,
    dependents: Vec<Vec<FileId>>,
    zipf: WeightedIndex<f64>,
    history: VecDeque<(NodeId, FileId)>,
}

impl WorkloadGenerator {
    pub fn new(params: &WorkloadParams, topology: &Topology, dependency: &DependencyMatrix, seed: u64) -> Result<Self> {
        params.validate()?;
        let headers = topology.headers().to_vec();
        if headers.is_empty() {
            return Err(Error::config("workload needs at least one cluster"));
        }
        if dependency.is_empty() {
            return Err(Error::config("workload needs at least one file"));
        }
        let neighbors = headers
            .iter()
            .map(|&h| {
                neighbor_clusters(topology, h)
                    .into_iter()
                    .map(|n| headers.binary_search(&n).expect("neighbor is a header"))
                    .collect()
            })
            .collect();
        let dependents = (0..dependency.len())
            .map(|i| dependent_files(dependency, FileId::from_index(i), params.spatial_threshold))
            .collect();
        let zipf = WeightedIndex::new(zipf_weights(dependency.len(), params.zipf_exponent))
            .map_err(|e| Error::config(format!("zipf weights: {e}")))?;
        Ok(WorkloadGenerator {
            params: params.clone(),
            seed: params.rng_seed.unwrap_or(seed),
            headers,
            neighbors,
            dependents,
            zipf,
            history: VecDeque::new(),
        })
    }

    /// Seeds the history window, oldest first.
    pub fn with_history(mut self, pairs: impl IntoIterator<Item = (NodeId, FileId)>) -> Self {
        for p in pairs {
            self.push_history(p);
        }
        self
    }

    pub fn history(&self) -> impl Iterator<Item = &(NodeId, FileId)> {
        self.history.iter()
    }

    fn push_history(&mut self, pair: (NodeId, FileId)) {
        if self.history.len() == self.params.history_window {
            self.history.pop_front();
        }
        self.history.push_back(pair);
    }

    pub fn generate_interval(&mut self, interval: u32) -> Vec<Request> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(interval as u64);
        (0..self.params.requests_per_interval)
            .map(|_| {
                let (requester, file) = self.draw(&mut rng);
                self.push_history((requester, file));
                Request { interval, requester, file }
            })
            .collect()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (NodeId, FileId) {
        let p = &self.params;
        let u: f64 = rng.random();
        let picked = if u < p.temporal_weight {
            self.temporal(rng)
        } else if u < p.temporal_weight + p.geo_weight {
            self.geographic(rng)
        } else if u < p.temporal_weight + p.geo_weight + p.spatial_weight {
            self.spatial(rng)
        } else {
            None
        };
        picked.unwrap_or_else(|| self.uniform(rng))
    }

    fn uniform(&self, rng: &mut ChaCha8Rng) -> (NodeId, FileId) {
        let h = self.headers[rng.random_range(0..self.headers.len())];
        (h, FileId::from_index(self.zipf.sample(rng)))
    }

    fn temporal(&self, rng: &mut ChaCha8Rng) -> Option<(NodeId, FileId)> {
        let recent: Vec<_> = self.history.iter().copied().collect();
        recency_pick(&recent, rng)
    }

    fn geographic(&self, rng: &mut ChaCha8Rng) -> Option<(NodeId, FileId)> {
        let idx = rng.random_range(0..self.headers.len());
        for &n in &self.neighbors[idx] {
            let files: Vec<FileId> =
                self.history.iter().filter(|(h, _)| *h == self.headers[n]).map(|&(_, f)| f).collect();
            if let Some(f) = recency_pick(&files, rng) {
                return Some((self.headers[idx], f));
            }
        }
        None
    }

    fn spatial(&self, rng: &mut ChaCha8Rng) -> Option<(NodeId, FileId)> {
        let recent: Vec<_> = self.history.iter().copied().collect();
        let (h, f) = recency_pick(&recent, rng)?;
        let deps = &self.dependents[f.index()];
        if deps.is_empty() {
            return None;
        }
        Some((h, deps[rng.random_range(0..deps.len())]))
    }
}

/// Picks from `items` (oldest first) with weight `position + 1`.
fn recency_pick<T: Copy>(items: &[T], rng: &mut impl Rng) -> Option<T> {
    if items.is_empty() {
        return None;
    }
    let dist = WeightedIndex::new(1..=items.len()).ok()?;
    Some(items[dist.sample(rng)])
}

pub fn write_requests_jsonl(path: &Path, requests: &[Request]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in requests {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_requests_jsonl(path: &Path) -> Result<Vec<Request>> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
