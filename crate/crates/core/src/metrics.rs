// SPDX-License-Identifier: Apache-2.0

//! Per-interval metrics, CSV export, and recomputation from run logs.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pfr::{apply_actions, ActionKind, ReplicationAction};
use crate::state::ReplicaCatalog;
use crate::strategy::{serve_request, StrategyKind};
use crate::topology::Topology;
use crate::workload::Request;

/// One interval's counters. `requests`, `hits`, `created`, `evicted` and
/// `hops` cover this interval only; the `cum_` fields run from the start.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalMetrics {
    pub interval: u32,
    pub requests: u64,
    pub replica_hits: u64,
    pub replicas_created: u64,
    pub evictions: u64,
    pub total_hops: u64,
    pub mean_hops: f64,
    pub cum_requests: u64,
    pub cum_replica_hits: u64,
    pub cum_replicas_created: u64,
    pub cum_evictions: u64,
    pub cum_total_hops: u64,
    /// Cumulative hits per cumulative replica created.
    pub avg_replica_usage: f64,
    pub storage_used_fraction: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub strategy: Option<StrategyKind>,
    pub intervals: Vec<IntervalMetrics>,
}

impl MetricsReport {
    pub fn new(strategy: StrategyKind) -> Self {
        MetricsReport { strategy: Some(strategy), intervals: Vec::new() }
    }

    pub fn last(&self) -> Option<&IntervalMetrics> {
        self.intervals.last()
    }

    pub fn avg_replica_usage(&self) -> f64 {
        self.last().map_or(0.0, |m| m.avg_replica_usage)
    }

    /// Mean hops over every request in the run.
    pub fn overall_mean_hops(&self) -> f64 {
        self.last().map_or(0.0, |m| ratio(m.cum_total_hops, m.cum_requests))
    }
}

/// Accumulates counters for the interval in progress.
#[derive(Clone, Debug, Default)]
pub struct MetricsRecorder {
    current: IntervalMetrics,
    previous: Option<IntervalMetrics>,
}

impl MetricsRecorder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn begin(&mut self, interval: u32) {
        self.current = IntervalMetrics { interval, ..IntervalMetrics::default() };
    }

    pub fn request(&mut self, hops: u32, hit: bool) {
        self.current.requests += 1;
        self.current.total_hops += hops as u64;
        if hit {
            self.current.replica_hits += 1;
        }
    }

    pub fn actions<'a>(&mut self, actions: impl IntoIterator<Item = &'a ReplicationAction>) {
        for a in actions {
            match a.kind {
                ActionKind::Placed => self.current.replicas_created += 1,
                ActionKind::Evicted => self.current.evictions += 1,
                _ => {}
            }
        }
    }

    pub fn finish(&mut self, catalog: &ReplicaCatalog) -> IntervalMetrics {
        let mut m = std::mem::take(&mut self.current);
        let prev = self.previous.take().unwrap_or_default();
        m.cum_requests = prev.cum_requests + m.requests;
        m.cum_replica_hits = prev.cum_replica_hits + m.replica_hits;
        m.cum_replicas_created = prev.cum_replicas_created + m.replicas_created;
        m.cum_evictions = prev.cum_evictions + m.evictions;
        m.cum_total_hops = prev.cum_total_hops + m.total_hops;
        m.mean_hops = ratio(m.total_hops, m.requests);
        m.avg_replica_usage = m.cum_replica_hits as f64 / m.cum_replicas_created.max(1) as f64;
        m.storage_used_fraction = catalog.used_fraction();
        self.previous = Some(m.clone());
        m
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// An action as written to `actions.jsonl`. `after_request` is the index of
/// the request (within its interval) that caused it, or absent for actions
/// taken at the end of the interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub strategy: StrategyKind,
    pub interval: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after_request: Option<u32>,
    #[serde(flatten)]
    pub action: ReplicationAction,
}

/// Rebuilds a report by replaying the request and action logs onto the
/// initial catalog.
pub fn recompute(
    strategy: StrategyKind,
    topology: &Topology,
    initial: &ReplicaCatalog,
    requests: &[Request],
    actions: &[ActionRecord],
    intervals: u32,
) -> Result<MetricsReport> {
    let mut catalog = initial.clone();
    let mut recorder = MetricsRecorder::new();
    let mut report = MetricsReport::new(strategy);
    let mut req_iter = requests.iter().peekable();
    let mut act_iter = actions.iter().filter(|a| a.strategy == strategy).peekable();
    for interval in 0..intervals {
        recorder.begin(interval);
        let mut idx = 0u32;
        while let Some(r) = req_iter.next_if(|r| r.interval == interval) {
            let served = serve_request(topology, &catalog, r.requester, r.file)?;
            recorder.request(served.hops, served.is_replica_hit());
            while let Some(a) = act_iter.next_if(|a| a.interval == interval && a.after_request == Some(idx)) {
                apply_actions(&mut catalog, [&a.action])?;
                recorder.actions([&a.action]);
            }
            idx += 1;
        }
        while let Some(a) = act_iter.next_if(|a| a.interval == interval) {
            apply_actions(&mut catalog, [&a.action])?;
            recorder.actions([&a.action]);
        }
        report.intervals.push(recorder.finish(&catalog));
    }
    Ok(report)
}

pub const CSV_HEADER: [&str; 8] = [
    "strategy",
    "interval",
    "replicas_created",
    "replica_hits",
    "avg_replica_usage",
    "mean_hops",
    "evictions",
    "storage_used_fraction",
];

/// Writes one row per interval per report. Counts are cumulative.
pub fn write_csv<W: Write>(out: W, reports: &[MetricsReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        let name = r.strategy.map_or("", StrategyKind::name);
        for m in &r.intervals {
            w.write_record([
                name.to_string(),
                m.interval.to_string(),
                m.cum_replicas_created.to_string(),
                m.cum_replica_hits.to_string(),
                format!("{:.6}", m.avg_replica_usage),
                format!("{:.6}", m.mean_hops),
                m.cum_evictions.to_string(),
                format!("{:.6}", m.storage_used_fraction),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
