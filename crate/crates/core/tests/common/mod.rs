// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use gridrep::config::SimConfig;
use gridrep::metrics::ActionRecord;
use gridrep::pfr::ActionKind;
use gridrep::scenario::ScenarioConfig;
use gridrep::state::GridState;
use gridrep::strategy::StrategyKind;
use gridrep::{FileId, NodeId};

pub fn paper_config(seed: u64) -> SimConfig {
    SimConfig {
        seed,
        scenario: ScenarioConfig { builtin: Some("paper-s4".into()), ..Default::default() },
        ..SimConfig::default()
    }
}

pub fn small_config(seed: u64, intervals: u32, requests: usize) -> SimConfig {
    let mut cfg = SimConfig {
        seed,
        intervals,
        scenario: ScenarioConfig { builtin: Some("worked-example".into()), ..Default::default() },
        ..SimConfig::default()
    };
    cfg.workload.requests_per_interval = requests;
    cfg
}

/// Independent holder model: file -> set of storage owners, root included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Holdings {
    pub holders: BTreeMap<FileId, BTreeSet<NodeId>>,
}

impl Holdings {
    pub fn initial(state: &GridState) -> Self {
        Holdings { holders: state.files.iter().map(|f| (f.id, BTreeSet::from([NodeId(0)]))).collect() }
    }

    pub fn apply(&mut self, rec: &ActionRecord) -> Result<(), String> {
        let (Some(f), Some(n)) = (rec.action.file, rec.action.node) else { return Ok(()) };
        let set = self.holders.get_mut(&f).ok_or(format!("unknown file {f}"))?;
        match rec.action.kind {
            ActionKind::Placed if !set.insert(n) => Err(format!("{f} placed twice at {n}")),
            ActionKind::Evicted if n == NodeId(0) || !set.remove(&n) => Err(format!("bad eviction of {f} at {n}")),
            _ => Ok(()),
        }
    }

    pub fn as_snapshot_map(&self) -> BTreeMap<FileId, Vec<NodeId>> {
        self.holders.iter().map(|(f, s)| (*f, s.iter().copied().collect())).collect()
    }
}

/// Checks the catalog invariants from first principles: every replica sits
/// at a cluster header, at most one per cluster, the root keeps every file,
/// and no header stores more than the summed capacity of its members.
pub fn check_holdings(state: &GridState, h: &Holdings) -> Result<(), String> {
    let tree = state.topology.tree();
    let mut capacity: BTreeMap<NodeId, u64> = BTreeMap::new();
    let mut header_of: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for c in state.topology.clusters() {
        let cap = c.members.iter().map(|m| tree.nodes()[m.0 as usize].capacity).sum();
        capacity.insert(c.header, cap);
        for &m in &c.members {
            header_of.insert(m, c.header);
        }
    }
    let size: BTreeMap<FileId, u64> = state.files.iter().map(|f| (f.id, f.size)).collect();
    let mut used: BTreeMap<NodeId, u64> = BTreeMap::new();
    for (f, holders) in &h.holders {
        if !holders.contains(&NodeId(0)) {
            return Err(format!("root lost {f}"));
        }
        let mut clusters = BTreeSet::new();
        for &n in holders.iter().filter(|n| n.0 != 0) {
            if header_of.get(&n) != Some(&n) {
                return Err(format!("{f} stored at non-header {n}"));
            }
            if !clusters.insert(header_of[&n]) {
                return Err(format!("{f} twice in one cluster"));
            }
            *used.entry(n).or_default() += size[f];
        }
    }
    for (n, u) in used {
        if u > capacity[&n] {
            return Err(format!("header {n} stores {u} > capacity {}", capacity[&n]));
        }
    }
    Ok(())
}

/// Replays `actions` interval by interval, checking invariants after each
/// interval; returns the final holdings.
pub fn replay_checked(state: &GridState, actions: &[ActionRecord], intervals: u32) -> Result<Holdings, String> {
    let mut h = Holdings::initial(state);
    let mut it = actions.iter().peekable();
    for i in 0..intervals {
        while let Some(a) = it.next_if(|a| a.interval == i) {
            h.apply(a)?;
        }
        check_holdings(state, &h).map_err(|e| format!("interval {i}: {e}"))?;
    }
    if it.next().is_some() {
        return Err("actions beyond the last interval".into());
    }
    Ok(h)
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

pub const COMPARED: [StrategyKind; 4] =
    [StrategyKind::Cascading, StrategyKind::FastSpread, StrategyKind::PhfsSimplified, StrategyKind::Pfr];
