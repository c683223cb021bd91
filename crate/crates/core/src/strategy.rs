// SPDX-License-Identifier: Apache-2.0

//! Request-driven baseline strategies and the shared request service walk.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{FileId, NodeId};
use crate::pfr::{ActionKind, ReplicationAction, Trigger};
use crate::state::{dependent_files, GridState, ReplicaCatalog};
use crate::topology::Topology;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    None,
    BestClient,
    Cascading,
    CachingCascading,
    FastSpread,
    PhfsSimplified,
    Pfr,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 7] = [
        StrategyKind::None,
        StrategyKind::BestClient,
        StrategyKind::Cascading,
        StrategyKind::CachingCascading,
        StrategyKind::FastSpread,
        StrategyKind::PhfsSimplified,
        StrategyKind::Pfr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::None => "none",
            StrategyKind::BestClient => "best_client",
            StrategyKind::Cascading => "cascading",
            StrategyKind::CachingCascading => "caching_cascading",
            StrategyKind::FastSpread => "fast_spread",
            StrategyKind::PhfsSimplified => "phfs_simplified",
            StrategyKind::Pfr => "pfr",
        }
    }

    /// Whether the strategy acts on each request (as opposed to only at
    /// interval ends).
    pub fn is_request_driven(self) -> bool {
        !matches!(self, StrategyKind::Pfr | StrategyKind::BestClient | StrategyKind::None)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::config(format!("unknown strategy '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdParams {
    /// Requests for a file served by one holder before it cascades a tier
    /// down.
    pub cascade_threshold: u32,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        ThresholdParams { cascade_threshold: 3 }
    }
}

impl ThresholdParams {
    pub fn validate(&self) -> Result<()> {
        if self.cascade_threshold < 1 {
            return Err(Error::config("cascade_threshold must be >= 1"));
        }
        Ok(())
    }
}

/// Where a request was served from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Served {
    /// Steps from the requester towards the root before a holder was found.
    pub hops: u32,
    /// The storage owner that served it: a cluster header, or the root.
    pub holder: NodeId,
    /// Position of the serving node on the requester's root path; equals
    /// the path length when the root served.
    pub path_index: usize,
}

impl Served {
    pub fn is_replica_hit(&self) -> bool {
        self.holder != NodeId::ROOT
    }
}

/// Walks from the requester towards the root and stops at the first node
/// whose cluster holds the file.
pub fn serve_request(topology: &Topology, catalog: &ReplicaCatalog, requester: NodeId, file: FileId) -> Result<Served> {
    let path = topology.path_to_root(requester)?;
    for (i, &node) in path.iter().enumerate() {
        if catalog.holds(node, file) {
            let holder = catalog.owner_of(node)?;
            return Ok(Served { hops: i as u32, holder, path_index: i });
        }
    }
    Ok(Served { hops: path.len() as u32, holder: NodeId::ROOT, path_index: path.len() })
}

/// Book-keeping for the request-driven baselines. Evictions are least
/// recently used per header.
#[derive(Clone, Debug)]
pub struct Baseline {
    kind: StrategyKind,
    params: ThresholdParams,
    dependency_threshold: f64,
    clock: u64,
    last_use: BTreeMap<(NodeId, FileId), u64>,
    cascade_counts: BTreeMap<(NodeId, FileId), u32>,
    client_counts: BTreeMap<(FileId, NodeId), u64>,
}

impl Baseline {
    pub fn new(kind: StrategyKind, params: ThresholdParams, dependency_threshold: f64) -> Self {
        Baseline {
            kind,
            params,
            dependency_threshold,
            clock: 0,
            last_use: BTreeMap::new(),
            cascade_counts: BTreeMap::new(),
            client_counts: BTreeMap::new(),
        }
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    /// Reacts to one request that has already been served.
    pub fn on_request(
        &mut self,
        state: &mut GridState,
        requester: NodeId,
        file: FileId,
        served: Served,
    ) -> Result<Vec<ReplicationAction>> {
        self.clock += 1;
        if served.is_replica_hit() {
            self.last_use.insert((served.holder, file), self.clock);
        }
        let mut out = Vec::new();
        let mut protect = BTreeSet::new();
        match self.kind {
            StrategyKind::None | StrategyKind::Pfr => {}
            StrategyKind::BestClient => {
                if let Some(h) = state.topology.header_of(requester) {
                    *self.client_counts.entry((file, h)).or_default() += 1;
                }
            }
            StrategyKind::Cascading | StrategyKind::CachingCascading => {
                self.cascade(state, requester, file, served, &mut protect, &mut out)?;
                if self.kind == StrategyKind::CachingCascading && served.path_index > 0 {
                    self.place_lru(state, file, requester, Trigger::Primary, &mut protect, &mut out)?;
                }
            }
            StrategyKind::FastSpread => {
                self.spread(state, file, requester, &mut protect, &mut out)?;
            }
            StrategyKind::PhfsSimplified => {
                self.spread(state, file, requester, &mut protect, &mut out)?;
                let parent = state.topology.tree().node(requester)?.parent;
                if let Some(parent) = parent.filter(|&p| p != NodeId::ROOT) {
                    for dep in dependent_files(&state.dependency, file, self.dependency_threshold) {
                        self.place_lru(state, dep, parent, Trigger::Dependent(file), &mut protect, &mut out)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Interval-end hook; only best-client acts here.
    pub fn on_interval_end(&mut self, state: &mut GridState) -> Result<Vec<ReplicationAction>> {
        let mut out = Vec::new();
        if self.kind != StrategyKind::BestClient {
            return Ok(out);
        }
        let counts = std::mem::take(&mut self.client_counts);
        let mut best: BTreeMap<FileId, (NodeId, u64)> = BTreeMap::new();
        for ((file, header), n) in counts {
            let entry = best.entry(file).or_insert((header, n));
            if n > entry.1 {
                *entry = (header, n);
            }
        }
        let mut protect = BTreeSet::new();
        for (file, (header, _)) in best {
            self.place_lru(state, file, header, Trigger::Primary, &mut protect, &mut out)?;
        }
        Ok(out)
    }

    fn cascade(
        &mut self,
        state: &mut GridState,
        requester: NodeId,
        file: FileId,
        served: Served,
        protect: &mut BTreeSet<(NodeId, FileId)>,
        out: &mut Vec<ReplicationAction>,
    ) -> Result<()> {
        if served.path_index == 0 {
            return Ok(());
        }
        let count = self.cascade_counts.entry((served.holder, file)).or_default();
        *count += 1;
        if *count < self.params.cascade_threshold {
            return Ok(());
        }
        *count = 0;
        let path = state.topology.path_to_root(requester)?;
        let next = path[served.path_index - 1];
        self.place_lru(state, file, next, Trigger::Primary, protect, out)
    }

    fn spread(
        &mut self,
        state: &mut GridState,
        file: FileId,
        requester: NodeId,
        protect: &mut BTreeSet<(NodeId, FileId)>,
        out: &mut Vec<ReplicationAction>,
    ) -> Result<()> {
        let path = state.topology.path_to_root(requester)?;
        for &node in path.iter().rev() {
            self.place_lru(state, file, node, Trigger::Primary, protect, out)?;
        }
        Ok(())
    }

    fn place_lru(
        &mut self,
        state: &mut GridState,
        file: FileId,
        node: NodeId,
        trigger: Trigger,
        protect: &mut BTreeSet<(NodeId, FileId)>,
        out: &mut Vec<ReplicationAction>,
    ) -> Result<()> {
        let Some(owner) = state.topology.header_of(node) else { return Ok(()) };
        let catalog = &mut state.catalog;
        if catalog.holds(owner, file) {
            return Ok(());
        }
        let size = catalog.file_size(file)?;
        if size > catalog.capacity(owner) {
            return Ok(());
        }
        let mut candidates: Vec<(u64, FileId)> = catalog
            .held_files(owner)
            .into_iter()
            .filter(|f| !protect.contains(&(owner, *f)))
            .map(|f| (self.last_use.get(&(owner, f)).copied().unwrap_or(0), f))
            .collect();
        candidates.sort();
        let mut victims = Vec::new();
        let mut free = catalog.free_space(owner);
        for (_, f) in candidates {
            if free >= size {
                break;
            }
            free += catalog.file_size(f)?;
            victims.push(f);
        }
        if free < size {
            return Ok(());
        }
        for v in victims {
            catalog.remove_replica(v, owner)?;
            self.last_use.remove(&(owner, v));
            out.push(ReplicationAction::new(ActionKind::Evicted, v, owner, trigger));
        }
        catalog.place_replica(file, owner)?;
        self.last_use.insert((owner, file), self.clock);
        protect.insert((owner, file));
        out.push(ReplicationAction::new(ActionKind::Placed, file, owner, trigger));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::state::{DependencyMatrix, FileMeta};
    use crate::topology::{cluster_nodes, GridTree, TreeShape};

    fn fixture(capacity: u64, sizes: &[u64], dep: DependencyMatrix) -> GridState {
        let mut tree = GridTree::build(
            &TreeShape::Edges(vec![(1, 0), (2, 0), (3, 1), (4, 1), (5, 2), (6, 2)]),
            &[capacity * 10, capacity, capacity],
        )
        .unwrap();
        tree.layout_hierarchical(1);
        let clusters = cluster_nodes(&tree, 1.0, &BTreeSet::from([1, 2]));
        let topo = Topology::new(tree, clusters).unwrap();
        let files = sizes.iter().enumerate().map(|(i, &s)| FileMeta { id: FileId(i as u32 + 1), size: s }).collect();
        GridState::new(topo, files, dep)
    }

    fn request(b: &mut Baseline, state: &mut GridState, node: u32, file: u32) -> Vec<(u32, u32)> {
        let served = serve_request(&state.topology, &state.catalog, NodeId(node), FileId(file)).unwrap();
        b.on_request(state, NodeId(node), FileId(file), served)
            .unwrap()
            .iter()
            .filter(|a| a.kind == ActionKind::Placed)
            .map(|a| (a.file.unwrap().0, a.node.unwrap().0))
            .collect()
    }

    #[test]
    fn parse_names() {
        assert_eq!("fast-spread".parse::<StrategyKind>().unwrap(), StrategyKind::FastSpread);
        assert_eq!("PFR".parse::<StrategyKind>().unwrap(), StrategyKind::Pfr);
        assert!("cfs".parse::<StrategyKind>().is_err());
        for k in StrategyKind::ALL {
            assert_eq!(k.name().parse::<StrategyKind>().unwrap(), k);
        }
    }

    #[test]
    fn fast_spread_fills_requester_path() {
        let mut state = fixture(10, &[1, 1, 1], DependencyMatrix::identity(3));
        let mut b = Baseline::new(StrategyKind::FastSpread, ThresholdParams::default(), 0.5);
        assert_eq!(request(&mut b, &mut state, 6, 3), vec![(3, 2), (3, 6)]);
        assert!(request(&mut b, &mut state, 6, 3).is_empty());
    }

    #[test]
    fn none_never_places() {
        let mut state = fixture(10, &[1, 1, 1], DependencyMatrix::identity(3));
        let before = state.catalog.clone();
        let mut b = Baseline::new(StrategyKind::None, ThresholdParams::default(), 0.5);
        for (n, f) in [(6, 1), (3, 2), (1, 3)] {
            assert!(request(&mut b, &mut state, n, f).is_empty());
        }
        assert!(b.on_interval_end(&mut state).unwrap().is_empty());
        assert_eq!(state.catalog, before);
    }

    #[test]
    fn cascading_fires_on_threshold() {
        let mut state = fixture(10, &[1, 1, 1], DependencyMatrix::identity(3));
        let mut b = Baseline::new(StrategyKind::Cascading, ThresholdParams { cascade_threshold: 3 }, 0.5);
        assert!(request(&mut b, &mut state, 6, 1).is_empty());
        assert!(request(&mut b, &mut state, 6, 1).is_empty());
        assert_eq!(request(&mut b, &mut state, 6, 1), vec![(1, 2)]);
        // counter reset: node 2 now serves, three more to reach node 6
        assert!(request(&mut b, &mut state, 6, 1).is_empty());
        assert!(request(&mut b, &mut state, 6, 1).is_empty());
        assert_eq!(request(&mut b, &mut state, 6, 1), vec![(1, 6)]);
        assert!(request(&mut b, &mut state, 6, 1).is_empty());
    }

    #[test]
    fn caching_cascading_also_caches_at_client() {
        let mut state = fixture(10, &[1, 1], DependencyMatrix::identity(2));
        let mut b = Baseline::new(StrategyKind::CachingCascading, ThresholdParams { cascade_threshold: 2 }, 0.5);
        assert_eq!(request(&mut b, &mut state, 5, 2), vec![(2, 5)]);
    }

    #[test]
    fn best_client_replicates_at_interval_end() {
        let mut state = fixture(10, &[1, 1], DependencyMatrix::identity(2));
        let mut b = Baseline::new(StrategyKind::BestClient, ThresholdParams::default(), 0.5);
        for (n, f) in [(3, 1), (4, 1), (4, 1), (6, 2)] {
            assert!(request(&mut b, &mut state, n, f).is_empty());
        }
        let placed: Vec<_> = b
            .on_interval_end(&mut state)
            .unwrap()
            .iter()
            .map(|a| (a.file.unwrap().0, a.node.unwrap().0))
            .collect();
        assert_eq!(placed, vec![(1, 4), (2, 6)]);
    }

    #[test]
    fn phfs_adds_dependents_at_parent() {
        let dep = DependencyMatrix::new(vec![vec![1.0, 0.9, 0.1], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let mut state = fixture(10, &[1, 1, 1], dep);
        let mut b = Baseline::new(StrategyKind::PhfsSimplified, ThresholdParams::default(), 0.5);
        assert_eq!(request(&mut b, &mut state, 6, 1), vec![(1, 2), (1, 6), (2, 2)]);
    }

    #[test]
    fn lru_eviction_makes_room() {
        let mut state = fixture(2, &[1, 1, 1], DependencyMatrix::identity(3));
        let mut b = Baseline::new(StrategyKind::FastSpread, ThresholdParams::default(), 0.5);
        request(&mut b, &mut state, 1, 1);
        request(&mut b, &mut state, 1, 2);
        request(&mut b, &mut state, 1, 1); // hit refreshes file 1
        let served = serve_request(&state.topology, &state.catalog, NodeId(1), FileId(3)).unwrap();
        let actions = b.on_request(&mut state, NodeId(1), FileId(3), served).unwrap();
        assert_eq!(actions[0], ReplicationAction::new(ActionKind::Evicted, FileId(2), NodeId(1), Trigger::Primary));
        state.catalog.check_invariants().unwrap();
    }

    #[test]
    fn serve_counts_hops() {
        let mut state = fixture(10, &[1, 1], DependencyMatrix::identity(2));
        let s = serve_request(&state.topology, &state.catalog, NodeId(6), FileId(2)).unwrap();
        assert_eq!((s.hops, s.holder), (2, NodeId::ROOT));
        assert!(!s.is_replica_hit());
        state.catalog.place_replica(FileId(2), NodeId(2)).unwrap();
        let s = serve_request(&state.topology, &state.catalog, NodeId(6), FileId(2)).unwrap();
        assert_eq!((s.hops, s.holder), (1, NodeId(2)));
        state.catalog.place_replica(FileId(2), NodeId(6)).unwrap();
        let s = serve_request(&state.topology, &state.catalog, NodeId(6), FileId(2)).unwrap();
        assert_eq!(s.hops, 0);
        assert!(s.is_replica_hit());
    }
}
