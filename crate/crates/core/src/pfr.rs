// SPDX-License-Identifier: Apache-2.0

//! Predictive fuzzy replication.
//!
//! At the end of every interval the engine refreshes usage ratios, rebuilds
//! the RI matrix, and picks the single highest-scoring (header, file) entry
//! whose cluster lacks the file and whose usage ratio reaches `gamma`. The
//! file is fast-spread from the root down to that header. Every file that
//! depends on it beyond the dependency threshold is then fast-spread to the
//! node on the same root path where its own RI is highest. Room is made by
//! evicting the lowest-RI replicas at a node, unless the victim scores at
//! least as high as the incoming file there.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::FuzzySystemConfig;
use crate::ids::{FileId, NodeId};
use crate::state::{dependent_files, recompute_ri, GridState, PlaceOutcome, ReplicaCatalog, RiMatrix, UsageStats};
use crate::topology::Topology;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PfrParams {
    /// Minimum usage ratio for a primary candidate (inclusive).
    pub gamma: f64,
    /// Dependencies strictly above this value are co-replicated.
    pub dependency_threshold: f64,
    /// Guard primary evictions with the incoming file's RI as well as
    /// dependent ones. Off reproduces unconditional primary eviction.
    pub eviction_guard: bool,
}

impl Default for PfrParams {
    fn default() -> Self {
        PfrParams { gamma: 2.0, dependency_threshold: 0.5, eviction_guard: true }
    }
}

impl PfrParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) {
            return Err(Error::config("gamma must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.dependency_threshold) {
            return Err(Error::config("dependency_threshold must be in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionKind {
    Placed,
    Evicted,
    SkippedNoCandidate,
    SkippedGuard,
    SkippedDuplicate,
}

/// What caused an action: the interval's primary pick (or, for request
/// driven strategies, the request itself), or co-replication of a file
/// that depends on `parent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trigger {
    Primary,
    Dependent(FileId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationAction {
    pub kind: ActionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<FileId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
    pub trigger: Trigger,
}

impl ReplicationAction {
    pub fn new(kind: ActionKind, file: FileId, node: NodeId, trigger: Trigger) -> Self {
        ReplicationAction { kind, file: Some(file), node: Some(node), trigger }
    }

    pub fn no_candidate() -> Self {
        ReplicationAction { kind: ActionKind::SkippedNoCandidate, file: None, node: None, trigger: Trigger::Primary }
    }
}

/// Replays placed and evicted actions onto a catalog.
pub fn apply_actions<'a>(
    catalog: &mut ReplicaCatalog,
    actions: impl IntoIterator<Item = &'a ReplicationAction>,
) -> Result<()> {
    for a in actions {
        match (a.kind, a.file, a.node) {
            (ActionKind::Placed, Some(f), Some(n)) => match catalog.place_replica(f, n)? {
                PlaceOutcome::Placed { .. } => {}
                PlaceOutcome::Duplicate { header } => {
                    return Err(Error::Usage(format!("replayed placement of {f} at {header} is a duplicate")))
                }
            },
            (ActionKind::Evicted, Some(f), Some(n)) => catalog.remove_replica(f, n)?,
            _ => {}
        }
    }
    Ok(())
}

/// Highest-RI entry whose cluster lacks the file and whose usage ratio is at
/// least `gamma`.
pub fn select_primary(
    ri: &RiMatrix,
    catalog: &ReplicaCatalog,
    usage: &UsageStats,
    params: &PfrParams,
) -> Option<(NodeId, FileId, f64)> {
    ri.entries_desc()
        .into_iter()
        .find(|&(h, f, _)| !catalog.holds(h, f) && usage.usage_ratio(h, f) >= params.gamma)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Refusal {
    /// The cheapest remaining victim scores at least as high as the
    /// incoming file.
    Guard,
    /// Evicting every evictable replica would still not make room.
    NoRoom,
}

/// Chooses which replicas at `header` to evict so that `needed` units fit,
/// cheapest RI first, without touching the catalog. `incoming` enables the
/// guard. Replicas in `pinned` are never chosen.
pub fn plan_space(
    catalog: &ReplicaCatalog,
    ri: &RiMatrix,
    header: NodeId,
    needed: u64,
    incoming: Option<f64>,
    pinned: &BTreeSet<(NodeId, FileId)>,
) -> std::result::Result<Vec<FileId>, Refusal> {
    let mut free = catalog.free_space(header);
    if free >= needed {
        return Ok(Vec::new());
    }
    if needed > catalog.capacity(header) {
        return Err(Refusal::NoRoom);
    }
    let mut held: Vec<(FileId, f64)> = catalog
        .held_files(header)
        .into_iter()
        .filter(|f| !pinned.contains(&(header, *f)))
        .map(|f| (f, ri.get(header, f).unwrap_or(0.0)))
        .collect();
    held.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let mut victims = Vec::new();
    for (f, score) in held {
        if incoming.is_some_and(|inc| score >= inc) {
            return Err(Refusal::Guard);
        }
        victims.push(f);
        free += catalog.file_size(f).unwrap_or(0);
        if free >= needed {
            return Ok(victims);
        }
    }
    Err(Refusal::NoRoom)
}

/// [`plan_space`] followed by committing the evictions. On refusal nothing
/// is evicted.
pub fn make_space(
    catalog: &mut ReplicaCatalog,
    ri: &RiMatrix,
    header: NodeId,
    needed: u64,
    incoming: Option<f64>,
    pinned: &BTreeSet<(NodeId, FileId)>,
) -> std::result::Result<Vec<FileId>, Refusal> {
    let victims = plan_space(catalog, ri, header, needed, incoming, pinned)?;
    for &f in &victims {
        catalog.remove_replica(f, header).expect("planned victim is held");
    }
    Ok(victims)
}

/// Places `file` on every node from just below the root down to `target`.
/// Nodes whose cluster already holds the file are skipped; a refused
/// eviction skips that node only.
#[allow(clippy::too_many_arguments)]
pub fn fast_spread(
    catalog: &mut ReplicaCatalog,
    topology: &Topology,
    ri: &RiMatrix,
    file: FileId,
    target: NodeId,
    guarded: bool,
    trigger: Trigger,
    pinned: &mut BTreeSet<(NodeId, FileId)>,
) -> Result<Vec<ReplicationAction>> {
    let size = catalog.file_size(file)?;
    let mut path = topology.path_to_root(target)?;
    path.reverse();
    let mut actions = Vec::new();
    for node in path {
        let Some(owner) = topology.header_of(node) else { continue };
        if catalog.holds(owner, file) {
            actions.push(ReplicationAction::new(ActionKind::SkippedDuplicate, file, owner, trigger));
            continue;
        }
        let incoming = guarded.then(|| ri.get(owner, file).unwrap_or(0.0));
        match make_space(catalog, ri, owner, size, incoming, pinned) {
            Ok(victims) => {
                for v in victims {
                    actions.push(ReplicationAction::new(ActionKind::Evicted, v, owner, trigger));
                }
                catalog.place_replica(file, owner)?;
                pinned.insert((owner, file));
                actions.push(ReplicationAction::new(ActionKind::Placed, file, owner, trigger));
            }
            Err(_) => actions.push(ReplicationAction::new(ActionKind::SkippedGuard, file, owner, trigger)),
        }
    }
    Ok(actions)
}

/// For every file depending on `chosen`, fast-spreads it to the node on
/// `chosen_node`'s root path where its RI is highest (ties go to the node
/// nearer the root). Evictions are always guarded.
#[allow(clippy::too_many_arguments)]
pub fn place_dependents(
    state: &mut GridState,
    ri: &RiMatrix,
    chosen: FileId,
    chosen_node: NodeId,
    params: &PfrParams,
    pinned: &mut BTreeSet<(NodeId, FileId)>,
) -> Result<Vec<ReplicationAction>> {
    let path = state.topology.path_to_root(chosen_node)?;
    let mut actions = Vec::new();
    for dep in dependent_files(&state.dependency, chosen, params.dependency_threshold) {
        let mut best: Option<(NodeId, f64)> = None;
        for &node in path.iter().rev() {
            let Some(owner) = state.topology.header_of(node) else { continue };
            let score = ri.get(owner, dep).unwrap_or(f64::NEG_INFINITY);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((node, score));
            }
        }
        if let Some((target, _)) = best {
            actions.extend(fast_spread(
                &mut state.catalog,
                &state.topology,
                ri,
                dep,
                target,
                true,
                Trigger::Dependent(chosen),
                pinned,
            )?);
        }
    }
    Ok(actions)
}

/// Replication decisions for one interval on an already computed RI matrix.
pub fn decide(state: &mut GridState, ri: &RiMatrix, params: &PfrParams) -> Result<Vec<ReplicationAction>> {
    let Some((header, file, _)) = select_primary(ri, &state.catalog, &state.usage, params) else {
        return Ok(vec![ReplicationAction::no_candidate()]);
    };
    let mut pinned = BTreeSet::new();
    let mut actions = fast_spread(
        &mut state.catalog,
        &state.topology,
        ri,
        file,
        header,
        params.eviction_guard,
        Trigger::Primary,
        &mut pinned,
    )?;
    actions.extend(place_dependents(state, ri, file, header, params, &mut pinned)?);
    Ok(actions)
}

/// Closes the interval: usage update, RI recomputation, then [`decide`].
pub fn run_interval(
    state: &mut GridState,
    fuzzy: &FuzzySystemConfig,
    params: &PfrParams,
) -> Result<(RiMatrix, Vec<ReplicationAction>)> {
    state.usage.end_interval();
    let ri = recompute_ri(&state.topology, &state.files, &state.usage, &state.catalog, fuzzy)?;
    let actions = decide(state, &ri, params)?;
    Ok((ri, actions))
}
