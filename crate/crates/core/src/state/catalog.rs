// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ids::{FileId, NodeId};
use crate::state::FileMeta;
use crate::topology::Topology;

/// Outcome of a placement request that did not fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlaceOutcome {
    /// A new replica now lives at `header`.
    Placed { header: NodeId },
    /// The cluster (or the root) already holds the file; nothing changed.
    Duplicate { header: NodeId },
}

/// Which cluster headers hold which files, and how much room each header
/// has left. Storage is tracked per cluster: a placement on any member lands
/// on its header, so a cluster holds at most one replica of a file. The root
/// holds every file and has no accounting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplicaCatalog {
    sizes: Vec<u64>,
    holders: Vec<BTreeSet<NodeId>>,
    capacity: BTreeMap<NodeId, u64>,
    free: BTreeMap<NodeId, u64>,
    header_of: Vec<Option<NodeId>>,
}

/// JSON view of a catalog.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalogSnapshot {
    pub holders: BTreeMap<FileId, Vec<NodeId>>,
    pub free_space: BTreeMap<NodeId, u64>,
}

impl ReplicaCatalog {
    pub fn new(topology: &Topology, files: &[FileMeta]) -> Self {
        let capacity: BTreeMap<NodeId, u64> =
            topology.headers().iter().map(|&h| (h, topology.header_capacity(h))).collect();
        let header_of = topology.tree().nodes().iter().map(|n| topology.header_of(n.id)).collect();
        ReplicaCatalog {
            sizes: files.iter().map(|f| f.size).collect(),
            holders: vec![BTreeSet::from([NodeId::ROOT]); files.len()],
            free: capacity.clone(),
            capacity,
            header_of,
        }
    }

    pub fn file_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn file_size(&self, file: FileId) -> Result<u64> {
        self.check_file(file)?;
        Ok(self.sizes[file.index()])
    }

    fn check_file(&self, file: FileId) -> Result<()> {
        if file.0 == 0 || file.index() >= self.sizes.len() {
            return Err(Error::UnknownFile(file));
        }
        Ok(())
    }

    /// Storage owner for `node`: the root for itself, the cluster header
    /// otherwise.
    pub fn owner_of(&self, node: NodeId) -> Result<NodeId> {
        if node == NodeId::ROOT {
            return Ok(NodeId::ROOT);
        }
        match self.header_of.get(node.index()) {
            Some(Some(h)) => Ok(*h),
            Some(None) => Err(Error::Usage(format!("node {node} is not in any cluster"))),
            None => Err(Error::UnknownNode(node)),
        }
    }

    /// Whether the root or the cluster of `node` holds `file`.
    pub fn holds(&self, node: NodeId, file: FileId) -> bool {
        match (self.owner_of(node), self.check_file(file)) {
            (Ok(owner), Ok(())) => self.holders[file.index()].contains(&owner),
            _ => false,
        }
    }

    pub fn holders(&self, file: FileId) -> &BTreeSet<NodeId> {
        &self.holders[file.index()]
    }

    pub fn free_space(&self, header: NodeId) -> u64 {
        self.free.get(&header).copied().unwrap_or(0)
    }

    pub fn capacity(&self, header: NodeId) -> u64 {
        self.capacity.get(&header).copied().unwrap_or(0)
    }

    pub fn headers(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.capacity.keys().copied()
    }

    /// Files held at `header`, ascending.
    pub fn held_files(&self, header: NodeId) -> Vec<FileId> {
        self.holders
            .iter()
            .enumerate()
            .filter(|(_, h)| h.contains(&header))
            .map(|(i, _)| FileId::from_index(i))
            .collect()
    }

    /// Number of replicas outside the root.
    pub fn replica_count(&self) -> usize {
        self.holders.iter().map(|h| h.len() - 1).sum()
    }

    /// Total used over total capacity across headers.
    pub fn used_fraction(&self) -> f64 {
        let cap: u64 = self.capacity.values().sum();
        let free: u64 = self.free.values().sum();
        if cap == 0 {
            0.0
        } else {
            (cap - free) as f64 / cap as f64
        }
    }

    pub fn place_replica(&mut self, file: FileId, node: NodeId) -> Result<PlaceOutcome> {
        self.check_file(file)?;
        let owner = self.owner_of(node)?;
        if self.holders[file.index()].contains(&owner) {
            return Ok(PlaceOutcome::Duplicate { header: owner });
        }
        let size = self.sizes[file.index()];
        let free = self.free_space(owner);
        if free < size {
            return Err(Error::InsufficientSpace { node: owner, needed: size, free });
        }
        self.free.insert(owner, free - size);
        self.holders[file.index()].insert(owner);
        Ok(PlaceOutcome::Placed { header: owner })
    }

    pub fn remove_replica(&mut self, file: FileId, node: NodeId) -> Result<()> {
        self.check_file(file)?;
        if node == NodeId::ROOT {
            return Err(Error::Usage("master copies at the root cannot be removed".into()));
        }
        let owner = self.owner_of(node)?;
        if !self.holders[file.index()].remove(&owner) {
            return Err(Error::Usage(format!("node {owner} does not hold file {file}")));
        }
        *self.free.get_mut(&owner).expect("holder is a header") += self.sizes[file.index()];
        Ok(())
    }

    /// Checks storage conservation, root completeness and free-space bounds.
    pub fn check_invariants(&self) -> Result<()> {
        for (i, holders) in self.holders.iter().enumerate() {
            if !holders.contains(&NodeId::ROOT) {
                return Err(Error::Usage(format!("root lost file {}", i + 1)));
            }
        }
        for (&h, &cap) in &self.capacity {
            let used: u64 = self.held_files(h).iter().map(|f| self.sizes[f.index()]).sum();
            let free = self.free_space(h);
            if free + used != cap {
                return Err(Error::Usage(format!(
                    "header {h}: free {free} + used {used} != capacity {cap}"
                )));
            }
        }
        Ok(())
    }

    pub fn snapshot(&self) -> CatalogSnapshot {
        CatalogSnapshot {
            holders: self
                .holders
                .iter()
                .enumerate()
                .map(|(i, h)| (FileId::from_index(i), h.iter().copied().collect()))
                .collect(),
            free_space: self.free.clone(),
        }
    }
}
