// SPDX-License-Identifier: Apache-2.0

//! Mutable simulation state: replica catalog, usage statistics, and the
//! dependency and RI matrices.

mod catalog;
mod matrix;
mod usage;

use serde::{Deserialize, Serialize};

pub use catalog::{CatalogSnapshot, PlaceOutcome, ReplicaCatalog};
pub use matrix::{dependent_files, normalized_inputs, recompute_ri, DependencyMatrix, RiMatrix};
pub use usage::{update_usage, UsageEntry, UsageStats};

use crate::ids::FileId;
use crate::topology::Topology;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileMeta {
    pub id: FileId,
    pub size: u64,
}

/// Everything a replication strategy reads or mutates during a run.
#[derive(Clone, Debug)]
pub struct GridState {
    pub topology: Topology,
    pub files: Vec<FileMeta>,
    pub dependency: DependencyMatrix,
    pub catalog: ReplicaCatalog,
    pub usage: UsageStats,
}

impl GridState {
    pub fn new(topology: Topology, files: Vec<FileMeta>, dependency: DependencyMatrix) -> Self {
        let catalog = ReplicaCatalog::new(&topology, &files);
        let usage = UsageStats::new(topology.headers(), files.len());
        GridState { topology, files, dependency, catalog, usage }
    }
}
