// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{FileId, NodeId};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UsageEntry {
    pub usage_ratio: f64,
    pub curr_usage: u64,
    pub prev_usage: u64,
}

/// Closes an interval for one (header, file) pair and returns the new ratio.
///
/// * no requests this interval: the ratio halves
/// * requests now but none in the previous interval: `ratio + curr`
/// * otherwise: `ratio * curr / prev`
///
/// Afterwards `prev = curr` and `curr = 0`.
pub fn update_usage(entry: &mut UsageEntry) -> f64 {
    let (curr, prev) = (entry.curr_usage, entry.prev_usage);
    entry.usage_ratio = if curr == 0 {
        entry.usage_ratio / 2.0
    } else if prev == 0 {
        entry.usage_ratio + curr as f64
    } else {
        entry.usage_ratio * (curr as f64 / prev as f64)
    };
    entry.prev_usage = curr;
    entry.curr_usage = 0;
    entry.usage_ratio
}

/// Per (cluster header, file) usage statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct UsageStats {
    index: BTreeMap<NodeId, usize>,
    headers: Vec<NodeId>,
    files: usize,
    entries: Vec<UsageEntry>,
}

impl UsageStats {
    pub fn new(headers: &[NodeId], files: usize) -> Self {
        let index = headers.iter().enumerate().map(|(i, &h)| (h, i)).collect();
        UsageStats {
            index,
            headers: headers.to_vec(),
            files,
            entries: vec![UsageEntry::default(); headers.len() * files],
        }
    }

    fn slot(&self, header: NodeId, file: FileId) -> Result<usize> {
        let h = *self.index.get(&header).ok_or(Error::UnknownNode(header))?;
        if file.0 == 0 || file.index() >= self.files {
            return Err(Error::UnknownFile(file));
        }
        Ok(h * self.files + file.index())
    }

    pub fn headers(&self) -> &[NodeId] {
        &self.headers
    }

    pub fn file_count(&self) -> usize {
        self.files
    }

    pub fn entry(&self, header: NodeId, file: FileId) -> Result<UsageEntry> {
        Ok(self.entries[self.slot(header, file)?])
    }

    pub fn usage_ratio(&self, header: NodeId, file: FileId) -> f64 {
        self.slot(header, file).map_or(0.0, |s| self.entries[s].usage_ratio)
    }

    pub fn set_usage_ratio(&mut self, header: NodeId, file: FileId, ratio: f64) -> Result<()> {
        if !(ratio >= 0.0) {
            return Err(Error::Usage(format!("usage ratio {ratio} must be >= 0")));
        }
        let s = self.slot(header, file)?;
        self.entries[s].usage_ratio = ratio;
        Ok(())
    }

    /// Counts one request against the current interval.
    pub fn record(&mut self, header: NodeId, file: FileId) -> Result<()> {
        let s = self.slot(header, file)?;
        self.entries[s].curr_usage += 1;
        Ok(())
    }

    /// Applies [`update_usage`] to every pair.
    pub fn end_interval(&mut self) {
        for e in &mut self.entries {
            update_usage(e);
        }
    }
}
