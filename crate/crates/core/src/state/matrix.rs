// SPDX-License-Identifier: Apache-2.0

//! Dependency and replica-indicator matrices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{infer_ri, FuzzySystemConfig};
use crate::ids::{FileId, NodeId};
use crate::state::{FileMeta, ReplicaCatalog, UsageStats};
use crate::topology::Topology;

/// Square matrix of file-to-file dependency ratios. Row `f` holds how
/// strongly each other file depends on `f`. Not required to be symmetric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DependencyMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DependencyMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: format!("{n} columns in dependency row {}", i + 1),
                    actual: row.len().to_string(),
                });
            }
            for (j, v) in row.into_iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::config(format!(
                        "dependency ({}, {}) = {v} outside [0, 1]",
                        i + 1,
                        j + 1
                    )));
                }
                if i == j && v != 1.0 {
                    return Err(Error::config(format!("dependency diagonal ({0}, {0}) must be 1", i + 1)));
                }
                values.push(v);
            }
        }
        Ok(DependencyMatrix { n, values })
    }

    pub fn identity(n: usize) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
        }
        DependencyMatrix { n, values }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, from: FileId, to: FileId) -> f64 {
        self.values[from.index() * self.n + to.index()]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n.max(1)).take(self.n).map(<[f64]>::to_vec).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for DependencyMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        DependencyMatrix::new(rows)
    }
}

impl From<DependencyMatrix> for Vec<Vec<f64>> {
    fn from(m: DependencyMatrix) -> Self {
        m.rows()
    }
}

/// Files `g != f` with `dep[f][g] > threshold`, in ascending id order.
pub fn dependent_files(dep: &DependencyMatrix, file: FileId, threshold: f64) -> Vec<FileId> {
    (0..dep.len())
        .map(FileId::from_index)
        .filter(|&g| g != file && dep.get(file, g) > threshold)
        .collect()
}

/// Replica indicator scores, one row per cluster header.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiMatrix {
    headers: Vec<NodeId>,
    files: usize,
    values: Vec<f64>,
    #[serde(skip)]
    index: BTreeMap<NodeId, usize>,
}

impl RiMatrix {
    pub fn from_rows(headers: &[NodeId], rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != headers.len() {
            return Err(Error::Dimension {
                expected: format!("{} RI rows", headers.len()),
                actual: rows.len().to_string(),
            });
        }
        let files = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(headers.len() * files);
        for row in rows {
            if row.len() != files {
                return Err(Error::Dimension {
                    expected: format!("{files} RI columns"),
                    actual: row.len().to_string(),
                });
            }
            values.extend(row);
        }
        let index = headers.iter().enumerate().map(|(i, &h)| (h, i)).collect();
        Ok(RiMatrix { headers: headers.to_vec(), files, values, index })
    }

    pub fn headers(&self) -> &[NodeId] {
        &self.headers
    }

    pub fn file_count(&self) -> usize {
        self.files
    }

    /// Score for `(header, file)`; `None` when either is outside the matrix.
    pub fn get(&self, header: NodeId, file: FileId) -> Option<f64> {
        let h = *self.index.get(&header)?;
        (file.0 >= 1 && file.index() < self.files).then(|| self.values[h * self.files + file.index()])
    }

    pub fn row(&self, header: NodeId) -> Option<&[f64]> {
        let h = *self.index.get(&header)?;
        Some(&self.values[h * self.files..(h + 1) * self.files])
    }

    /// All entries sorted by descending score; ties go to the lower header
    /// id, then the lower file id.
    pub fn entries_desc(&self) -> Vec<(NodeId, FileId, f64)> {
        let mut entries: Vec<_> = self
            .headers
            .iter()
            .enumerate()
            .flat_map(|(hi, &h)| {
                (0..self.files).map(move |fi| (h, FileId::from_index(fi), hi * self.files + fi))
            })
            .map(|(h, f, s)| (h, f, self.values[s]))
            .collect();
        entries.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
        entries
    }
}

/// Normalized fuzzy inputs for one (header, file) pair: tier by the deepest
/// tier, size by the largest file, usage by the saturation cap and free
/// space by the largest header capacity. Each lands in `[0, 1]` before being
/// mapped onto the variable's domain.
pub fn normalized_inputs(
    topology: &Topology,
    files: &[FileMeta],
    usage: &UsageStats,
    catalog: &ReplicaCatalog,
    cfg: &FuzzySystemConfig,
    header: NodeId,
    file: FileId,
) -> [f64; 4] {
    let max_tier = topology.tree().max_tier().max(1) as f64;
    let max_size = files.iter().map(|f| f.size).max().unwrap_or(1).max(1) as f64;
    let max_cap = topology.max_header_capacity().max(1) as f64;
    let unit = [
        topology.tier(header) as f64 / max_tier,
        files[file.index()].size as f64 / max_size,
        usage.usage_ratio(header, file) / cfg.usage_saturation,
        catalog.free_space(header) as f64 / max_cap,
    ];
    let vars = [&cfg.level, &cfg.file_size, &cfg.usage_ratio, &cfg.node_size];
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = vars[i].domain_min + unit[i].min(1.0) * (vars[i].domain_max - vars[i].domain_min);
    }
    out
}

/// Rebuilds the RI matrix from the current usage, free space and file sizes.
pub fn recompute_ri(
    topology: &Topology,
    files: &[FileMeta],
    usage: &UsageStats,
    catalog: &ReplicaCatalog,
    cfg: &FuzzySystemConfig,
) -> Result<RiMatrix> {
    let headers = topology.headers();
    let mut rows = Vec::with_capacity(headers.len());
    for &h in headers {
        let mut row = Vec::with_capacity(files.len());
        for fi in 0..files.len() {
            let [level, size, ratio, node] =
                normalized_inputs(topology, files, usage, catalog, cfg, h, FileId::from_index(fi));
            row.push(infer_ri(level, size, ratio, node, cfg)?);
        }
        rows.push(row);
    }
    RiMatrix::from_rows(headers, rows)
}
