// SPDX-License-Identifier: Apache-2.0

//! Scenario descriptions: tree shape, capacities, clustering, files and
//! their dependencies. A scenario starts from a built-in base and any field
//! given in the config replaces the base value.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::FileId;
use crate::state::{DependencyMatrix, FileMeta, GridState};
use crate::topology::{alpha_for_cluster_count, cluster_nodes, GridTree, Topology, TreeShape};

pub const DEFAULT_BUILTIN: &str = "tiered-100";

/// Built-in scenario names accepted by [`ScenarioConfig::builtin`].
pub const BUILTINS: [&str; 3] = ["tiered-100", "paper-s4", "worked-example"];

/// Scenario section of the config file. Unset fields come from `builtin`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub builtin: Option<String>,
    /// Seeds layout, file sizes and generated dependencies.
    pub seed: Option<u64>,
    pub shape: Option<TreeShape>,
    /// Capacity of a single node per tier, root first.
    pub tier_capacities: Option<Vec<u64>>,
    /// Explicit node coordinates; otherwise a seeded hierarchical layout.
    pub coordinates: Option<Vec<[f64; 2]>>,
    /// Fixed clustering distance. Takes precedence over `target_clusters`.
    pub alpha: Option<f64>,
    pub target_clusters: Option<usize>,
    /// Tiers that take part in clustering; default every tier below the root.
    pub clustered_tiers: Option<Vec<u32>>,
    pub file_count: Option<usize>,
    pub file_sizes: Option<Vec<u64>>,
    /// Inclusive range for generated file sizes.
    pub file_size_range: Option<[u64; 2]>,
    pub dependency: Option<Vec<Vec<f64>>>,
    /// Inclusive range for the number of strong dependents per file when the
    /// dependency matrix is generated.
    pub dependents_per_file: Option<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clustering {
    Alpha(f64),
    TargetClusters(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileSpec {
    Sizes(Vec<u64>),
    Random { count: usize, min: u64, max: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DependencySpec {
    Matrix(Vec<Vec<f64>>),
    Random { min_dependents: usize, max_dependents: usize },
}

/// Fully resolved scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub seed: u64,
    pub shape: TreeShape,
    pub tier_capacities: Vec<u64>,
    pub coordinates: Option<Vec<[f64; 2]>>,
    pub clustering: Clustering,
    pub clustered_tiers: Option<Vec<u32>>,
    pub files: FileSpec,
    pub dependency: DependencySpec,
}

/// Worked example: root 0, tier 1 nodes 1 and 2, tier 2 nodes 3 and 4 under
/// 1 and 5 and 6 under 2; every node is its own cluster; five unit files.
pub const WORKED_DEPENDENCY: [[f64; 5]; 5] = [
    [1.0, 0.8, 0.2, 0.3, 0.8],
    [0.0, 1.0, 0.9, 0.0, 0.0],
    [0.7, 0.7, 1.0, 0.4, 0.4],
    [0.5, 0.0, 0.2, 1.0, 0.2],
    [0.4, 0.6, 0.3, 0.6, 1.0],
];

pub fn builtin(name: &str) -> Result<ScenarioSpec> {
    match name {
        "tiered-100" | "paper-s4" => Ok(ScenarioSpec {
            name: name.to_string(),
            seed: 7,
            shape: TreeShape::TierSizes(vec![3, 9, 27, 60]),
            tier_capacities: vec![1000, 16, 8, 4, 2],
            coordinates: None,
            clustering: Clustering::TargetClusters(14),
            clustered_tiers: None,
            files: FileSpec::Random { count: 30, min: 1, max: 10 },
            dependency: DependencySpec::Random { min_dependents: 0, max_dependents: 2 },
        }),
        "worked-example" => Ok(ScenarioSpec {
            name: name.to_string(),
            seed: 1,
            shape: TreeShape::Edges(vec![(1, 0), (2, 0), (3, 1), (4, 1), (5, 2), (6, 2)]),
            tier_capacities: vec![1000, 100, 100],
            coordinates: None,
            clustering: Clustering::Alpha(1.0),
            clustered_tiers: None,
            files: FileSpec::Sizes(vec![1; 5]),
            dependency: DependencySpec::Matrix(WORKED_DEPENDENCY.iter().map(|r| r.to_vec()).collect()),
        }),
        other => Err(Error::config(format!(
            "unknown builtin scenario '{other}' (known: {})",
            BUILTINS.join(", ")
        ))),
    }
}

impl ScenarioConfig {
    pub fn resolve(&self) -> Result<ScenarioSpec> {
        let mut spec = builtin(self.builtin.as_deref().unwrap_or(DEFAULT_BUILTIN))?;
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(shape) = &self.shape {
            spec.shape = shape.clone();
        }
        if let Some(caps) = &self.tier_capacities {
            spec.tier_capacities = caps.clone();
        }
        if let Some(coords) = &self.coordinates {
            spec.coordinates = Some(coords.clone());
        }
        match (self.alpha, self.target_clusters) {
            (Some(a), _) => spec.clustering = Clustering::Alpha(a),
            (None, Some(t)) => spec.clustering = Clustering::TargetClusters(t),
            (None, None) => {}
        }
        if let Some(tiers) = &self.clustered_tiers {
            spec.clustered_tiers = Some(tiers.clone());
        }
        if let Some(sizes) = &self.file_sizes {
            spec.files = FileSpec::Sizes(sizes.clone());
        } else if self.file_count.is_some() || self.file_size_range.is_some() {
            let (count, min, max) = match spec.files {
                FileSpec::Random { count, min, max } => (count, min, max),
                FileSpec::Sizes(ref s) => (s.len(), 1, 10),
            };
            let [min, max] = self.file_size_range.unwrap_or([min, max]);
            spec.files = FileSpec::Random { count: self.file_count.unwrap_or(count), min, max };
        }
        if let Some(dep) = &self.dependency {
            spec.dependency = DependencySpec::Matrix(dep.clone());
        } else if let Some([lo, hi]) = self.dependents_per_file {
            spec.dependency = DependencySpec::Random { min_dependents: lo, max_dependents: hi };
        } else if matches!(spec.dependency, DependencySpec::Matrix(_)) && self.file_count.is_some() {
            spec.dependency = DependencySpec::Random { min_dependents: 0, max_dependents: 2 };
        }
        Ok(spec)
    }
}

impl ScenarioSpec {
    fn validate(&self) -> Result<()> {
        match self.clustering {
            Clustering::Alpha(a) if !(a > 0.0) || !a.is_finite() => {
                return Err(Error::config(format!("alpha must be positive, got {a}")));
            }
            Clustering::TargetClusters(0) => return Err(Error::config("target_clusters must be >= 1")),
            _ => {}
        }
        match &self.files {
            FileSpec::Sizes(s) if s.is_empty() => return Err(Error::config("scenario has no files")),
            FileSpec::Sizes(s) if s.contains(&0) => return Err(Error::config("file sizes must be positive")),
            FileSpec::Random { count: 0, .. } => return Err(Error::config("scenario has no files")),
            FileSpec::Random { min, max, .. } if *min == 0 || min > max => {
                return Err(Error::config(format!("file size range [{min}, {max}] is invalid")));
            }
            _ => {}
        }
        if let DependencySpec::Random { min_dependents, max_dependents } = self.dependency {
            if min_dependents > max_dependents {
                return Err(Error::config("dependents_per_file must be [min, max] with min <= max"));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<GridState> {
        self.validate()?;
        let mut tree = GridTree::build(&self.shape, &self.tier_capacities)?;
        match &self.coordinates {
            Some(c) => tree.set_coordinates(c)?,
            None => tree.layout_hierarchical(self.seed),
        }
        let tiers: BTreeSet<u32> = match &self.clustered_tiers {
            Some(t) => t.iter().copied().collect(),
            None => (1..=tree.max_tier()).collect(),
        };
        if tiers.contains(&0) {
            return Err(Error::config("the root tier cannot be clustered"));
        }
        let alpha = match self.clustering {
            Clustering::Alpha(a) => a,
            Clustering::TargetClusters(t) => alpha_for_cluster_count(&tree, &tiers, t)
                .ok_or_else(|| Error::config(format!("no alpha yields exactly {t} clusters")))?,
        };
        let clusters = cluster_nodes(&tree, alpha, &tiers);
        let topology = Topology::new(tree, clusters)?;

        let sizes = match &self.files {
            FileSpec::Sizes(s) => s.clone(),
            FileSpec::Random { count, min, max } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(1);
                (0..*count).map(|_| rng.random_range(*min..=*max)).collect()
            }
        };
        let files: Vec<FileMeta> =
            sizes.iter().enumerate().map(|(i, &size)| FileMeta { id: FileId::from_index(i), size }).collect();

        let dependency = match &self.dependency {
            DependencySpec::Matrix(rows) => {
                if rows.len() != files.len() {
                    return Err(Error::Dimension {
                        expected: format!("{0}x{0} dependency matrix", files.len()),
                        actual: format!("{} rows", rows.len()),
                    });
                }
                DependencyMatrix::new(rows.clone())?
            }
            DependencySpec::Random { min_dependents, max_dependents } => {
                random_dependency(files.len(), *min_dependents, *max_dependents, self.seed)?
            }
        };
        Ok(GridState::new(topology, files, dependency))
    }
}

/// Generates a dependency matrix where each file has between `lo` and `hi`
/// strong dependents (weights in `[0.55, 0.95)`) and every other pair stays
/// below `0.45`.
pub fn random_dependency(n: usize, lo: usize, hi: usize, seed: u64) -> Result<DependencyMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let mut rows = vec![vec![0.0; n]; n];
    for (f, row) in rows.iter_mut().enumerate() {
        for (g, cell) in row.iter_mut().enumerate() {
            *cell = if f == g { 1.0 } else { rng.random_range(0.0..0.45) };
        }
        let k = rng.random_range(lo..=hi).min(n.saturating_sub(1));
        let others: Vec<usize> = (0..n).filter(|&g| g != f).collect();
        for i in sample(&mut rng, others.len(), k) {
            row[others[i]] = rng.random_range(0.55..0.95);
        }
    }
    DependencyMatrix::new(rows)
}
