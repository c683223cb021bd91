// SPDX-License-Identifier: Apache-2.0

//! Multi-tier grid tree, distance-threshold clustering and header election.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::NodeId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridNode {
    pub id: NodeId,
    pub tier: u32,
    pub parent: Option<NodeId>,
    pub capacity: u64,
    pub coord: [f64; 2],
}

/// How the tree is shaped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeShape {
    /// Children per node for each tier below the root.
    Fanouts(Vec<usize>),
    /// Node count for each tier below the root; parents are assigned in
    /// contiguous blocks so that siblings get adjacent ids.
    TierSizes(Vec<usize>),
    /// Explicit `(child, parent)` pairs over ids `0..n`, root 0.
    Edges(Vec<(u32, u32)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridTree {
    nodes: Vec<GridNode>,
    tier_count: u32,
}

impl GridTree {
    /// Builds a tree and assigns each node the capacity of its tier. Node
    /// coordinates start at the origin; see [`GridTree::layout_hierarchical`].
    pub fn build(shape: &TreeShape, tier_capacities: &[u64]) -> Result<Self> {
        let parents = match shape {
            TreeShape::Fanouts(fanouts) => {
                let mut sizes = Vec::with_capacity(fanouts.len());
                let mut width = 1usize;
                for &f in fanouts {
                    width = width
                        .checked_mul(f)
                        .ok_or_else(|| Error::Topology("tree too large".into()))?;
                    sizes.push(width);
                }
                parents_from_tier_sizes(&sizes)?
            }
            TreeShape::TierSizes(sizes) => parents_from_tier_sizes(sizes)?,
            TreeShape::Edges(edges) => parents_from_edges(edges)?,
        };
        Self::from_parents(&parents, tier_capacities)
    }

    fn from_parents(parents: &[Option<NodeId>], tier_capacities: &[u64]) -> Result<Self> {
        let n = parents.len();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (child, parent) in parents.iter().enumerate() {
            if let Some(p) = parent {
                children[p.index()].push(child);
            }
        }
        let mut tiers = vec![u32::MAX; n];
        tiers[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        let mut seen = 1usize;
        while let Some(v) = queue.pop_front() {
            for &c in &children[v] {
                if tiers[c] != u32::MAX {
                    return Err(Error::Topology(format!("node {c} reached twice")));
                }
                tiers[c] = tiers[v] + 1;
                seen += 1;
                queue.push_back(c);
            }
        }
        if seen != n {
            return Err(Error::Topology("edge list is disconnected or cyclic".into()));
        }
        let tier_count = tiers.iter().max().copied().unwrap_or(0) + 1;
        if tier_capacities.len() < tier_count as usize {
            return Err(Error::Topology(format!(
                "{} tier capacities given for a {tier_count}-tier tree",
                tier_capacities.len()
            )));
        }
        let nodes: Vec<GridNode> = (0..n)
            .map(|i| GridNode {
                id: NodeId(i as u32),
                tier: tiers[i],
                parent: parents[i],
                capacity: tier_capacities[tiers[i] as usize],
                coord: [0.0, 0.0],
            })
            .collect();
        let tree = GridTree { nodes, tier_count };
        tree.check_capacity_order()?;
        Ok(tree)
    }

    fn check_capacity_order(&self) -> Result<()> {
        for node in &self.nodes {
            if let Some(p) = node.parent {
                if self.nodes[p.index()].capacity < node.capacity {
                    return Err(Error::Topology(format!(
                        "node {} has more capacity than its parent {p}",
                        node.id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn tier_count(&self) -> u32 {
        self.tier_count
    }

    pub fn max_tier(&self) -> u32 {
        self.tier_count - 1
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&GridNode> {
        self.nodes.get(id.index()).ok_or(Error::UnknownNode(id))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    pub fn set_coordinates(&mut self, coords: &[[f64; 2]]) -> Result<()> {
        if coords.len() != self.nodes.len() {
            return Err(Error::Dimension {
                expected: format!("{} coordinates", self.nodes.len()),
                actual: coords.len().to_string(),
            });
        }
        for (node, c) in self.nodes.iter_mut().zip(coords) {
            node.coord = *c;
        }
        Ok(())
    }

    /// Places nodes in the plane so that subtrees stay geographically close:
    /// tier-1 nodes spread around a circle, and every deeper node lands at a
    /// seeded random offset from its parent that shrinks with depth.
    pub fn layout_hierarchical(&mut self, seed: u64) {
        const TOP_RADIUS: f64 = 1000.0;
        const SHRINK: f64 = 0.35;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tier1 = self.nodes.iter().filter(|n| n.tier == 1).count().max(1) as f64;
        let mut tier1_seen = 0f64;
        for i in 0..self.nodes.len() {
            let (tier, parent) = (self.nodes[i].tier, self.nodes[i].parent);
            let coord = match (tier, parent) {
                (0, _) | (_, None) => [0.0, 0.0],
                (1, Some(_)) => {
                    let jitter: f64 = rng.random_range(-0.2..0.2);
                    let theta = std::f64::consts::TAU * (tier1_seen + 0.5 + jitter) / tier1;
                    tier1_seen += 1.0;
                    [TOP_RADIUS * theta.cos(), TOP_RADIUS * theta.sin()]
                }
                (t, Some(p)) => {
                    let base = self.nodes[p.index()].coord;
                    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let r = TOP_RADIUS * SHRINK.powi(t as i32 - 1) * rng.random_range(0.5..1.0);
                    [base[0] + r * theta.cos(), base[1] + r * theta.sin()]
                }
            };
            self.nodes[i].coord = coord;
        }
    }

    /// The node itself followed by its ancestors, root excluded.
    pub fn path_to_root(&self, id: NodeId) -> Result<Vec<NodeId>> {
        let mut node = self.node(id)?;
        let mut path = Vec::with_capacity(node.tier as usize);
        while let Some(parent) = node.parent {
            path.push(node.id);
            node = &self.nodes[parent.index()];
        }
        Ok(path)
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        let (p, q) = (self.nodes[a.index()].coord, self.nodes[b.index()].coord);
        (p[0] - q[0]).hypot(p[1] - q[1])
    }
}

fn parents_from_tier_sizes(sizes: &[usize]) -> Result<Vec<Option<NodeId>>> {
    let mut parents = vec![None];
    let mut prev_start = 0usize;
    let mut prev_len = 1usize;
    for (t, &len) in sizes.iter().enumerate() {
        if len == 0 {
            return Err(Error::Topology(format!("tier {} is empty", t + 1)));
        }
        let start = parents.len();
        for j in 0..len {
            let parent = prev_start + j * prev_len / len;
            parents.push(Some(NodeId(parent as u32)));
        }
        prev_start = start;
        prev_len = len;
    }
    Ok(parents)
}

fn parents_from_edges(edges: &[(u32, u32)]) -> Result<Vec<Option<NodeId>>> {
    let n = edges.len() + 1;
    let mut parents: Vec<Option<NodeId>> = vec![None; n];
    for &(child, parent) in edges {
        let (c, p) = (child as usize, parent as usize);
        if c >= n || p >= n {
            return Err(Error::Topology(format!(
                "edge {child}<-{parent}: ids must be 0..{n} for {} edges",
                edges.len()
            )));
        }
        if c == 0 {
            return Err(Error::Topology("the root (id 0) cannot have a parent".into()));
        }
        if c == p {
            return Err(Error::Topology(format!("self loop at {child}")));
        }
        if parents[c].replace(NodeId(parent)).is_some() {
            return Err(Error::Topology(format!("node {child} has two parents")));
        }
    }
    Ok(parents)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    pub members: BTreeSet<NodeId>,
    pub header: NodeId,
}

/// Greedy single-pass clustering: in ascending id order every unassigned
/// node seeds a cluster and absorbs all unassigned nodes closer than
/// `alpha`. Only nodes whose tier is in `tiers` take part.
pub fn cluster_nodes(tree: &GridTree, alpha: f64, tiers: &BTreeSet<u32>) -> Vec<Cluster> {
    let eligible: Vec<NodeId> =
        tree.nodes().iter().filter(|n| tiers.contains(&n.tier)).map(|n| n.id).collect();
    let mut assigned = vec![false; eligible.len()];
    let mut clusters = Vec::new();
    for i in 0..eligible.len() {
        if assigned[i] {
            continue;
        }
        assigned[i] = true;
        let seed = eligible[i];
        let mut members = BTreeSet::from([seed]);
        for j in i + 1..eligible.len() {
            if !assigned[j] && tree.distance(seed, eligible[j]) < alpha {
                assigned[j] = true;
                members.insert(eligible[j]);
            }
        }
        let header = elect_header(members.iter().map(|&m| (m, tree.nodes[m.index()].capacity)))
            .expect("cluster has at least its seed");
        clusters.push(Cluster { id: clusters.len(), members, header });
    }
    clusters
}

/// Member with the largest capacity; ties go to the lowest id.
pub fn elect_header(members: impl IntoIterator<Item = (NodeId, u64)>) -> Option<NodeId> {
    members
        .into_iter()
        .max_by(|(a_id, a_cap), (b_id, b_cap)| a_cap.cmp(b_cap).then(b_id.cmp(a_id)))
        .map(|(id, _)| id)
}

/// Finds an `alpha` for which [`cluster_nodes`] yields exactly `target`
/// clusters, trying midpoints between consecutive pairwise distances.
pub fn alpha_for_cluster_count(tree: &GridTree, tiers: &BTreeSet<u32>, target: usize) -> Option<f64> {
    let eligible: Vec<NodeId> =
        tree.nodes().iter().filter(|n| tiers.contains(&n.tier)).map(|n| n.id).collect();
    let mut dists = Vec::new();
    for (i, &a) in eligible.iter().enumerate() {
        for &b in &eligible[i + 1..] {
            dists.push(tree.distance(a, b));
        }
    }
    dists.sort_by(f64::total_cmp);
    dists.dedup();
    let mut candidates = Vec::with_capacity(dists.len() + 1);
    candidates.push(dists.first().map_or(1.0, |d| d / 2.0));
    for w in dists.windows(2) {
        candidates.push((w[0] + w[1]) / 2.0);
    }
    if let Some(last) = dists.last() {
        candidates.push(last + 1.0);
    }
    let count = |alpha: f64| cluster_nodes(tree, alpha, tiers).len();

    // Counts mostly shrink as alpha grows; bisect first, scan if that misses.
    let (mut lo, mut hi) = (0usize, candidates.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        let c = count(candidates[mid]);
        if c == target {
            return Some(candidates[mid]);
        }
        if c > target {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    candidates.into_iter().find(|&a| count(a) == target)
}

/// Tree plus its clustering, with per-node header lookup.
#[derive(Clone, Debug)]
pub struct Topology {
    tree: GridTree,
    clusters: Vec<Cluster>,
    header_of: Vec<Option<NodeId>>,
    cluster_of: Vec<Option<usize>>,
    headers: Vec<NodeId>,
    header_capacity: BTreeMap<NodeId, u64>,
}

impl Topology {
    pub fn new(tree: GridTree, clusters: Vec<Cluster>) -> Result<Self> {
        let mut header_of = vec![None; tree.len()];
        let mut cluster_of = vec![None; tree.len()];
        let mut header_capacity = BTreeMap::new();
        for (ci, c) in clusters.iter().enumerate() {
            if !c.members.contains(&c.header) {
                return Err(Error::Topology(format!("cluster {} header is not a member", c.id)));
            }
            let mut cap = 0u64;
            for &m in &c.members {
                if !tree.contains(m) {
                    return Err(Error::UnknownNode(m));
                }
                if m == NodeId::ROOT {
                    return Err(Error::Topology("the root cannot join a cluster".into()));
                }
                if header_of[m.index()].replace(c.header).is_some() {
                    return Err(Error::Topology(format!("node {m} is in two clusters")));
                }
                cluster_of[m.index()] = Some(ci);
                cap += tree.nodes[m.index()].capacity;
            }
            header_capacity.insert(c.header, cap);
        }
        let mut headers: Vec<NodeId> = clusters.iter().map(|c| c.header).collect();
        headers.sort();
        Ok(Topology { tree, clusters, header_of, cluster_of, headers, header_capacity })
    }

    pub fn tree(&self) -> &GridTree {
        &self.tree
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    /// Cluster headers in ascending id order.
    pub fn headers(&self) -> &[NodeId] {
        &self.headers
    }

    /// Header of the cluster `node` belongs to; `None` for the root and for
    /// unclustered nodes.
    pub fn header_of(&self, node: NodeId) -> Option<NodeId> {
        self.header_of.get(node.index()).copied().flatten()
    }

    pub fn cluster_of(&self, node: NodeId) -> Option<&Cluster> {
        self.cluster_of.get(node.index()).copied().flatten().map(|i| &self.clusters[i])
    }

    pub fn is_header(&self, node: NodeId) -> bool {
        self.header_of(node) == Some(node)
    }

    /// Aggregate member capacity of a header's cluster.
    pub fn header_capacity(&self, header: NodeId) -> u64 {
        self.header_capacity.get(&header).copied().unwrap_or(0)
    }

    pub fn max_header_capacity(&self) -> u64 {
        self.header_capacity.values().copied().max().unwrap_or(0)
    }

    pub fn tier(&self, node: NodeId) -> u32 {
        self.tree.nodes[node.index()].tier
    }

    pub fn path_to_root(&self, node: NodeId) -> Result<Vec<NodeId>> {
        self.tree.path_to_root(node)
    }

    /// Flat text dump: one line per node.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::from("# node parent tier capacity x y header\n");
        for n in self.tree.nodes() {
            let parent = n.parent.map_or("-".to_string(), |p| p.to_string());
            let header = self.header_of(n.id).map_or("-".to_string(), |h| h.to_string());
            let _ = writeln!(
                out,
                "{} {} {} {} {:.3} {:.3} {}",
                n.id, parent, n.tier, n.capacity, n.coord[0], n.coord[1], header
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn example_tree() -> GridTree {
        GridTree::build(
            &TreeShape::Edges(vec![(1, 0), (2, 0), (3, 1), (4, 1), (5, 2), (6, 2)]),
            &[1000, 100, 100],
        )
        .unwrap()
    }

    fn line_tree(xs: &[f64]) -> GridTree {
        let mut tree = GridTree::build(&TreeShape::Fanouts(vec![xs.len()]), &[10, 10]).unwrap();
        let mut coords = vec![[0.0, 0.0]];
        coords.extend(xs.iter().map(|&x| [x, 0.0]));
        tree.set_coordinates(&coords).unwrap();
        tree
    }

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn fanouts_build_bfs_tree() {
        let tree = GridTree::build(&TreeShape::Fanouts(vec![2, 2]), &[100, 50, 10]).unwrap();
        assert_eq!(tree.len(), 7);
        assert_eq!(tree.tier_count(), 3);
        assert_eq!(tree.nodes()[0].parent, None);
        assert_eq!(tree.nodes()[0].capacity, 100);
        assert_eq!(tree.nodes()[3].parent, Some(NodeId(1)));
        assert_eq!(tree.nodes()[4].parent, Some(NodeId(1)));
        assert_eq!(tree.nodes()[5].parent, Some(NodeId(2)));
        assert_eq!(tree.nodes()[6].capacity, 10);
    }

    #[test]
    fn empty_fanouts_give_root_only() {
        let tree = GridTree::build(&TreeShape::Fanouts(vec![]), &[5]).unwrap();
        assert_eq!(tree.len(), 1);
        assert_eq!(tree.tier_count(), 1);
        assert_eq!(tree.path_to_root(NodeId(0)).unwrap(), vec![]);
    }

    #[test]
    fn tier_sizes_split_parents_evenly() {
        let tree = GridTree::build(&TreeShape::TierSizes(vec![2, 5]), &[9, 9, 9]).unwrap();
        let parents: Vec<_> = tree.nodes()[3..].iter().map(|n| n.parent.unwrap().0).collect();
        assert_eq!(parents, vec![1, 1, 1, 2, 2]);
    }

    #[test]
    fn example_fixture_paths() {
        let tree = example_tree();
        assert_eq!(tree.nodes()[6].parent, Some(NodeId(2)));
        assert_eq!(tree.path_to_root(NodeId(6)).unwrap(), ids(&[6, 2]));
        assert_eq!(tree.path_to_root(NodeId(3)).unwrap(), ids(&[3, 1]));
        assert_eq!(tree.path_to_root(NodeId(0)).unwrap(), vec![]);
        assert!(matches!(tree.path_to_root(NodeId(9)), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn bad_edge_lists_are_rejected() {
        // cycle 1 <-> 2, detached from the root
        let cyclic = TreeShape::Edges(vec![(1, 2), (2, 1), (3, 0)]);
        assert!(GridTree::build(&cyclic, &[1, 1, 1, 1]).is_err());
        let two_parents = TreeShape::Edges(vec![(1, 0), (1, 0)]);
        assert!(GridTree::build(&two_parents, &[1, 1]).is_err());
        let out_of_range = TreeShape::Edges(vec![(5, 0)]);
        assert!(GridTree::build(&out_of_range, &[1, 1]).is_err());
        let root_child = TreeShape::Edges(vec![(0, 1)]);
        assert!(GridTree::build(&root_child, &[1, 1]).is_err());
    }

    #[test]
    fn capacity_must_not_grow_downwards() {
        assert!(GridTree::build(&TreeShape::Fanouts(vec![2]), &[10, 20]).is_err());
    }

    #[test]
    fn clustering_limit_cases() {
        let tree = line_tree(&[0.0, 1.0, 5.0, 6.0]);
        let tiers = BTreeSet::from([1]);
        assert_eq!(cluster_nodes(&tree, 100.0, &tiers).len(), 1);
        assert_eq!(cluster_nodes(&tree, 0.5, &tiers).len(), 4);
    }

    #[test]
    fn clustering_on_a_line() {
        let tree = line_tree(&[0.0, 1.0, 5.0, 6.0]);
        let clusters = cluster_nodes(&tree, 2.0, &BTreeSet::from([1]));
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].members, BTreeSet::from([NodeId(1), NodeId(2)]));
        assert_eq!(clusters[1].members, BTreeSet::from([NodeId(3), NodeId(4)]));
        assert_eq!(clusters[0].header, NodeId(1));
    }

    #[test]
    fn header_election() {
        let pick = |v: &[(u32, u64)]| elect_header(v.iter().map(|&(i, c)| (NodeId(i), c))).unwrap();
        assert_eq!(pick(&[(3, 10), (7, 40), (9, 40)]), NodeId(7));
        assert_eq!(pick(&[(5, 1)]), NodeId(5));
        assert_eq!(pick(&[(4, 2), (5, 2), (6, 2)]), NodeId(4));
        assert_eq!(elect_header(std::iter::empty()), None);
    }

    #[test]
    fn topology_aggregates_capacity() {
        let tree = line_tree(&[0.0, 1.0, 5.0, 6.0]);
        let clusters = cluster_nodes(&tree, 2.0, &BTreeSet::from([1]));
        let topo = Topology::new(tree, clusters).unwrap();
        assert_eq!(topo.headers(), &ids(&[1, 3])[..]);
        assert_eq!(topo.header_capacity(NodeId(1)), 20);
        assert_eq!(topo.header_of(NodeId(4)), Some(NodeId(3)));
        assert_eq!(topo.header_of(NodeId(0)), None);
        assert!(topo.to_edge_list().lines().count() == 6);
    }

    #[test]
    fn alpha_search_hits_target() {
        let mut tree =
            GridTree::build(&TreeShape::TierSizes(vec![3, 9, 27]), &[100, 50, 20, 10]).unwrap();
        tree.layout_hierarchical(11);
        let tiers = BTreeSet::from([1, 2, 3]);
        let alpha = alpha_for_cluster_count(&tree, &tiers, 6).unwrap();
        assert_eq!(cluster_nodes(&tree, alpha, &tiers).len(), 6);
    }

    fn random_tree(seed: u64, n: usize) -> GridTree {
        let mut tree = GridTree::build(&TreeShape::TierSizes(vec![n]), &[1, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coords = vec![[0.0, 0.0]];
        coords.extend((0..n).map(|_| [rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)]));
        tree.set_coordinates(&coords).unwrap();
        tree
    }

    proptest! {
        #[test]
        fn clusters_partition_the_selected_tiers(seed in 0u64..500, alpha in 0.1f64..8.0) {
            let tree = random_tree(seed, 20);
            let tiers = BTreeSet::from([1]);
            let clusters = cluster_nodes(&tree, alpha, &tiers);
            let mut seen = BTreeSet::new();
            for c in &clusters {
                prop_assert!(c.members.contains(&c.header));
                let best = c.members.iter().map(|m| tree.nodes()[m.index()].capacity).max().unwrap();
                prop_assert_eq!(tree.nodes()[c.header.index()].capacity, best);
                for &m in &c.members {
                    prop_assert!(seen.insert(m));
                }
            }
            prop_assert_eq!(seen.len(), 20);
            prop_assert_eq!(cluster_nodes(&tree, alpha, &tiers), clusters);
        }

        #[test]
        fn path_length_equals_tier(node in 0u32..40) {
            let tree = GridTree::build(&TreeShape::TierSizes(vec![3, 9, 27]), &[4, 3, 2, 1]).unwrap();
            let path = tree.path_to_root(NodeId(node)).unwrap();
            prop_assert_eq!(path.len() as u32, tree.nodes()[node as usize].tier);
            for w in path.windows(2) {
                prop_assert_eq!(tree.nodes()[w[0].index()].parent, Some(w[1]));
            }
        }
    }
}
