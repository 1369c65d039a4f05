//! The unpruned empirical cluster tree.
//!
//! Vertices enter in descending density order (ties by ascending index).
//! A vertex with no previously inserted neighbor opens a new leaf; a vertex
//! adjacent to several existing components joins them through a chain of
//! binary merge nodes, all at the vertex's own density. The connected
//! components of the subgraph induced on `{i : f_n(X_i) >= lambda}` are then
//! the nodes alive at `lambda`: a node is alive when its birth level is at
//! least `lambda` and its parent's birth level (if any) is below it.

use serde::{Deserialize, Serialize};

use crate::graph::LevelGraph;
use crate::union_find::UnionFind;

/// A partition of vertex indices. Blocks are sorted ascending and ordered by
/// their smallest element, so equal partitions compare equal.
pub type Partition = Vec<Vec<usize>>;

/// Brings an arbitrary partition into the canonical form used by [`Partition`].
pub fn canonical(mut blocks: Partition) -> Partition {
    blocks.retain(|b| !b.is_empty());
    for block in &mut blocks {
        block.sort_unstable();
    }
    blocks.sort_unstable_by_key(|b| b[0]);
    blocks
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterNode {
    /// Highest level at which the cluster exists: the peak density for a
    /// leaf, the merge level for an internal node.
    pub birth: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Vertices in the subtree rooted here.
    pub size: usize,
    /// Leaf with the highest peak below this node (ties: smaller id).
    pub elder_leaf: usize,
}

/// One union of two distinct components.
#[derive(Clone, Debug, PartialEq)]
pub struct MergeEvent {
    /// Cluster nodes that existed right before the union.
    pub left: usize,
    pub right: usize,
    /// Node created by the union.
    pub node: usize,
    /// Density of the vertex whose insertion caused the union.
    pub level: f64,
    pub vertex: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MergeTree {
    levels: Vec<f64>,
    order: Vec<usize>,
    nodes: Vec<ClusterNode>,
    vertex_node: Vec<usize>,
    merges: Vec<MergeEvent>,
    roots: Vec<usize>,
    depth: Vec<usize>,
}

/// Vertex order for the sweep: descending level, ties by ascending index.
pub(crate) fn sweep_order(levels: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| levels[b].total_cmp(&levels[a]).then(a.cmp(&b)));
    order
}

impl MergeTree {
    pub fn build(graph: &LevelGraph) -> Self {
        let n = graph.len();
        let levels = graph.densities().to_vec();
        let order = sweep_order(&levels);

        let mut nodes: Vec<ClusterNode> = Vec::new();
        let mut merges = Vec::new();
        let mut vertex_node = vec![usize::MAX; n];
        let mut inserted = vec![false; n];
        let mut uf = UnionFind::new(n);
        // Cluster node currently represented by each union-find root.
        let mut top = vec![usize::MAX; n];

        for &v in &order {
            let level = levels[v];
            inserted[v] = true;
            let mut current: Option<usize> = None;
            for &u in graph.neighbors(v) {
                if !inserted[u] {
                    continue;
                }
                let ru = uf.find(u);
                match current {
                    None => {
                        let cluster = top[ru];
                        let root = uf.union(v, u);
                        top[root] = cluster;
                        current = Some(cluster);
                    }
                    Some(cluster) => {
                        if uf.find(v) == ru {
                            continue;
                        }
                        let other = top[ru];
                        let id = nodes.len();
                        nodes.push(ClusterNode {
                            birth: level,
                            parent: None,
                            children: vec![cluster, other],
                            size: 0,
                            elder_leaf: usize::MAX,
                        });
                        nodes[cluster].parent = Some(id);
                        nodes[other].parent = Some(id);
                        merges.push(MergeEvent {
                            left: cluster,
                            right: other,
                            node: id,
                            level,
                            vertex: v,
                        });
                        let root = uf.union(v, u);
                        top[root] = id;
                        current = Some(id);
                    }
                }
            }
            let cluster = current.unwrap_or_else(|| {
                let id = nodes.len();
                nodes.push(ClusterNode {
                    birth: level,
                    parent: None,
                    children: Vec::new(),
                    size: 0,
                    elder_leaf: id,
                });
                top[uf.find(v)] = id;
                id
            });
            vertex_node[v] = cluster;
        }

        finish_nodes(&mut nodes, &vertex_node);
        let roots = nodes
            .iter()
            .enumerate()
            .filter(|(_, node)| node.parent.is_none())
            .map(|(id, _)| id)
            .collect();
        let depth = node_depths(&nodes);

        Self {
            levels,
            order,
            nodes,
            vertex_node,
            merges,
            roots,
            depth,
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Level at which each vertex enters the filtration.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn max_level(&self) -> f64 {
        self.order
            .first()
            .map_or(f64::NEG_INFINITY, |&v| self.levels[v])
    }

    /// Vertices in the order they were inserted.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn nodes(&self) -> &[ClusterNode] {
        &self.nodes
    }

    pub fn merges(&self) -> &[MergeEvent] {
        &self.merges
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    /// The node a vertex was attached to when it entered.
    pub fn vertex_node(&self, v: usize) -> usize {
        self.vertex_node[v]
    }

    /// Components that appear at some level without containing a vertex from
    /// any higher level. Without density ties these are exactly the leaf
    /// nodes. Under ties, leaves merged at their own birth level collapse
    /// into the highest node of that level, which is returned instead.
    pub fn leaves(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, node)| {
                node.parent.is_none_or(|p| self.nodes[p].birth < node.birth)
                    && self.nodes[node.elder_leaf].birth == node.birth
            })
            .map(|(id, _)| id)
            .collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().len()
    }

    /// Components of the subgraph induced on vertices with level `>= lambda`.
    pub fn components_at_level(&self, lambda: f64) -> Partition {
        let nodes = &self.nodes;
        let mut alive = vec![usize::MAX; nodes.len()];
        let mut path = Vec::new();
        let mut resolve = |start: usize| -> usize {
            let mut id = start;
            while alive[id] == usize::MAX {
                path.push(id);
                match nodes[id].parent {
                    Some(p) if nodes[p].birth >= lambda => id = p,
                    _ => {
                        alive[id] = id;
                        break;
                    }
                }
            }
            let found = alive[id];
            for step in path.drain(..) {
                alive[step] = found;
            }
            found
        };
        group_present(self.len(), |v| {
            (self.levels[v] >= lambda).then(|| resolve(self.vertex_node[v]))
        }, nodes.len())
    }

    /// Highest level at which `i` and `j` share a component; `None` when they
    /// lie in different components of the full graph.
    pub fn merge_level(&self, i: usize, j: usize) -> Option<f64> {
        if i == j {
            return Some(self.levels[i]);
        }
        let (mut a, mut b) = (self.vertex_node[i], self.vertex_node[j]);
        while self.depth[a] > self.depth[b] {
            a = self.nodes[a].parent?;
        }
        while self.depth[b] > self.depth[a] {
            b = self.nodes[b].parent?;
        }
        while a != b {
            a = self.nodes[a].parent?;
            b = self.nodes[b].parent?;
        }
        Some(self.levels[i].min(self.levels[j]).min(self.nodes[a].birth))
    }

    /// Serializable view of the tree.
    pub fn document(&self) -> TreeDocument {
        TreeDocument::from_nodes(
            None,
            &self.nodes,
            &self.roots,
            self.vertex_node.iter().map(|&c| self.nodes[c].elder_leaf).collect(),
            self.levels.clone(),
        )
    }
}

/// Groups present vertices by a cluster key in `0..key_space`; `key` returns
/// `None` for absent vertices.
pub(crate) fn group_present(
    n: usize,
    mut key: impl FnMut(usize) -> Option<usize>,
    key_space: usize,
) -> Partition {
    let mut block_of = vec![usize::MAX; key_space];
    let mut blocks: Partition = Vec::new();
    for v in 0..n {
        if let Some(k) = key(v) {
            if block_of[k] == usize::MAX {
                block_of[k] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[block_of[k]].push(v);
        }
    }
    blocks
}

/// Fills subtree sizes and elder leaves. Children always precede parents.
pub(crate) fn finish_nodes(nodes: &mut [ClusterNode], vertex_node: &[usize]) {
    for &c in vertex_node {
        nodes[c].size += 1;
    }
    for id in 0..nodes.len() {
        if !nodes[id].children.is_empty() {
            let children = nodes[id].children.clone();
            let mut size = nodes[id].size;
            let mut elder = nodes[children[0]].elder_leaf;
            for &c in &children {
                size += nodes[c].size;
                let candidate = nodes[c].elder_leaf;
                let (cb, eb) = (nodes[candidate].birth, nodes[elder].birth);
                if cb > eb || (cb == eb && candidate < elder) {
                    elder = candidate;
                }
            }
            nodes[id].size = size;
            nodes[id].elder_leaf = elder;
        }
    }
}

pub(crate) fn node_depths(nodes: &[ClusterNode]) -> Vec<usize> {
    let mut depth = vec![0; nodes.len()];
    for id in (0..nodes.len()).rev() {
        if let Some(p) = nodes[id].parent {
            depth[id] = depth[p] + 1;
        }
    }
    depth
}

/// JSON form shared by unpruned and pruned trees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDocument {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon_tilde: Option<f64>,
    pub nodes: Vec<NodeRecord>,
    pub roots: Vec<usize>,
    /// For every vertex, the leaf its cluster descends from at the moment it
    /// entered (the leaf with the highest peak).
    pub vertex_leaf: Vec<usize>,
    pub vertex_level: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub birth_level: f64,
    /// Level at which the node joins its parent; `null` for roots.
    pub merge_level: Option<f64>,
    pub children: Vec<usize>,
    pub member_count: usize,
}

impl TreeDocument {
    pub(crate) fn from_nodes(
        epsilon_tilde: Option<f64>,
        nodes: &[ClusterNode],
        roots: &[usize],
        vertex_leaf: Vec<usize>,
        vertex_level: Vec<f64>,
    ) -> Self {
        let records = nodes
            .iter()
            .enumerate()
            .map(|(id, node)| NodeRecord {
                id,
                birth_level: node.birth,
                merge_level: node.parent.map(|p| nodes[p].birth),
                children: node.children.clone(),
                member_count: node.size,
            })
            .collect();
        Self {
            epsilon_tilde,
            nodes: records,
            roots: roots.to_vec(),
            vertex_leaf,
            vertex_level,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;

    fn path_tree() -> MergeTree {
        let g = LevelGraph::from_edges(vec![3.0, 1.0, 2.0], &[(0, 1), (1, 2)], GraphKind::Knn, 1.0)
            .unwrap();
        MergeTree::build(&g)
    }

    #[test]
    fn path_graph_single_merge() {
        let t = path_tree();
        assert_eq!(t.order(), &[0, 2, 1]);
        assert_eq!(t.merges().len(), 1);
        assert_eq!(t.merges()[0].level, 1.0);
        assert_eq!(t.merges()[0].vertex, 1);
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(t.roots().len(), 1);
        assert_eq!(t.merge_level(0, 2), Some(1.0));
        assert_eq!(t.merge_level(0, 0), Some(3.0));
        assert_eq!(t.merge_level(2, 1), Some(1.0));
        assert_eq!(t.components_at_level(2.0), vec![vec![0], vec![2]]);
        assert_eq!(t.components_at_level(1.0), vec![vec![0, 1, 2]]);
        assert_eq!(t.components_at_level(0.0), vec![vec![0, 1, 2]]);
        assert!(t.components_at_level(3.5).is_empty());
        assert_eq!(t.components_at_level(2.5), vec![vec![0]]);
    }

    #[test]
    fn edgeless_graph() {
        let g = LevelGraph::from_edges(vec![1.0, 2.0, 3.0], &[], GraphKind::Knn, 1.0).unwrap();
        let t = MergeTree::build(&g);
        assert!(t.merges().is_empty());
        assert_eq!(t.roots().len(), 3);
        assert_eq!(t.leaf_count(), 3);
        assert_eq!(t.merge_level(0, 1), None);
        assert_eq!(t.components_at_level(0.0), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn three_way_merge_is_a_chain() {
        // Star: center 0 with low density joins three peaks.
        let g = LevelGraph::from_edges(
            vec![0.5, 3.0, 2.0, 1.0],
            &[(0, 1), (0, 2), (0, 3)],
            GraphKind::Knn,
            1.0,
        )
        .unwrap();
        let t = MergeTree::build(&g);
        assert_eq!(t.merges().len(), 2);
        assert_eq!(t.leaf_count(), 3);
        assert_eq!(t.roots().len(), 1);
        let root = t.roots()[0];
        assert_eq!(t.nodes()[root].size, 4);
        assert_eq!(t.merge_level(1, 3), Some(0.5));
        assert_eq!(t.components_at_level(1.0), vec![vec![1], vec![2], vec![3]]);
        // Elder rule: the bridge vertex 0 is attributed to vertex 1's peak.
        let doc = t.document();
        let leaf = |v| t.vertex_node(v);
        assert_eq!(doc.vertex_leaf, vec![leaf(1), leaf(1), leaf(2), leaf(3)]);
    }

    #[test]
    fn tied_levels_leave_no_live_ghost() {
        // 0 and 1 share a level; 1 bridges 0 to the higher peak 2.
        let g = LevelGraph::from_edges(vec![1.0, 1.0, 2.0], &[(1, 2), (0, 1)], GraphKind::Knn, 1.0)
            .unwrap();
        let t = MergeTree::build(&g);
        // Vertex 0 enters first (lower index) without inserted neighbors.
        assert_eq!(t.nodes().iter().filter(|n| n.children.is_empty()).count(), 2);
        assert_eq!(t.leaf_count(), 1);
        assert_eq!(t.components_at_level(1.0), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn tied_top_plateau_is_one_leaf() {
        // 0 and 1 enter apart and are bridged by 2 at the same level.
        let g = LevelGraph::from_edges(vec![2.0, 2.0, 2.0, 1.0], &[(0, 2), (1, 2), (2, 3)], GraphKind::Knn, 1.0)
            .unwrap();
        let t = MergeTree::build(&g);
        assert_eq!(t.nodes().iter().filter(|n| n.children.is_empty()).count(), 2);
        assert_eq!(t.leaf_count(), 1);
        let top = t.leaves()[0];
        assert_eq!(t.nodes()[top].birth, 2.0);
        assert_eq!(t.components_at_level(2.0), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn document_roundtrip() {
        let t = path_tree();
        let doc = t.document();
        let text = serde_json::to_string(&doc).unwrap();
        assert!(!text.contains("epsilon_tilde"));
        let back: TreeDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        let root = &doc.nodes[doc.roots[0]];
        assert_eq!(root.member_count, 3);
        assert_eq!(root.merge_level, None);
        assert_eq!(root.birth_level, 1.0);
    }
}
