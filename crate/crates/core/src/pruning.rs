//! Lookup-based pruning of spurious branches.
//!
//! At a level `lambda > eps`, two vertices present at `lambda` are put in the
//! same pruned component when they share a component of the unpruned
//! subgraph at `lambda - eps`. At `lambda <= eps` every present vertex is put
//! in one component. The connect-all branch is only taken for `eps > 0`, so
//! that `eps = 0` reproduces the unpruned tree at every level including 0.
//!
//! [`prune`] builds the pruned tree in one sweep over the unpruned tree: each
//! unpruned merge fires once its level reaches `lambda - eps`, so merges are
//! lifted by `eps` and branches that live for less than `eps` are absorbed.
//! [`lookup_components`] applies the rule literally at a single level and is
//! kept as the reference the sweep is tested against.

use std::io::Write;

use crate::clustertree::{
    canonical, finish_nodes, group_present, ClusterNode, MergeTree, Partition, TreeDocument,
};
use crate::error::{Error, Result};
use crate::union_find::UnionFind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SweepEvent {
    Vertex(usize),
    /// Index into the unpruned tree's merge list.
    Merge(usize),
    /// Connect-all at `eps`.
    Fuse,
}

/// A leaf of the pruned tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub node: usize,
    pub birth_level: f64,
    /// Vertices that entered while the leaf was a component of its own.
    pub members: Vec<usize>,
}

/// Pruned cluster tree over a borrowed unpruned tree.
#[derive(Clone, Debug)]
pub struct PrunedTree<'a> {
    base: &'a MergeTree,
    epsilon_tilde: f64,
    events: Vec<SweepEvent>,
    nodes: Vec<ClusterNode>,
    /// Position in `events` at which each node was created.
    created_at: Vec<usize>,
    vertex_node: Vec<usize>,
    roots: Vec<usize>,
}

fn check_epsilon(epsilon_tilde: f64) -> Result<()> {
    if epsilon_tilde >= 0.0 && epsilon_tilde.is_finite() {
        Ok(())
    } else {
        Err(Error::parameter(format!(
            "pruning parameter must be finite and nonnegative, got {epsilon_tilde}"
        )))
    }
}

struct Sweep<'a> {
    base: &'a MergeTree,
    epsilon_tilde: f64,
    uf: UnionFind,
    /// Pruned cluster owning each union-find root, if any vertex of the set
    /// has entered.
    cluster: Vec<usize>,
    events: Vec<SweepEvent>,
    nodes: Vec<ClusterNode>,
    created_at: Vec<usize>,
    /// Level of the most recently inserted vertex.
    floor: f64,
}

impl Sweep<'_> {
    fn new_node(&mut self, birth: f64, children: Vec<usize>) -> usize {
        let id = self.nodes.len();
        for &c in &children {
            self.nodes[c].parent = Some(id);
        }
        self.nodes.push(ClusterNode {
            birth,
            parent: None,
            elder_leaf: if children.is_empty() { id } else { usize::MAX },
            children,
            size: 0,
        });
        self.created_at.push(self.events.len() - 1);
        id
    }

    fn merge(&mut self, index: usize) {
        self.events.push(SweepEvent::Merge(index));
        let event = &self.base.merges()[index];
        let (left, right, node, level) = (event.left, event.right, event.node, event.level);
        let (rl, rr) = (self.uf.find(left), self.uf.find(right));
        let (cl, cr) = (self.cluster[rl], self.cluster[rr]);
        let root = self.uf.union(rl, rr);
        let root = self.uf.union(root, node);
        if rl == rr {
            return;
        }
        self.cluster[root] = match (cl != usize::MAX, cr != usize::MAX) {
            (true, true) => {
                let birth = (level + self.epsilon_tilde).min(self.floor);
                self.new_node(birth, vec![cl, cr])
            }
            (true, false) => cl,
            (false, _) => cr,
        };
    }

    fn fuse(&mut self) {
        self.events.push(SweepEvent::Fuse);
        let count = self.base.nodes().len();
        let mut present: Vec<usize> = Vec::new();
        for id in 0..count {
            let r = self.uf.find(id);
            if self.cluster[r] != usize::MAX {
                present.push(self.cluster[r]);
                self.cluster[r] = usize::MAX;
            }
        }
        present.sort_unstable();
        present.dedup();
        let mut root = 0;
        for id in 1..count {
            root = self.uf.union(root, id);
        }
        if count == 0 {
            return;
        }
        let root = self.uf.find(root);
        self.cluster[root] = match present.len() {
            0 => usize::MAX,
            1 => present[0],
            _ => {
                let birth = self.epsilon_tilde.min(self.floor);
                self.new_node(birth, present)
            }
        };
    }
}

/// Prunes `tree` with parameter `epsilon_tilde >= 0`.
pub fn prune(tree: &MergeTree, epsilon_tilde: f64) -> Result<PrunedTree<'_>> {
    check_epsilon(epsilon_tilde)?;
    let levels = tree.levels();
    let merges = tree.merges();
    let mut sweep = Sweep {
        base: tree,
        epsilon_tilde,
        uf: UnionFind::new(tree.nodes().len()),
        cluster: vec![usize::MAX; tree.nodes().len()],
        events: Vec::with_capacity(tree.len() + merges.len() + 1),
        nodes: Vec::new(),
        created_at: Vec::new(),
        floor: f64::INFINITY,
    };
    let fuse_enabled = epsilon_tilde > 0.0;
    let mut fused = false;
    let mut next_merge = 0;
    let mut vertex_node = vec![usize::MAX; tree.len()];

    for &v in tree.order() {
        let level = levels[v];
        let connect_all = fuse_enabled && level <= epsilon_tilde;
        while next_merge < merges.len()
            && (connect_all || merges[next_merge].level >= level - epsilon_tilde)
        {
            sweep.merge(next_merge);
            next_merge += 1;
        }
        if connect_all && !fused {
            sweep.fuse();
            fused = true;
        }

        sweep.events.push(SweepEvent::Vertex(v));
        sweep.floor = level;
        let root = sweep.uf.find(tree.vertex_node(v));
        let cluster = match sweep.cluster[root] {
            usize::MAX => {
                let id = sweep.new_node(level, Vec::new());
                sweep.cluster[root] = id;
                id
            }
            c => c,
        };
        vertex_node[v] = cluster;
    }
    while next_merge < merges.len() {
        sweep.merge(next_merge);
        next_merge += 1;
    }
    if fuse_enabled && !fused {
        sweep.fuse();
    }

    let Sweep {
        events,
        mut nodes,
        created_at,
        ..
    } = sweep;
    finish_nodes(&mut nodes, &vertex_node);
    let roots = nodes
        .iter()
        .enumerate()
        .filter(|(_, node)| node.parent.is_none())
        .map(|(id, _)| id)
        .collect();

    Ok(PrunedTree {
        base: tree,
        epsilon_tilde,
        events,
        nodes,
        created_at,
        vertex_node,
        roots,
    })
}

impl<'a> PrunedTree<'a> {
    pub fn base(&self) -> &'a MergeTree {
        self.base
    }

    pub fn epsilon_tilde(&self) -> f64 {
        self.epsilon_tilde
    }

    /// Pruned cluster nodes; internal node levels are the lifted merge levels.
    pub fn nodes(&self) -> &[ClusterNode] {
        &self.nodes
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn vertex_node(&self, v: usize) -> usize {
        self.vertex_node[v]
    }

    fn active(&self, event: SweepEvent, lambda: f64) -> bool {
        let eps = self.epsilon_tilde;
        let connect_all = eps > 0.0 && lambda <= eps;
        match event {
            SweepEvent::Vertex(v) => self.base.levels()[v] >= lambda,
            SweepEvent::Merge(m) => connect_all || self.base.merges()[m].level >= lambda - eps,
            SweepEvent::Fuse => connect_all,
        }
    }

    /// Pruned components among vertices with level `>= lambda`.
    pub fn components_at_level(&self, lambda: f64) -> Partition {
        let levels = self.base.levels();
        if self.base.max_level() < lambda || lambda.is_nan() {
            return Vec::new();
        }
        // Events active at `lambda` form a prefix of the sweep.
        let prefix = self.events.partition_point(|&e| self.active(e, lambda));
        let nodes = &self.nodes;
        let created_at = &self.created_at;
        let mut alive = vec![usize::MAX; nodes.len()];
        let mut path = Vec::new();
        let mut resolve = |start: usize| -> usize {
            let mut id = start;
            while alive[id] == usize::MAX {
                path.push(id);
                match nodes[id].parent {
                    Some(p) if created_at[p] < prefix => id = p,
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
        group_present(
            levels.len(),
            |v| (levels[v] >= lambda).then(|| resolve(self.vertex_node[v])),
            nodes.len(),
        )
    }

    pub fn leaves(&self) -> Vec<Leaf> {
        let mut leaves: Vec<Leaf> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, node)| node.children.is_empty())
            .map(|(id, node)| Leaf {
                node: id,
                birth_level: node.birth,
                members: Vec::new(),
            })
            .collect();
        let mut slot = vec![usize::MAX; self.nodes.len()];
        for (i, leaf) in leaves.iter().enumerate() {
            slot[leaf.node] = i;
        }
        for (v, &c) in self.vertex_node.iter().enumerate() {
            if slot[c] != usize::MAX {
                leaves[slot[c]].members.push(v);
            }
        }
        leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.children.is_empty()).count()
    }

    pub fn document(&self) -> TreeDocument {
        TreeDocument::from_nodes(
            Some(self.epsilon_tilde),
            &self.nodes,
            &self.roots,
            self.vertex_node
                .iter()
                .map(|&c| self.nodes[c].elder_leaf)
                .collect(),
            self.base.levels().to_vec(),
        )
    }

    /// Writes `leaf_id,birth_level,size_at_birth` rows with a header.
    pub fn write_leaf_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["leaf_id", "birth_level", "size_at_birth"])?;
        for leaf in self.leaves() {
            writer.write_record([
                leaf.node.to_string(),
                leaf.birth_level.to_string(),
                leaf.members.len().to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Pruned components at `lambda` by direct lookup in the unpruned tree.
pub fn lookup_components(tree: &MergeTree, lambda: f64, epsilon_tilde: f64) -> Result<Partition> {
    check_epsilon(epsilon_tilde)?;
    let levels = tree.levels();
    if epsilon_tilde > 0.0 && lambda <= epsilon_tilde {
        let present: Vec<usize> = (0..tree.len()).filter(|&v| levels[v] >= lambda).collect();
        return Ok(if present.is_empty() {
            Vec::new()
        } else {
            vec![present]
        });
    }
    let lower = tree.components_at_level(lambda - epsilon_tilde);
    Ok(canonical(
        lower
            .into_iter()
            .map(|block| block.into_iter().filter(|&v| levels[v] >= lambda).collect())
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphKind, LevelGraph};

    fn tree(levels: Vec<f64>, edges: &[(usize, usize)]) -> MergeTree {
        MergeTree::build(&LevelGraph::from_edges(levels, edges, GraphKind::Knn, 1.0).unwrap())
    }

    #[test]
    fn path_example() {
        let t = tree(vec![3.0, 1.0, 2.0], &[(0, 1), (1, 2)]);
        let wide = prune(&t, 1.5).unwrap();
        assert_eq!(wide.components_at_level(2.0), vec![vec![0, 2]]);
        assert_eq!(wide.leaf_count(), 1);
        let narrow = prune(&t, 0.5).unwrap();
        assert_eq!(narrow.components_at_level(2.0), vec![vec![0], vec![2]]);
        assert_eq!(narrow.leaf_count(), 2);
        // Merge at 1 lifted to 1.5.
        let root = narrow.roots()[0];
        assert_eq!(narrow.nodes()[root].birth, 1.5);
        assert_eq!(narrow.components_at_level(1.5), vec![vec![0, 2]]);
        assert_eq!(narrow.components_at_level(1.6), vec![vec![0], vec![2]]);
    }

    #[test]
    fn zero_is_identity() {
        let t = tree(vec![3.0, 1.0, 2.0], &[(0, 1), (1, 2)]);
        let p = prune(&t, 0.0).unwrap();
        for lambda in [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5] {
            assert_eq!(p.components_at_level(lambda), t.components_at_level(lambda));
        }
        assert_eq!(p.leaf_count(), t.leaf_count());
    }

    #[test]
    fn huge_epsilon_fuses_disconnected_components() {
        let t = tree(vec![1.0, 2.0, 3.0], &[]);
        let p = prune(&t, 5.0).unwrap();
        assert_eq!(p.leaf_count(), 1);
        assert_eq!(p.components_at_level(1.0), vec![vec![0, 1, 2]]);
        assert_eq!(p.components_at_level(2.5), vec![vec![2]]);
        assert!(p.components_at_level(3.5).is_empty());
        assert_eq!(p.roots().len(), 1);
    }

    #[test]
    fn fuse_below_all_levels_joins_components() {
        let t = tree(vec![1.0, 2.0, 3.0], &[]);
        let p = prune(&t, 0.5).unwrap();
        assert_eq!(p.leaf_count(), 3);
        assert_eq!(p.roots().len(), 1);
        assert_eq!(p.nodes()[p.roots()[0]].birth, 0.5);
        assert_eq!(p.components_at_level(0.5), vec![vec![0, 1, 2]]);
        assert_eq!(p.components_at_level(0.75), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn edgeless_unpruned_leaves() {
        let t = tree(vec![1.0, 2.0, 3.0], &[]);
        let p = prune(&t, 0.0).unwrap();
        let leaves = p.leaves();
        assert_eq!(leaves.len(), 3);
        assert!(leaves.iter().all(|l| l.members.len() == 1));
    }

    #[test]
    fn lookup_reference_matches_sweep() {
        let t = tree(
            vec![5.0, 1.0, 4.0, 2.0, 4.5, 0.5],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 5)],
        );
        for eps in [0.0, 0.25, 0.5, 1.0, 2.0, 2.5, 3.0, 6.0] {
            let p = prune(&t, eps).unwrap();
            for lambda in [0.0, 0.5, 0.75, 1.0, 2.0, 2.5, 3.0, 4.0, 4.25, 4.5, 5.0, 6.0] {
                assert_eq!(
                    p.components_at_level(lambda),
                    lookup_components(&t, lambda, eps).unwrap(),
                    "eps {eps} lambda {lambda}"
                );
            }
        }
    }

    #[test]
    fn rejects_negative_epsilon() {
        let t = tree(vec![1.0], &[]);
        assert!(matches!(prune(&t, -0.1), Err(Error::Parameter(_))));
        assert!(prune(&t, f64::NAN).is_err());
        assert!(lookup_components(&t, 1.0, -1.0).is_err());
    }

    #[test]
    fn leaf_csv() {
        let t = tree(vec![3.0, 1.0, 2.0], &[(0, 1), (1, 2)]);
        let p = prune(&t, 0.5).unwrap();
        let mut buf = Vec::new();
        p.write_leaf_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "leaf_id,birth_level,size_at_birth\n0,3,1\n1,2,1\n");
    }

    #[test]
    fn document_carries_epsilon() {
        let t = tree(vec![3.0, 1.0, 2.0], &[(0, 1), (1, 2)]);
        let p = prune(&t, 0.5).unwrap();
        let doc = p.document();
        assert_eq!(doc.epsilon_tilde, Some(0.5));
        assert_eq!(doc.nodes.len(), 3);
        assert_eq!(doc.nodes[0].merge_level, Some(1.5));
    }
}
