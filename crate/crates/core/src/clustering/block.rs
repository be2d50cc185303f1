use super::tree::{is_admissible, ClusterTree};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum BlockKind {
    Admissible,
    Inadmissible,
    /// Child node ids, row-major over `sons(row) x sons(col)`.
    Subdivided(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct BlockNode {
    pub row: usize,
    pub col: usize,
    pub kind: BlockKind,
}

/// Partition of the index square into admissible and inadmissible leaves.
#[derive(Debug, Clone)]
pub struct BlockClusterTree {
    pub nodes: Vec<BlockNode>,
    pub eta: f64,
    /// Admissible partners of each row cluster.
    pub far: Vec<Vec<usize>>,
    /// Inadmissible (dense) partners of each row cluster.
    pub near: Vec<Vec<usize>>,
}

impl BlockClusterTree {
    pub fn root(&self) -> &BlockNode {
        &self.nodes[0]
    }

    pub fn admissible_leaves(&self) -> impl Iterator<Item = &BlockNode> {
        self.nodes.iter().filter(|b| b.kind == BlockKind::Admissible)
    }

    pub fn inadmissible_leaves(&self) -> impl Iterator<Item = &BlockNode> {
        self.nodes.iter().filter(|b| b.kind == BlockKind::Inadmissible)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|b| !matches!(b.kind, BlockKind::Subdivided(_))).count()
    }
}

/// Recursive classification starting from `(root, root)`.
pub fn build_block_tree(tree: &ClusterTree, eta: f64) -> Result<BlockClusterTree> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    let mut bt = BlockClusterTree {
        nodes: Vec::new(),
        eta,
        far: vec![Vec::new(); tree.len()],
        near: vec![Vec::new(); tree.len()],
    };
    descend(tree, 0, 0, &mut bt);
    Ok(bt)
}

fn descend(tree: &ClusterTree, t: usize, s: usize, bt: &mut BlockClusterTree) -> usize {
    let id = bt.nodes.len();
    let (ct, cs) = (tree.get(t), tree.get(s));
    let kind = if is_admissible(ct, cs, bt.eta) {
        bt.far[t].push(s);
        BlockKind::Admissible
    } else if ct.is_leaf() && cs.is_leaf() {
        bt.near[t].push(s);
        BlockKind::Inadmissible
    } else {
        BlockKind::Subdivided(Vec::new())
    };
    let split = matches!(kind, BlockKind::Subdivided(_));
    bt.nodes.push(BlockNode { row: t, col: s, kind });
    if split {
        let mut kids = Vec::new();
        for &t2 in &tree.sons(t) {
            for &s2 in &tree.sons(s) {
                kids.push(descend(tree, t2, s2, bt));
            }
        }
        bt.nodes[id].kind = BlockKind::Subdivided(kids);
    }
    id
}

/// Admissible-block counts: `per_level[l]` is the largest number of
/// admissible partners of any row cluster at level `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sparsity {
    pub per_level: Vec<usize>,
    pub global: usize,
}

pub fn sparsity_constant(tree: &ClusterTree, bt: &BlockClusterTree) -> Sparsity {
    let mut per_level = vec![0; tree.depth()];
    for (t, far) in bt.far.iter().enumerate() {
        let l = tree.get(t).level;
        per_level[l] = per_level[l].max(far.len());
    }
    let global = per_level.iter().copied().max().unwrap_or(0);
    Sparsity { per_level, global }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{build_cluster_tree, Point3};

    fn coverage(tree: &ClusterTree, bt: &BlockClusterTree) -> usize {
        bt.nodes
            .iter()
            .filter(|b| !matches!(b.kind, BlockKind::Subdivided(_)))
            .map(|b| tree.get(b.row).size() * tree.get(b.col).size())
            .sum()
    }

    #[test]
    fn single_leaf_tree() {
        let pts = vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)];
        let tree = build_cluster_tree(&pts, 4).unwrap();
        let bt = build_block_tree(&tree, 1.0).unwrap();
        assert_eq!(bt.nodes.len(), 1);
        assert_eq!(bt.root().kind, BlockKind::Inadmissible);
        assert_eq!(sparsity_constant(&tree, &bt).global, 0);
    }

    #[test]
    fn two_separated_leaves() {
        let mut pts = Vec::new();
        for x in [0.0, 1.0] {
            pts.push(Point3::new(x, 0.0, 0.0));
        }
        for x in [10.0, 11.0] {
            pts.push(Point3::new(x, 0.0, 0.0));
        }
        let tree = build_cluster_tree(&pts, 2).unwrap();
        let bt = build_block_tree(&tree, 1.0).unwrap();
        assert_eq!(bt.admissible_leaves().count(), 2);
        assert_eq!(bt.inadmissible_leaves().count(), 2);
    }

    #[test]
    fn rod_tiles_the_square() {
        let pts: Vec<Point3> = (0..1024)
            .map(|i| Point3::new(0.05 * (i / 4) as f64, 0.05 * ((i / 2) % 2) as f64, 0.05 * (i % 2) as f64))
            .collect();
        let tree = build_cluster_tree(&pts, 32).unwrap();
        let bt = build_block_tree(&tree, 1.0).unwrap();
        assert_eq!(coverage(&tree, &bt), 1024 * 1024);
        for b in bt.inadmissible_leaves() {
            assert!(tree.get(b.row).is_leaf() && tree.get(b.col).is_leaf());
        }
        for b in bt.admissible_leaves() {
            assert!(!tree.is_ancestor_or_self(b.row, b.col) && !tree.is_ancestor_or_self(b.col, b.row));
        }
        let sp = sparsity_constant(&tree, &bt);
        assert!(sp.global >= 1 && sp.global <= 4, "C_sp = {}", sp.global);
    }

    #[test]
    fn rejects_bad_eta() {
        let tree = build_cluster_tree(&[Point3::default()], 1).unwrap();
        assert!(build_block_tree(&tree, 0.0).is_err());
    }
}
