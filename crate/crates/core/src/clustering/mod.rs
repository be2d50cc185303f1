//! Geometric cluster tree and block cluster tree.
//!
//! Index sets are split recursively at the median of the longest bounding-box
//! axis. Pairs of clusters are then classified top-down with the strong
//! admissibility condition `max(diam t, diam s) <= eta * dist(t, s)`.

mod block;
mod tree;

pub use block::{build_block_tree, sparsity_constant, BlockClusterTree, BlockKind, BlockNode, Sparsity};
pub use tree::{build_cluster_tree, is_admissible, BoundingBox, Cluster, ClusterTree, Point3};
