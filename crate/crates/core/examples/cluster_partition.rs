//! Cluster a slab of voxels and report the block partition it induces.

use minrank_h2::clustering::{build_block_tree, build_cluster_tree, sparsity_constant};
use minrank_h2::kernel::{generate_geometry, Shape};
use std::f64::consts::PI;

fn main() -> minrank_h2::error::Result<()> {
    let geometry = generate_geometry(Shape::Slab, 1.0, 20.0, 2.0 * PI)?;
    let tree = build_cluster_tree(&geometry.centers, 32)?;
    let blocks = build_block_tree(&tree, 1.0)?;
    let sp = sparsity_constant(&tree, &blocks);

    println!("N = {}, {} clusters, depth {}", geometry.len(), tree.len(), tree.depth());
    println!(
        "{} admissible and {} dense leaves",
        blocks.admissible_leaves().count(),
        blocks.inadmissible_leaves().count()
    );
    println!("sparsity constant {} (per level {:?})", sp.global, sp.per_level);
    Ok(())
}
