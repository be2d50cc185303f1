//! Build the H2 form of a dielectric rod and compare it with the dense matrix.

use minrank_h2::build::{build_h2, rep_error, H2Config};
use minrank_h2::kernel::{assemble_dense, generate_geometry, KernelModel, KernelParams, Shape};
use minrank_h2::linalg::{CompressionParams, Scalar};
use std::f64::consts::PI;

fn main() -> minrank_h2::error::Result<()> {
    let k0 = 2.0 * PI;
    let geometry = generate_geometry(Shape::Rod, 8.0, 20.0, k0)?;
    let model = KernelModel::new(geometry, KernelParams::new(k0, Scalar::new(2.54, 0.0))?)?;
    let cfg = H2Config {
        compression: CompressionParams::new(1e-4, 1e-4)?,
        ..H2Config::default()
    };
    let h = build_h2(model.points(), &model, &cfg)?;
    let dense = assemble_dense(&model, 4096)?;

    println!("N = {}, build {:.2} s", h.n(), h.stats.total_s);
    println!("basis ranks per level {:?}", h.basis.max_rank_per_level(&h.tree));
    println!(
        "storage {} kB vs {} kB dense",
        h.storage_bytes() / 1024,
        h.n() * h.n() * 16 / 1024
    );
    println!("relative error {:.2e}", rep_error(&h, &dense)?);
    Ok(())
}
