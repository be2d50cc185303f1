//! Scattering from a slab: BiCGStab on the H2 operator.

use minrank_h2::arith::{bicgstab_solve, matvec};
use minrank_h2::build::{build_h2, H2Config};
use minrank_h2::clustering::Point3;
use minrank_h2::kernel::{generate_geometry, plane_wave_rhs, KernelModel, KernelParams, Shape};
use minrank_h2::linalg::Scalar;
use std::f64::consts::PI;

fn main() -> minrank_h2::error::Result<()> {
    let k0 = 2.0 * PI;
    let geometry = generate_geometry(Shape::Slab, 1.5, 20.0, k0)?;
    let rhs = plane_wave_rhs(&geometry, k0, Point3::new(0.0, 0.0, 1.0))?;
    let model = KernelModel::new(geometry, KernelParams::new(k0, Scalar::new(2.54, 0.0))?)?;
    let h = build_h2(model.points(), &model, &H2Config::default())?;

    let (x, report) = bicgstab_solve(|v| matvec(&h, v), &rhs, 1e-3, 200)?;
    println!("N = {}: {} iterations, converged {}", h.n(), report.iterations, report.converged);
    for (i, r) in report.residual_history.iter().enumerate() {
        println!("  {i:3} {r:.3e}");
    }
    let peak = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    println!("max |E| in the slab {peak:.4}");
    Ok(())
}
