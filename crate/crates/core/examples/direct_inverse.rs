//! Invert a cube array in H2 form and use the inverse as a direct solver.

use minrank_h2::arith::{apply_inverse_solve, h2_invert, matvec};
use minrank_h2::build::{build_h2, H2Config};
use minrank_h2::clustering::Point3;
use minrank_h2::kernel::{generate_geometry, plane_wave_rhs, KernelModel, KernelParams, Shape};
use minrank_h2::linalg::Scalar;
use std::f64::consts::PI;
use std::time::Instant;

fn norm(v: &[Scalar]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn main() -> minrank_h2::error::Result<()> {
    let k0 = 2.0 * PI;
    let geometry = generate_geometry(Shape::CubeArray, 2.0, 14.0, k0)?;
    let rhs = plane_wave_rhs(&geometry, k0, Point3::new(1.0, 0.0, 0.0))?;
    let model = KernelModel::new(geometry, KernelParams::new(k0, Scalar::new(2.54, 0.0))?)?;
    let h = build_h2(model.points(), &model, &H2Config::default())?;

    let t = Instant::now();
    let inv = h2_invert(&h)?;
    println!("N = {}: inverse in {:.2} s", h.n(), t.elapsed().as_secs_f64());

    let x = apply_inverse_solve(&inv, &rhs)?;
    let ax = matvec(&h, &x)?;
    let res: Vec<Scalar> = ax.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    println!("residual |Ax - b| / |b| = {:.2e}", norm(&res) / norm(&rhs));
    Ok(())
}
