// Sum and product on a fixed block structure, checked against dense arithmetic.

use minrank_h2::arith::{h2_add_formatted, h2_mul_formatted};
use minrank_h2::build::{build_h2, H2Config};
use minrank_h2::kernel::{generate_geometry, KernelModel, KernelParams, Shape};
use minrank_h2::linalg::Scalar;
use std::f64::consts::PI;

fn main() -> minrank_h2::error::Result<()> {
    let k0 = 2.0 * PI;
    let geometry = generate_geometry(Shape::Rod, 4.0, 20.0, k0)?;
    let model = KernelModel::new(geometry, KernelParams::new(k0, Scalar::new(2.54, 0.0))?)?;
    let h = build_h2(model.points(), &model, &H2Config::default())?;
    let d = h.materialize();

    let sum = h2_add_formatted(&h, &h, 1.0)?;
    let exact = &d * Scalar::new(2.0, 0.0);
    println!("A + A: {:.2e}", (sum.materialize() - &exact).norm() / exact.norm());

    let prod = h2_mul_formatted(&h, &h)?;
    let exact = &d * &d;
    println!("A * A: {:.2e}", (prod.materialize() - &exact).norm() / exact.norm());
    Ok(())
}
