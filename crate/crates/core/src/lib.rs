//! Minimal-rank H2 matrices for volume integral operators.
//!
//! A dense complex kernel matrix is compressed in two passes: a grouped
//! cross approximation of every cluster's far-field block row, then nested
//! orthonormal bases truncated from the Gram matrices of those factors. On
//! the resulting fixed block structure the crate offers matrix-vector
//! products, formatted sums and products, a recursive inverse and BiCGStab.
//!
//! ```no_run
//! use minrank_h2::arith::{bicgstab_solve, matvec};
//! use minrank_h2::build::{build_h2, H2Config};
//! use minrank_h2::clustering::Point3;
//! use minrank_h2::kernel::{generate_geometry, plane_wave_rhs, KernelModel, KernelParams, Shape};
//! use minrank_h2::linalg::Scalar;
//!
//! let k0 = 2.0 * std::f64::consts::PI;
//! let geometry = generate_geometry(Shape::Rod, 4.0, 20.0, k0)?;
//! let rhs = plane_wave_rhs(&geometry, k0, Point3::new(1.0, 0.0, 0.0))?;
//! let model = KernelModel::new(geometry, KernelParams::new(k0, Scalar::new(2.54, 0.0))?)?;
//! let h = build_h2(model.points(), &model, &H2Config::default())?;
//! let (x, report) = bicgstab_solve(|v| matvec(&h, v), &rhs, 1e-3, 100)?;
//! # let _ = (x, report);
//! # Ok::<(), minrank_h2::error::Error>(())
//! ```

pub mod error;
pub mod linalg;
pub mod clustering;
pub mod kernel;
pub mod build;
pub mod arith;
pub mod bench;
