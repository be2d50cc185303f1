//! Scalar volume integral equation on voxel lattices.
//!
//! The operator is `S = I - k0^2 * G * diag(chi)` with one-point collocation
//! of the Helmholtz kernel `exp(-j k0 r) / (4 pi r)` off the diagonal and the
//! equal-volume-sphere integral on it.

mod geometry;
mod green;

pub use geometry::{generate_geometry, Shape, VoxelGeometry};
pub use green::{
    assemble_dense, helmholtz, matrix_entry, plane_wave_rhs, self_term, KernelBlock, KernelModel, KernelParams,
    DEFAULT_DENSE_CAP, DEFAULT_EPS_R,
};
