//! Dense complex linear algebra used by the compression and arithmetic layers.
//!
//! Dense blocks are plain column-major `nalgebra` matrices of `Complex64`.
//! The routines here are the building blocks of Stage I (cross approximation
//! and reduced SVD) and Stage II (truncated eigendecompositions of Gram
//! matrices), plus the LU inverse applied to leaf blocks.

mod aca;
mod eig;
mod lowrank;
mod lu;

pub use aca::{aca_factorize, default_max_rank, EntrySource};
pub use eig::{trunc_eig_hermitian, TruncatedEig};
pub use lowrank::{recompress_lowrank, CompressionParams, LowRankFactor};
pub use lu::{dense_lu_invert, DenseLu};

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type Scalar = Complex64;

/// Dense complex matrix, column-major.
pub type DenseMatrix = DMatrix<Scalar>;

pub(crate) const ZERO: Scalar = Complex64::new(0.0, 0.0);
#[cfg(test)]
pub(crate) const ONE: Scalar = Complex64::new(1.0, 0.0);

/// Entry-wise complex conjugate.
pub fn conj(m: &DenseMatrix) -> DenseMatrix {
    m.map(|z| z.conj())
}

/// `a^H * b` without materializing `a^H`.
pub fn ad_mul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    a.ad_mul(b)
}

/// `a^T * b` (plain transpose, no conjugation).
pub fn tr_mul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    a.tr_mul(b)
}

/// Returns true when every entry is finite.
pub fn is_finite(m: &DenseMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) struct Svd {
    pub u: DenseMatrix,
    /// Descending.
    pub s: Vec<f64>,
    pub v_t: DenseMatrix,
}

pub(crate) fn to_faer(m: &DenseMatrix) -> faer::Mat<Scalar> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Scalar>) -> DenseMatrix {
    DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD `m = u diag(s) v_t`.
pub(crate) fn svd(m: &DenseMatrix) -> Svd {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return Svd {
            u: DenseMatrix::zeros(r, 0),
            s: Vec::new(),
            v_t: DenseMatrix::zeros(0, c),
        };
    }
    let f = to_faer(m).thin_svd().expect("svd did not converge");
    let s = (0..k).map(|i| f.S()[i].re).collect();
    Svd {
        u: from_faer(f.U()),
        s,
        v_t: from_faer(f.V()).adjoint(),
    }
}

/// Singular values of a dense matrix in descending order.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    to_faer(m).singular_values().expect("svd did not converge")
}

/// Number of singular values above `eps * sigma_1`.
pub fn eps_rank(m: &DenseMatrix, eps: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        Some(&s1) if s1 > 0.0 => sv.iter().filter(|&&s| s > eps * s1).count(),
        _ => 0,
    }
}
