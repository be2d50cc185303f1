use super::DenseMatrix;
use crate::error::{Error, Result};

/// Leading eigenpairs of a Hermitian positive semidefinite matrix.
#[derive(Debug, Clone)]
pub struct TruncatedEig {
    /// Orthonormal columns spanning the retained eigenspace.
    pub vectors: DenseMatrix,
    /// Retained eigenvalues, descending.
    pub values: Vec<f64>,
}

impl TruncatedEig {
    pub fn rank(&self) -> usize {
        self.values.len()
    }
}

/// Truncated eigendecomposition `G ~ P D P^H` of a Gram matrix.
///
/// Keeps the leading eigenpairs with `sqrt(lambda_i / lambda_1) > eps`; the
/// square root converts Gram eigenvalues back to singular values of the
/// block the Gram was formed from. With `eps == 0` the complete eigenbasis
/// is returned, since Gram eigenvalues below roundoff cannot be resolved.
pub fn trunc_eig_hermitian(g: &DenseMatrix, eps: f64) -> Result<TruncatedEig> {
    let n = g.nrows();
    if g.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: g.ncols(),
        });
    }
    if n == 0 {
        return Ok(TruncatedEig {
            vectors: DenseMatrix::zeros(0, 0),
            values: Vec::new(),
        });
    }
    let scale = g.norm();
    let deviation = (g - g.adjoint()).norm();
    let allowed = 1e-12 * scale;
    if deviation > allowed {
        return Err(Error::NotHermitian { deviation, allowed });
    }
    if scale == 0.0 {
        return Ok(TruncatedEig {
            vectors: DenseMatrix::zeros(n, 0),
            values: Vec::new(),
        });
    }
    let sym = (g + g.adjoint()) * super::Scalar::new(0.5, 0.0);
    let eig = super::to_faer(&sym)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::NotHermitian { deviation, allowed })?;
    let (evals, evecs) = (eig.S(), eig.U());
    // faer returns ascending eigenvalues
    let order: Vec<usize> = (0..n).rev().collect();
    let eigenvalues: Vec<f64> = (0..n).map(|i| evals[i].re).collect();
    let lambda1 = eigenvalues[order[0]];
    if lambda1 <= 0.0 {
        return Ok(TruncatedEig {
            vectors: DenseMatrix::zeros(n, 0),
            values: Vec::new(),
        });
    }
    let keep = if eps == 0.0 {
        n
    } else {
        order
        .iter()
        .take_while(|&&i| {
            let l = eigenvalues[i];
            l > 0.0 && (l / lambda1).sqrt() > eps
        })
        .count()
    };
    let vectors = DenseMatrix::from_fn(n, keep, |r, c| evecs[(r, order[c])]);
    let values = order[..keep].iter().map(|&i| eigenvalues[i].max(0.0)).collect();
    Ok(TruncatedEig { vectors, values })
}
