use super::DenseMatrix;
use crate::error::{Error, Result};

/// Factorization `a * b^T` of a (possibly grouped) admissible block.
///
/// Note the plain transpose: `b` holds the column factor unconjugated.
#[derive(Debug, Clone)]
pub struct LowRankFactor {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
}

impl LowRankFactor {
    pub fn new(a: DenseMatrix, b: DenseMatrix) -> Self {
        assert_eq!(a.ncols(), b.ncols(), "factor ranks differ");
        Self { a, b }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self::new(DenseMatrix::zeros(rows, 0), DenseMatrix::zeros(cols, 0))
    }

    pub fn rank(&self) -> usize {
        self.a.ncols()
    }

    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.b.nrows()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        &self.a * self.b.transpose()
    }
}

/// Accuracy knobs for the two-stage compression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionParams {
    /// Relative tolerance of the cross approximation.
    pub eps_aca: f64,
    /// Relative tolerance of SVD recompression and basis truncation.
    pub eps_acc: f64,
    /// Hard cap on the cross-approximation rank; `None` means
    /// `min(rows, cols, 200)` per block.
    pub max_rank: Option<usize>,
}

impl Default for CompressionParams {
    fn default() -> Self {
        Self {
            eps_aca: 1e-4,
            eps_acc: 1e-4,
            max_rank: None,
        }
    }
}

impl CompressionParams {
    pub fn new(eps_aca: f64, eps_acc: f64) -> Result<Self> {
        let p = Self {
            eps_aca,
            eps_acc,
            max_rank: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Tolerances of zero: every block is kept at full numerical rank.
    pub fn lossless() -> Self {
        Self {
            eps_aca: 0.0,
            eps_acc: 0.0,
            max_rank: Some(usize::MAX),
        }
    }

    pub fn with_max_rank(mut self, max_rank: usize) -> Self {
        self.max_rank = Some(max_rank);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let lossless = self.eps_aca == 0.0 && self.eps_acc == 0.0;
        if !lossless && !(self.eps_acc > 0.0 && self.eps_acc <= self.eps_aca && self.eps_aca < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < eps_acc <= eps_aca < 1, got eps_acc={} eps_aca={}",
                self.eps_acc, self.eps_aca
            )));
        }
        if self.max_rank == Some(0) {
            return Err(Error::InvalidParameter("max_rank must be at least 1".into()));
        }
        Ok(())
    }

    pub fn max_rank_for(&self, rows: usize, cols: usize) -> usize {
        match self.max_rank {
            Some(k) => k.min(rows.min(cols)),
            None => super::default_max_rank(rows, cols),
        }
    }
}

/// Reduced-SVD recompression of `a b^T`.
///
/// Both factors are reduced by thin QR, the small core `R_a R_b^T` is
/// decomposed by SVD and singular values at or below
/// `eps * |sigma|_2 / sqrt(min(rows, cols))` are discarded. The discarded
/// tail therefore has Frobenius norm at most `eps * |a b^T|_F`, and since
/// the threshold can only drop when reapplied the operation is idempotent.
pub fn recompress_lowrank(f: &LowRankFactor, eps: f64) -> LowRankFactor {
    let (m, n, k) = (f.nrows(), f.ncols(), f.rank());
    if k == 0 {
        return f.clone();
    }
    let qa = f.a.clone().qr();
    let qb = f.b.clone().qr();
    let core = qa.r() * qb.r().transpose();
    let svd = super::svd(&core);
    let sigma = &svd.s;
    let total = sigma.iter().map(|s| s * s).sum::<f64>().sqrt();
    if total == 0.0 {
        return LowRankFactor::zero(m, n);
    }
    let threshold = eps * total / (m.min(n) as f64).sqrt();
    let keep = sigma.iter().take_while(|&&s| s > threshold).count();
    let (u, v_t) = (&svd.u, &svd.v_t);
    let mut us = u.columns(0, keep).into_owned();
    for (l, mut c) in us.column_iter_mut().enumerate() {
        c *= super::Scalar::new(sigma[l], 0.0);
    }
    let a = qa.q() * us;
    // (Y^H Q_b^T)^T = Q_b conj(Y), and v_t = Y^H so v_t^T = conj(Y)
    let b = qb.q() * v_t.rows(0, keep).transpose();
    LowRankFactor::new(a, b)
}
