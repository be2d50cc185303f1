use super::{DenseMatrix, Scalar, ZERO};
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P M = L U`.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl DenseLu {
    /// Factorizes `m`; a pivot below `1e-14 |m|_F` is reported as singular.
    pub fn new(m: &DenseMatrix) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: m.ncols(),
            });
        }
        let tiny = 1e-14 * m.norm();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut p, mut best) = (k, -1.0);
            for (i, z) in lu.column(k).iter().enumerate().skip(k) {
                let a = z.norm();
                if a > best {
                    best = a;
                    p = i;
                }
            }
            if best <= tiny {
                return Err(Error::Singular {
                    index: k,
                    magnitude: best,
                });
            }
            if p != k {
                lu.swap_rows(k, p);
                perm.swap(k, p);
            }
            let inv = lu[(k, k)].inv();
            {
                let mut col = lu.column_mut(k);
                for z in col.iter_mut().skip(k + 1) {
                    *z *= inv;
                }
            }
            for j in k + 1..n {
                let f = lu[(k, j)];
                if f == ZERO {
                    continue;
                }
                let (left, mut right) = lu.columns_range_pair_mut(k, j);
                for i in k + 1..n {
                    right[i] -= left[i] * f;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Solves `M X = B` in place.
    pub fn solve_in_place(&self, b: &mut DenseMatrix) {
        let n = self.dim();
        assert_eq!(b.nrows(), n);
        for mut col in b.column_iter_mut() {
            let x: Vec<Scalar> = self.perm.iter().map(|&p| col[p]).collect();
            for (i, v) in x.into_iter().enumerate() {
                col[i] = v;
            }
            for k in 0..n {
                let xk = col[k];
                if xk != ZERO {
                    for i in k + 1..n {
                        col[i] -= self.lu[(i, k)] * xk;
                    }
                }
            }
            for k in (0..n).rev() {
                col[k] /= self.lu[(k, k)];
                let xk = col[k];
                if xk != ZERO {
                    for i in 0..k {
                        col[i] -= self.lu[(i, k)] * xk;
                    }
                }
            }
        }
    }

    pub fn inverse(&self) -> DenseMatrix {
        let mut x = DenseMatrix::identity(self.dim(), self.dim());
        self.solve_in_place(&mut x);
        x
    }
}

/// Inverse of a square dense block by partially pivoted LU.
pub fn dense_lu_invert(m: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(DenseLu::new(m)?.inverse())
}
