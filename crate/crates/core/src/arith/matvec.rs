use crate::build::{Block, BlockData, H2Matrix};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Scalar};

/// `y = H x` for a vector in the original ordering.
pub fn matvec(m: &H2Matrix, x: &[Scalar]) -> Result<Vec<Scalar>> {
    let xb = DenseMatrix::from_column_slice(x.len(), 1, x);
    Ok(matmat_apply(m, &xb)?.as_slice().to_vec())
}

/// `Y = H X` for an `N x q` block in the original ordering.
pub fn matmat_apply(m: &H2Matrix, x: &DenseMatrix) -> Result<DenseMatrix> {
    let n = m.n();
    if x.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: x.nrows(),
        });
    }
    let perm = &m.tree.perm;
    let xt = DenseMatrix::from_fn(n, x.ncols(), |i, j| x[(perm[i], j)]);
    let yt = apply_tree_order(m, &xt);
    let mut y = DenseMatrix::zeros(n, x.ncols());
    for (i, &p) in perm.iter().enumerate() {
        y.row_mut(p).copy_from(&yt.row(i));
    }
    Ok(y)
}

/// Product in tree order: forward transform, coupling and dense leaves,
/// backward transform.
pub(crate) fn apply_tree_order(m: &H2Matrix, x: &DenseMatrix) -> DenseMatrix {
    let tree = &m.tree;
    let basis = &m.basis;
    let q = x.ncols();
    let nc = tree.len();
    // forward: xhat_s = V_s^T x|s, children before parents
    let mut xhat = vec![DenseMatrix::zeros(0, q); nc];
    for s in (0..nc).rev() {
        let c = tree.get(s);
        xhat[s] = match c.children {
            None => basis.leaf[s]
                .as_ref()
                .unwrap()
                .tr_mul(&x.rows(c.range.start, c.size())),
            Some(ch) => ch.iter().fold(DenseMatrix::zeros(basis.rank[s], q), |acc, &c| {
                acc + basis.transfer[c].as_ref().unwrap().tr_mul(&xhat[c])
            }),
        };
    }
    let mut y = DenseMatrix::zeros(x.nrows(), q);
    let mut yhat: Vec<DenseMatrix> = basis.rank.iter().map(|&k| DenseMatrix::zeros(k, q)).collect();
    leaves(m, &m.root, x, &xhat, &mut y, &mut yhat);
    // backward: parents before children
    for t in 0..nc {
        let c = tree.get(t);
        match c.children {
            None => {
                let add = basis.leaf[t].as_ref().unwrap() * &yhat[t];
                let mut rows = y.rows_mut(c.range.start, c.size());
                rows += add;
            }
            Some(ch) => {
                for cc in ch {
                    let add = basis.transfer[cc].as_ref().unwrap() * &yhat[t];
                    yhat[cc] += add;
                }
            }
        }
    }
    y
}

fn leaves(m: &H2Matrix, b: &Block, x: &DenseMatrix, xhat: &[DenseMatrix], y: &mut DenseMatrix, yhat: &mut [DenseMatrix]) {
    match &b.data {
        BlockData::Dense(d) => {
            let (rt, rs) = (&m.tree.get(b.row).range, &m.tree.get(b.col).range);
            let add = d * x.rows(rs.start, rs.len());
            let mut rows = y.rows_mut(rt.start, rt.len());
            rows += add;
        }
        BlockData::Coupling(s) => {
            yhat[b.row] += s * &xhat[b.col];
        }
        BlockData::Split(ch) => {
            for c in ch {
                leaves(m, c, x, xhat, y, yhat);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build::{build_h2, H2Config};
    use crate::kernel::{assemble_dense, generate_geometry, KernelModel, KernelParams, Shape};
    use rand::{rngs::StdRng, Rng, SeedableRng};
    use std::f64::consts::PI;

    fn rod(len: f64, eps_r: f64) -> KernelModel {
        let k0 = 2.0 * PI;
        let g = generate_geometry(Shape::Rod, len, 20.0, k0).unwrap();
        KernelModel::new(g, KernelParams::new(k0, Scalar::new(eps_r, 0.0)).unwrap()).unwrap()
    }

    fn random_vec(n: usize, rng: &mut StdRng) -> Vec<Scalar> {
        (0..n).map(|_| Scalar::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
    }

    #[test]
    fn zero_and_identity() {
        let m = rod(2.0, 1.0);
        let h = build_h2(m.points(), &m, &H2Config::default()).unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        let x = random_vec(m.n(), &mut rng);
        assert_eq!(matvec(&h, &x).unwrap(), x);
        let z = vec![Scalar::new(0.0, 0.0); m.n()];
        assert_eq!(matvec(&h, &z).unwrap(), z);
    }

    #[test]
    fn matches_dense_product() {
        let m = rod(2.0, 2.54);
        let dense = assemble_dense(&m, 6000).unwrap();
        let h = build_h2(m.points(), &m, &H2Config::default()).unwrap();
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..5 {
            let x = random_vec(m.n(), &mut rng);
            let y = matvec(&h, &x).unwrap();
            let yd = &dense * DenseMatrix::from_column_slice(m.n(), 1, &x);
            let err = (DenseMatrix::from_column_slice(m.n(), 1, &y) - &yd).norm() / yd.norm();
            assert!(err <= 1e-3, "err {err}");
        }
        // identity columns rebuild the matrix
        let id = DenseMatrix::identity(m.n(), m.n());
        let full = matmat_apply(&h, &id).unwrap();
        assert!((full - h.materialize()).norm() <= 1e-12 * dense.norm());
    }

    #[test]
    fn dimension_checked() {
        let m = rod(1.0, 2.54);
        let h = build_h2(m.points(), &m, &H2Config::default()).unwrap();
        assert!(matvec(&h, &[Scalar::new(1.0, 0.0)]).is_err());
    }
}
