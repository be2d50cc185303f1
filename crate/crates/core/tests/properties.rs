//! Property tests over randomly generated inputs.

use minrank_h2::arith::matvec;
use minrank_h2::bench::{read_csv, write_csv, BenchRecord, PeakMem};
use minrank_h2::build::{build_h2, H2Config};
use minrank_h2::clustering::{build_block_tree, build_cluster_tree, is_admissible, BlockKind, Point3};
use minrank_h2::kernel::{helmholtz, KernelModel};
use minrank_h2::kernel::{generate_geometry, KernelParams, Shape};
use minrank_h2::linalg::{aca_factorize, recompress_lowrank, trunc_eig_hermitian, DenseMatrix, LowRankFactor, Scalar};
use proptest::prelude::*;
use std::f64::consts::PI;

fn cplx() -> impl Strategy<Value = Scalar> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Scalar::new(re, im))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(cplx(), rows * cols).prop_map(move |v| DenseMatrix::from_vec(rows, cols, v))
}

/// `a b^T` with geometrically decaying column scales.
fn decaying_factor() -> impl Strategy<Value = LowRankFactor> {
    (5usize..40, 5usize..40, 1usize..12, 0.05..0.9f64).prop_flat_map(|(m, n, k, decay)| {
        (matrix(m, k), matrix(n, k)).prop_map(move |(mut a, b)| {
            for (l, mut c) in a.column_iter_mut().enumerate() {
                c *= Scalar::new(decay.powi(l as i32), 0.0);
            }
            LowRankFactor::new(a, b)
        })
    })
}

fn cloud(n: usize) -> impl Strategy<Value = Vec<Point3>> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64), n)
        .prop_map(|v| v.into_iter().map(|(x, y, z)| Point3::new(x, y, z)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn recompression_error_and_idempotence(f in decaying_factor(), eps in 1e-8..1e-2f64) {
        let r = recompress_lowrank(&f, eps);
        let d = f.to_dense();
        prop_assert!(r.rank() <= f.rank());
        prop_assert!((r.to_dense() - &d).norm() <= eps * d.norm() * (1.0 + 1e-10) + 1e-14);
        prop_assert_eq!(recompress_lowrank(&r, eps).rank(), r.rank());
    }

    #[test]
    fn truncated_eig_is_orthonormal_and_accurate(a in matrix(12, 12), eps in 1e-6..1e-1f64) {
        let g = &a * a.adjoint();
        let e = trunc_eig_hermitian(&g, eps).unwrap();
        let k = e.rank();
        let p = &e.vectors;
        prop_assert!((p.adjoint() * p - DenseMatrix::identity(k, k)).norm() <= 1e-12 * k.max(1) as f64);
        let d = DenseMatrix::from_diagonal(&nalgebra::DVector::from_iterator(k, e.values.iter().map(|&l| Scalar::new(l, 0.0))));
        let resid = &g - p * d * p.adjoint();
        prop_assert!(resid.norm() <= eps * eps * g.norm() + 1e-12 * g.norm(), "resid {} bound {}", resid.norm(), eps * eps * g.norm());
    }

    #[test]
    fn aca_then_recompress_within_budget(
        offset in 2.0..5.0f64,
        k0 in 0.5..8.0f64,
        p in cloud(60),
        q in cloud(50),
    ) {
        let q: Vec<Point3> = q.into_iter().map(|r| Point3::new(r.x + offset, r.y, r.z)).collect();
        let g = DenseMatrix::from_fn(p.len(), q.len(), |i, j| helmholtz(p[i].dist(&q[j]), k0));
        let eps = 1e-5;
        let f = aca_factorize(&g, eps, 60).unwrap();
        let r = recompress_lowrank(&f, eps);
        prop_assert!((r.to_dense() - &g).norm() <= 2.0 * eps * g.norm());
    }

    #[test]
    fn block_tree_tiles_and_is_admissible(p in cloud(300), n_min in 4usize..40, eta in 0.5..2.0f64) {
        let tree = build_cluster_tree(&p, n_min).unwrap();
        let mut sorted = tree.perm.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..p.len()).collect::<Vec<_>>());
        let bt = build_block_tree(&tree, eta).unwrap();
        let mut area = 0usize;
        for node in &bt.nodes {
            let (t, s) = (tree.get(node.row), tree.get(node.col));
            match node.kind {
                BlockKind::Subdivided(_) => continue,
                BlockKind::Admissible => prop_assert!(is_admissible(t, s, eta)),
                BlockKind::Inadmissible => prop_assert!(t.is_leaf() || s.is_leaf() || !is_admissible(t, s, eta)),
            }
            area += t.size() * s.size();
        }
        prop_assert_eq!(area, p.len() * p.len());
    }

    #[test]
    fn csv_parse_back(
        n in prop::option::of(0usize..100_000),
        lambda in prop::option::of(0.01..64.0f64),
        err in prop::option::of(0.0..1.0f64),
        mem in prop::option::of((0.0..1e9f64, any::<bool>())),
    ) {
        let r = BenchRecord {
            n,
            lambda,
            rep_error: err,
            peak_mem: mem.map(|(v, e)| if e { PeakMem::estimated(v) } else { PeakMem::measured(v) }),
            ..BenchRecord::new("prop")
        };
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&r), &mut buf).unwrap();
        prop_assert_eq!(read_csv(buf.as_slice()).unwrap(), vec![r]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn matvec_is_linear(
        x in prop::collection::vec(cplx(), 160),
        y in prop::collection::vec(cplx(), 160),
        a in cplx(),
        b in cplx(),
    ) {
        let k0 = 2.0 * PI;
        let g = generate_geometry(Shape::Rod, 2.0, 20.0, k0).unwrap();
        let m = KernelModel::new(g, KernelParams::new(k0, Scalar::new(2.54, 0.0)).unwrap()).unwrap();
        let h = build_h2(m.points(), &m, &H2Config::default()).unwrap();
        let comb: Vec<Scalar> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let lhs = matvec(&h, &comb).unwrap();
        let (hx, hy) = (matvec(&h, &x).unwrap(), matvec(&h, &y).unwrap());
        let scale: f64 = lhs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
        for i in 0..lhs.len() {
            prop_assert!((lhs[i] - a * hx[i] - b * hy[i]).norm() <= 1e-12 * scale);
        }
    }
}
