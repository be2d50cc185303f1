use super::config::ExperimentConfig;
use super::record::{BenchRecord, PeakMem};
use crate::arith::{bicgstab_solve, h2_invert, h2_mul_formatted, matvec};
use crate::build::{build_h2, rep_error, H2Matrix};
use crate::clustering::{is_admissible, sparsity_constant, BlockKind, Point3};
use crate::error::{Error, Result};
use crate::kernel::{assemble_dense, generate_geometry, helmholtz, plane_wave_rhs, KernelModel, Shape};
use crate::linalg::{eps_rank, DenseLu, DenseMatrix, Scalar};
use log::{info, warn};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

/// Tolerance of the two-body SVD rank study.
pub const TWO_BODY_EPS: f64 = 1e-5;

pub fn make_model(cfg: &ExperimentConfig, shape: Shape, extent: f64) -> Result<KernelModel> {
    let g = generate_geometry(shape, extent, cfg.voxels_per_wavelength, cfg.k0)?;
    KernelModel::new(g, cfg.kernel_params()?)
}

fn random_vec(n: usize, rng: &mut StdRng) -> Vec<Scalar> {
    (0..n)
        .map(|_| Scalar::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

fn norm(x: &[Scalar]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn rel_diff(x: &[Scalar], y: &[Scalar]) -> f64 {
    let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let s = norm(y);
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

fn dense_apply(d: &DenseMatrix, x: &[Scalar]) -> Vec<Scalar> {
    (d * DenseMatrix::from_column_slice(x.len(), 1, x)).as_slice().to_vec()
}

/// Median over 5 samples; each sample repeats `f` until it spans at least 1 ms.
pub fn median_time(mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    let mut reps = 1usize;
    let mut samples = Vec::with_capacity(5);
    while samples.len() < 5 {
        let t = Instant::now();
        for _ in 0..reps {
            f()?;
        }
        let el = t.elapsed().as_secs_f64();
        if el < 1e-3 && reps < 1 << 20 {
            reps *= 2;
            samples.clear();
            continue;
        }
        samples.push(el / reps as f64);
    }
    samples.sort_by(f64::total_cmp);
    Ok(samples[2])
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Stochastic estimate of `|I - S X|` from `count` random probes.
pub fn inverse_residual(s: &H2Matrix, inv: &H2Matrix, count: usize, rng: &mut StdRng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let x = random_vec(s.n(), rng);
        let y = matvec(s, &matvec(inv, &x)?)?;
        worst = worst.max(rel_diff(&y, &x));
    }
    Ok(worst)
}

fn storage(h: &H2Matrix) -> Option<PeakMem> {
    Some(PeakMem::estimated(h.storage_bytes() as f64))
}

/// Per-size rank statistics, then the two-body SVD study.
pub fn run_rank_study(cfg: &ExperimentConfig) -> Result<Vec<BenchRecord>> {
    if cfg.extents.is_empty() {
        return Err(Error::InvalidParameter("rank study needs a non-empty size sweep".into()));
    }
    let h2cfg = cfg.h2_config()?;
    let mut out = Vec::new();
    for &extent in &cfg.extents {
        let model = make_model(cfg, cfg.shape, extent)?;
        let n = model.n();
        info!("rank study: {} {extent} (N = {n})", cfg.shape);
        let h = build_h2(model.points(), &model, &h2cfg)?;
        for (level, &r) in h.basis.max_rank_per_level(&h.tree).iter().enumerate() {
            out.push(BenchRecord {
                n: Some(n),
                lambda: Some(extent),
                level: Some(level),
                max_rank: Some(r),
                ..BenchRecord::new("rank-level")
            });
        }
        let rep = if n <= cfg.dense_cap {
            Some(rep_error(&h, &assemble_dense(&model, cfg.dense_cap)?)?)
        } else {
            None
        };
        out.push(BenchRecord {
            n: Some(n),
            lambda: Some(extent),
            max_rank: Some(h.max_rank()),
            csp: Some(sparsity_constant(&h.tree, &h.blocks).global),
            rep_error: rep,
            build_s: Some(h.stats.total_s),
            peak_mem: storage(&h),
            ..BenchRecord::new("rank-study")
        });
    }
    for &size in &cfg.svd_sizes {
        out.push(two_body_rank(cfg, size)?);
    }
    Ok(out)
}

/// Two cubes of edge `size` wavelengths whose centers are two edges apart,
/// each sampled by `lattice^3` points.
pub fn two_body_points(size: f64, lattice: usize, k0: f64) -> (Vec<Point3>, Vec<Point3>) {
    let edge = size * 2.0 * PI / k0;
    let h = edge / lattice as f64;
    let cube = |x0: f64| {
        let mut p = Vec::with_capacity(lattice.pow(3));
        for k in 0..lattice {
            for j in 0..lattice {
                for i in 0..lattice {
                    let c = |m: usize| (m as f64 + 0.5) * h;
                    p.push(Point3::new(x0 + c(i), c(j), c(k)));
                }
            }
        }
        p
    };
    (cube(0.0), cube(2.0 * edge))
}

/// Dense SVD rank of the interaction block between two separated cubes.
pub fn two_body_rank(cfg: &ExperimentConfig, size: f64) -> Result<BenchRecord> {
    let (a, b) = two_body_points(size, cfg.svd_lattice, cfg.k0);
    let n = a.len() + b.len();
    if a.len() > cfg.dense_cap {
        warn!("two-body study at {size} wavelengths skipped: block size {} above dense cap", a.len());
        return Ok(BenchRecord {
            n: Some(n),
            lambda: Some(size),
            ..BenchRecord::new("two-body-skipped")
        });
    }
    let t = Instant::now();
    let g = DenseMatrix::from_fn(a.len(), b.len(), |i, j| helmholtz(a[i].dist(&b[j]), cfg.k0));
    let rank = eps_rank(&g, TWO_BODY_EPS);
    info!("two-body study: {size} wavelengths, rank {rank}");
    Ok(BenchRecord {
        n: Some(n),
        lambda: Some(size),
        max_rank: Some(rank),
        build_s: Some(t.elapsed().as_secs_f64()),
        ..BenchRecord::new("two-body-svd")
    })
}

fn incident(model: &KernelModel, k0: f64) -> Result<Vec<Scalar>> {
    plane_wave_rhs(&model.geometry, k0, Point3::new(1.0, 0.0, 0.0))
}

/// Build, matvec, iterative solve and direct inverse over a size sweep,
/// followed by a `scaling-fit` row of log-log slopes against `N`.
pub fn run_scaling_study(cfg: &ExperimentConfig) -> Result<Vec<BenchRecord>> {
    if cfg.extents.len() < 3 {
        return Err(Error::InvalidParameter("scaling study needs at least 3 sizes".into()));
    }
    let h2cfg = cfg.h2_config()?;
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    for &extent in &cfg.extents {
        let model = make_model(cfg, cfg.shape, extent)?;
        let n = model.n();
        info!("scaling study: {} {extent} (N = {n})", cfg.shape);
        let h = build_h2(model.points(), &model, &h2cfg)?;
        let x = random_vec(n, &mut rng);
        let matvec_s = median_time(|| matvec(&h, &x).map(|_| ()))?;
        let mut rec = BenchRecord {
            n: Some(n),
            lambda: Some(extent),
            max_rank: Some(h.max_rank()),
            csp: Some(sparsity_constant(&h.tree, &h.blocks).global),
            build_s: Some(h.stats.total_s),
            matvec_s: Some(matvec_s),
            peak_mem: storage(&h),
            ..BenchRecord::new("scaling")
        };
        let rhs = incident(&model, cfg.k0)?;
        if cfg.solver.iterative() {
            let (_, rep) = bicgstab_solve(|v| matvec(&h, v), &rhs, cfg.tol, cfg.max_iter)?;
            if !rep.converged {
                warn!("BiCGStab did not converge at N = {n}");
            }
            rec.iterations = Some(rep.iterations);
            rec.solve_s = Some(rep.wall_time);
        }
        if cfg.solver.direct() {
            let t = Instant::now();
            let inv = h2_invert(&h)?;
            rec.inverse_s = Some(t.elapsed().as_secs_f64());
            rec.inv_residual = Some(inverse_residual(&h, &inv, 3, &mut rng)?);
            if !cfg.solver.iterative() {
                rec.solve_s = Some(median_time(|| matvec(&inv, &rhs).map(|_| ()))?);
            }
        }
        out.push(rec);
    }
    out.push(scaling_fit(&out));
    Ok(out)
}

/// Slopes of the timing and memory columns against `N`.
pub fn scaling_fit(rows: &[BenchRecord]) -> BenchRecord {
    let ns: Vec<f64> = rows.iter().map(|r| r.n.unwrap_or(0) as f64).collect();
    let slope = |f: &dyn Fn(&BenchRecord) -> Option<f64>| {
        let ys: Vec<f64> = rows.iter().map(|r| f(r).unwrap_or(0.0)).collect();
        loglog_slope(&ns, &ys)
    };
    BenchRecord {
        build_s: slope(&|r| r.build_s),
        matvec_s: slope(&|r| r.matvec_s),
        inverse_s: slope(&|r| r.inverse_s),
        solve_s: slope(&|r| r.solve_s),
        peak_mem: slope(&|r| r.peak_mem.map(|m| m.value)).map(PeakMem::measured),
        ..BenchRecord::new("scaling-fit")
    }
}

/// Result of an end-to-end solve.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub records: Vec<BenchRecord>,
    pub solution: Vec<Scalar>,
    pub converged: bool,
    /// `|x_iter - x_direct| / |x_direct|` when both solvers ran.
    pub discrepancy: Option<f64>,
}

/// Solves `S E = E_inc` for a plane wave on the first geometry of the sweep
/// and writes the solution to `cfg.solution`.
pub fn run_solve(cfg: &ExperimentConfig) -> Result<SolveOutcome> {
    let extent = *cfg
        .extents
        .first()
        .ok_or_else(|| Error::InvalidParameter("solve needs a geometry size".into()))?;
    let model = make_model(cfg, cfg.shape, extent)?;
    let n = model.n();
    let h = build_h2(model.points(), &model, &cfg.h2_config()?)?;
    let rhs = incident(&model, cfg.k0)?;
    let base = BenchRecord {
        n: Some(n),
        lambda: Some(extent),
        max_rank: Some(h.max_rank()),
        build_s: Some(h.stats.total_s),
        peak_mem: storage(&h),
        ..BenchRecord::default()
    };
    let mut records = Vec::new();
    let mut converged = true;
    let mut x_iter = None;
    let mut x_dir = None;
    if cfg.solver.iterative() {
        let (x, rep) = bicgstab_solve(|v| matvec(&h, v), &rhs, cfg.tol, cfg.max_iter)?;
        converged = rep.converged;
        records.push(BenchRecord {
            experiment: "solve-iterative".into(),
            iterations: Some(rep.iterations),
            solve_s: Some(rep.wall_time),
            ..base.clone()
        });
        x_iter = Some(x);
    }
    if cfg.solver.direct() {
        let t = Instant::now();
        let inv = h2_invert(&h)?;
        let inverse_s = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let x = matvec(&inv, &rhs)?;
        let solve_s = t.elapsed().as_secs_f64();
        let mut rng = StdRng::seed_from_u64(cfg.seed);
        records.push(BenchRecord {
            experiment: "solve-direct".into(),
            inv_residual: Some(inverse_residual(&h, &inv, 3, &mut rng)?),
            inverse_s: Some(inverse_s),
            solve_s: Some(solve_s),
            ..base.clone()
        });
        x_dir = Some(x);
    }
    let discrepancy = match (&x_iter, &x_dir) {
        (Some(a), Some(b)) => Some(rel_diff(a, b)),
        _ => None,
    };
    if let Some(d) = discrepancy {
        records.push(BenchRecord {
            experiment: "solve-discrepancy".into(),
            rep_error: Some(d),
            ..base
        });
    }
    let solution = x_iter.or(x_dir).expect("at least one solver runs");
    write_solution(&solution, &cfg.solution)?;
    Ok(SolveOutcome {
        records,
        solution,
        converged,
        discrepancy,
    })
}

/// One line per unknown, `re,im`.
pub fn write_solution(x: &[Scalar], path: &std::path::Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for z in x {
        writeln!(w, "{},{}", z.re, z.im)?;
    }
    w.flush()?;
    Ok(())
}

/// Outcome of one dense-oracle or structural check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub shape: Shape,
    pub n: usize,
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.bound
    }

    pub fn record(&self, lambda: f64) -> BenchRecord {
        BenchRecord {
            n: Some(self.n),
            lambda: Some(lambda),
            rep_error: Some(self.value),
            ..BenchRecord::new(&format!("verify-{}-{}", self.name, self.shape))
        }
    }
}

/// Dense-oracle equivalence and structural checks for one geometry.
pub fn verify_geometry(cfg: &ExperimentConfig, shape: Shape, extent: f64) -> Result<Vec<Check>> {
    let model = make_model(cfg, shape, extent)?;
    let n = model.n();
    let dense = assemble_dense(&model, cfg.dense_cap)?;
    let h = build_h2(model.points(), &model, &cfg.h2_config()?)?;
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let eps = cfg.eps_acc;
    let mut checks = Vec::new();
    let mut push = |name, value, bound| checks.push(Check { shape, n, name, value, bound });

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = random_vec(n, &mut rng);
        worst = worst.max(rel_diff(&matvec(&h, &x)?, &dense_apply(&dense, &x)));
    }
    push("matvec", worst, 10.0 * eps);

    let prod = h2_mul_formatted(&h, &h)?;
    let x = random_vec(n, &mut rng);
    let exact = matvec(&h, &matvec(&h, &x)?)?;
    push("product", rel_diff(&matvec(&prod, &x)?, &exact), 20.0 * eps);

    let rhs = incident(&model, cfg.k0)?;
    let inv = h2_invert(&h)?;
    let mut lu_rhs = DenseMatrix::from_column_slice(n, 1, &rhs);
    DenseLu::new(&dense)?.solve_in_place(&mut lu_rhs);
    push("direct", rel_diff(&matvec(&inv, &rhs)?, lu_rhs.as_slice()), 1e-2);

    let mut ortho: f64 = 0.0;
    let mut nested: f64 = 0.0;
    for c in &h.tree.clusters {
        let k = h.basis.rank[c.id];
        if k == 0 {
            continue;
        }
        let v = h.basis.materialize(c.id);
        let dev = (v.adjoint() * &v - DenseMatrix::identity(k, k)).norm();
        ortho = ortho.max(dev / (1e-10 * k as f64));
        if let Some(children) = c.children {
            // the parent basis restricted to a child lies in the child's span
            let mut off = 0;
            for ch in children {
                let m = h.tree.get(ch).size();
                let part = v.rows(off, m).into_owned();
                let vc = h.basis.materialize(ch);
                let back = &vc * (vc.adjoint() * &part);
                nested = nested.max((back - &part).norm() / part.norm().max(1.0));
                off += m;
            }
        }
    }
    push("orthonormality", ortho, 1.0);
    push("nestedness", nested, 1e-10);

    let mut covered = 0usize;
    let mut bad_adm = 0usize;
    for node in &h.blocks.nodes {
        let (t, s) = (h.tree.get(node.row), h.tree.get(node.col));
        match node.kind {
            BlockKind::Subdivided(_) => continue,
            BlockKind::Admissible => {
                if !is_admissible(t, s, h.blocks.eta) {
                    bad_adm += 1;
                }
            }
            BlockKind::Inadmissible => {}
        }
        covered += t.size() * s.size();
    }
    push("tiling", (covered as f64 - (n * n) as f64).abs(), 0.0);
    push("admissibility", bad_adm as f64, 0.0);

    let (a, b) = (Scalar::new(0.7, -1.3), Scalar::new(-2.1, 0.4));
    let x = random_vec(n, &mut rng);
    let y = random_vec(n, &mut rng);
    let comb: Vec<Scalar> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
    let (hx, hy) = (matvec(&h, &x)?, matvec(&h, &y)?);
    let lin: Vec<Scalar> = hx.iter().zip(&hy).map(|(p, q)| a * p + b * q).collect();
    push("linearity", rel_diff(&matvec(&h, &comb)?, &lin), 1e-12);
    Ok(checks)
}

/// Runs [`verify_geometry`] over the configured shape and sizes that fit
/// under the dense cap.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<(Vec<Check>, Vec<BenchRecord>)> {
    let mut checks = Vec::new();
    let mut records = Vec::new();
    for &extent in &cfg.extents {
        let g = generate_geometry(cfg.shape, extent, cfg.voxels_per_wavelength, cfg.k0)?;
        if g.len() > cfg.dense_cap {
            warn!("verify: {} {extent} skipped, N = {} above dense cap", cfg.shape, g.len());
            continue;
        }
        for c in verify_geometry(cfg, cfg.shape, extent)? {
            records.push(c.record(extent));
            checks.push(c);
        }
    }
    Ok((checks, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::SolverKind;

    fn small(shape: Shape, extents: Vec<f64>) -> ExperimentConfig {
        ExperimentConfig {
            shape,
            extents,
            n_min: 16,
            svd_sizes: vec![],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn slope_of_power_law() {
        let x = [10.0, 20.0, 40.0, 80.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 1.5).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[2.0]).is_none());
    }

    #[test]
    fn median_time_is_positive() {
        let t = median_time(|| Ok(())).unwrap();
        assert!(t >= 0.0 && t < 1e-3);
    }

    #[test]
    fn sweeps_validated() {
        assert!(run_rank_study(&small(Shape::Rod, vec![])).is_err());
        assert!(run_scaling_study(&small(Shape::Rod, vec![1.0])).is_err());
    }

    #[test]
    fn two_body_layout() {
        let (a, b) = two_body_points(1.0, 4, 2.0 * PI);
        assert_eq!((a.len(), b.len()), (64, 64));
        // centers two edge lengths apart
        let ca = a.iter().fold(0.0, |s, p| s + p.x) / 64.0;
        let cb = b.iter().fold(0.0, |s, p| s + p.x) / 64.0;
        assert!((cb - ca - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_body_skips_above_cap() {
        let cfg = ExperimentConfig {
            dense_cap: 10,
            svd_lattice: 3,
            ..ExperimentConfig::default()
        };
        assert_eq!(two_body_rank(&cfg, 0.5).unwrap().experiment, "two-body-skipped");
    }

    #[test]
    fn zero_contrast_solution_is_excitation() {
        let dir = std::env::temp_dir().join(format!("h2bench-solve-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = ExperimentConfig {
            eps_r: 1.0,
            solver: SolverKind::Both,
            solution: dir.join("x.txt"),
            ..small(Shape::Rod, vec![1.0])
        };
        let out = run_solve(&cfg).unwrap();
        let model = make_model(&cfg, Shape::Rod, 1.0).unwrap();
        let rhs = incident(&model, cfg.k0).unwrap();
        assert!(out.converged);
        assert_eq!(out.solution, rhs);
        assert_eq!(out.discrepancy, Some(0.0));
        let text = std::fs::read_to_string(&cfg.solution).unwrap();
        assert_eq!(text.lines().count(), model.n());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn verify_small_rod() {
        let cfg = small(Shape::Rod, vec![1.0]);
        let (checks, records) = run_verify(&cfg).unwrap();
        assert_eq!(checks.len(), records.len());
        for c in &checks {
            assert!(c.passed(), "{c:?}");
        }
    }
}
