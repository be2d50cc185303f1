//! Acceptance criteria at desk scale.
//!
//! Each test prints a single `PASS`/`FAIL` line with the measured value and
//! the pinned bound, then asserts it. Run with `--nocapture` to see them:
//!
//! ```text
//! cargo test -p minrank-h2 --test acceptance -- --nocapture --test-threads 1
//! ```

use minrank_h2::arith::{bicgstab_solve, h2_invert, matvec};
use minrank_h2::bench::{
    inverse_residual, loglog_slope, make_model, run_rank_study, run_scaling_study, two_body_rank, verify_geometry,
    Check, ExperimentConfig, SolverKind,
};
use minrank_h2::build::{build_h2, rep_error};
use minrank_h2::clustering::Point3;
use minrank_h2::kernel::{assemble_dense, plane_wave_rhs, Shape};
use rand::{rngs::StdRng, SeedableRng};
use std::collections::BTreeMap;
use std::time::Instant;

// representation accuracy
const REP_ERROR_MAX: f64 = 8e-3;
const REP_MAX_N: usize = 2048;
// rank constancy along a rod
const ROD_RANK_SPREAD: usize = 3;
// rank growth ratio per doubling of electrical size
const RANK_GROWTH_RATIO: f64 = 2.5;
const ITERATIONS_MAX: usize = 10;
const INVERSE_RESIDUAL_MAX: f64 = 5e-2;
const ORACLE_MAX_N: usize = 1024;
const MATVEC_SLOPE_MAX: f64 = 1.3;
const INVERSE_SLOPE_MAX: f64 = 1.35;
const MEMORY_SLOPE_MAX: f64 = 1.3;

fn report(id: u32, name: &str, ok: bool, detail: String, secs: f64) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id} {name}: {detail} ({secs:.1} s)");
}

fn cfg(shape: Shape, extents: &[f64], eps: f64) -> ExperimentConfig {
    ExperimentConfig {
        shape,
        extents: extents.to_vec(),
        eps_aca: eps,
        eps_acc: eps,
        svd_sizes: Vec::new(),
        ..ExperimentConfig::default()
    }
}

/// Largest desk geometries under the dense cap.
fn desk_geometries() -> Vec<(Shape, f64)> {
    vec![(Shape::Rod, 16.0), (Shape::Slab, 1.5), (Shape::CubeArray, 2.0)]
}

#[test]
fn criterion_1_representation_accuracy() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (shape, extent) in desk_geometries() {
        let t = Instant::now();
        let c = cfg(shape, &[extent], 1e-4);
        let model = make_model(&c, shape, extent).unwrap();
        assert!(model.n() <= REP_MAX_N);
        let h = build_h2(model.points(), &model, &c.h2_config().unwrap()).unwrap();
        let err = rep_error(&h, &assemble_dense(&model, c.dense_cap).unwrap()).unwrap();
        let secs = t.elapsed().as_secs_f64();
        assert!(secs <= 120.0, "{shape} took {secs:.1} s");
        parts.push(format!("{shape} N={} err={err:.2e}", model.n()));
        worst = worst.max(err);
    }
    let ok = worst <= REP_ERROR_MAX;
    report(1, "representation accuracy", ok, format!("{} <= {REP_ERROR_MAX:.0e}", parts.join(", ")), start.elapsed().as_secs_f64());
    assert!(ok);
}

#[test]
fn criterion_2_rod_rank_constancy() {
    let start = Instant::now();
    let c = cfg(Shape::Rod, &[1.0, 2.0, 4.0, 8.0, 16.0], 1e-5);
    let rows = run_rank_study(&c).unwrap();
    // per tree level, the max basis rank over the sweep; levels without a
    // basis (rank 0, above the first admissible level) are skipped
    let mut by_level: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.experiment == "rank-level") {
        if r.max_rank.unwrap() > 0 {
            by_level.entry(r.level.unwrap()).or_default().push(r.max_rank.unwrap());
        }
    }
    let spread = |v: &[usize]| v.iter().max().unwrap() - v.iter().min().unwrap();
    let worst = by_level.values().map(|v| spread(v)).max().unwrap();
    let global: Vec<usize> =
        rows.iter().filter(|r| r.experiment == "rank-study").map(|r| r.max_rank.unwrap()).collect();
    let ok = worst <= ROD_RANK_SPREAD;
    let secs = start.elapsed().as_secs_f64();
    report(
        2,
        "rod rank constancy",
        ok,
        format!(
            "per-level ranks {by_level:?}, worst spread {worst} <= {ROD_RANK_SPREAD} (global max ranks {global:?}, spread {})",
            spread(&global)
        ),
        secs,
    );
    assert!(ok && secs <= 300.0);
}

#[test]
fn criterion_3_two_body_rank_growth() {
    let start = Instant::now();
    let c = ExperimentConfig::default();
    let ranks: Vec<(f64, usize)> = c
        .svd_sizes
        .iter()
        .map(|&s| {
            let r = two_body_rank(&c, s).unwrap();
            assert_eq!(r.experiment, "two-body-svd");
            (s, r.max_rank.unwrap())
        })
        .collect();
    let ratios: Vec<f64> = ranks.windows(2).map(|w| w[1].1 as f64 / w[0].1 as f64).collect();
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    let ok = worst <= RANK_GROWTH_RATIO;
    let secs = start.elapsed().as_secs_f64();
    report(
        3,
        "two-body rank growth",
        ok,
        format!("(size, rank) {ranks:?}, worst ratio {worst:.2} <= {RANK_GROWTH_RATIO}"),
        secs,
    );
    assert!(ok && secs <= 300.0);
}

#[test]
fn criterion_4_iteration_count() {
    let start = Instant::now();
    let c = cfg(Shape::Rod, &[1.0, 2.0, 4.0, 8.0, 16.0], 1e-4);
    let mut its = Vec::new();
    for &e in &c.extents {
        let model = make_model(&c, Shape::Rod, e).unwrap();
        let h = build_h2(model.points(), &model, &c.h2_config().unwrap()).unwrap();
        let rhs = plane_wave_rhs(&model.geometry, c.k0, Point3::new(1.0, 0.0, 0.0)).unwrap();
        let (_, rep) = bicgstab_solve(|v| matvec(&h, v), &rhs, 1e-3, 100).unwrap();
        assert!(rep.converged, "rod {e}: no convergence");
        its.push(rep.iterations);
    }
    let worst = *its.iter().max().unwrap();
    let ok = worst <= ITERATIONS_MAX;
    let secs = start.elapsed().as_secs_f64();
    report(4, "BiCGStab iterations", ok, format!("iterations {its:?} <= {ITERATIONS_MAX}"), secs);
    assert!(ok && secs <= 180.0);
}

#[test]
fn criterion_5_inverse_accuracy() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(5);
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    for (shape, extent) in desk_geometries() {
        let c = cfg(shape, &[extent], 1e-4);
        let model = make_model(&c, shape, extent).unwrap();
        let h = build_h2(model.points(), &model, &c.h2_config().unwrap()).unwrap();
        let inv = h2_invert(&h).unwrap();
        let res = inverse_residual(&h, &inv, 5, &mut rng).unwrap();
        parts.push(format!("{shape} N={} {res:.2e}", model.n()));
        worst = worst.max(res);
    }
    let ok = worst <= INVERSE_RESIDUAL_MAX;
    let secs = start.elapsed().as_secs_f64();
    report(5, "inverse residual", ok, format!("{} <= {INVERSE_RESIDUAL_MAX:.0e}", parts.join(", ")), secs);
    assert!(ok && secs <= 300.0);
}

fn oracle_geometries() -> Vec<(Shape, f64, f64)> {
    // (shape, extent, voxels per wavelength)
    vec![(Shape::Rod, 8.0, 20.0), (Shape::Slab, 1.0, 20.0), (Shape::CubeArray, 2.0, 14.0)]
}

fn run_checks(names: &[&str]) -> Vec<Check> {
    let mut all = Vec::new();
    for (shape, extent, vpw) in oracle_geometries() {
        let c = ExperimentConfig {
            voxels_per_wavelength: vpw,
            ..cfg(shape, &[extent], 1e-4)
        };
        let checks = verify_geometry(&c, shape, extent).unwrap();
        assert!(checks[0].n <= ORACLE_MAX_N);
        all.extend(checks.into_iter().filter(|c| names.contains(&c.name)));
    }
    all
}

fn summarize(checks: &[Check]) -> (bool, String) {
    let ok = checks.iter().all(Check::passed);
    let text = checks
        .iter()
        .map(|c| format!("{}/{} {:.1e}<={:.0e}", c.shape, c.name, c.value, c.bound))
        .collect::<Vec<_>>()
        .join(", ");
    (ok, text)
}

#[test]
fn criterion_6_oracle_equivalence() {
    let start = Instant::now();
    let checks = run_checks(&["matvec", "product", "direct"]);
    assert_eq!(checks.len(), 9);
    let (ok, text) = summarize(&checks);
    let secs = start.elapsed().as_secs_f64();
    report(6, "oracle equivalence", ok, text, secs);
    assert!(ok && secs <= 300.0);
}

#[test]
fn criterion_7_complexity_slopes() {
    let start = Instant::now();
    let c = ExperimentConfig {
        solver: SolverKind::Direct,
        ..cfg(Shape::Rod, &[2.0, 4.0, 8.0, 16.0, 32.0], 1e-4)
    };
    let rows = run_scaling_study(&c).unwrap();
    let data: Vec<_> = rows.iter().filter(|r| r.experiment == "scaling").collect();
    let ns: Vec<f64> = data.iter().map(|r| r.n.unwrap() as f64).collect();
    let slope = |f: &dyn Fn(&&minrank_h2::bench::BenchRecord) -> f64| {
        loglog_slope(&ns, &data.iter().map(f).collect::<Vec<_>>()).unwrap()
    };
    let mv = slope(&|r| r.matvec_s.unwrap());
    let inv = slope(&|r| r.inverse_s.unwrap());
    let mem = slope(&|r| r.peak_mem.unwrap().value);
    let ok = mv <= MATVEC_SLOPE_MAX && inv <= INVERSE_SLOPE_MAX && mem <= MEMORY_SLOPE_MAX;
    let secs = start.elapsed().as_secs_f64();
    report(
        7,
        "complexity slopes",
        ok,
        format!(
            "N {:?}: matvec {mv:.2} <= {MATVEC_SLOPE_MAX}, inverse {inv:.2} <= {INVERSE_SLOPE_MAX}, memory {mem:.2} <= {MEMORY_SLOPE_MAX}",
            ns.iter().map(|&n| n as usize).collect::<Vec<_>>()
        ),
        secs,
    );
    assert!(ok && secs <= 900.0);
}

#[test]
fn criterion_8_structural_properties() {
    let start = Instant::now();
    let checks = run_checks(&["orthonormality", "nestedness", "tiling", "admissibility", "linearity"]);
    assert_eq!(checks.len(), 15);
    let (ok, text) = summarize(&checks);
    let secs = start.elapsed().as_secs_f64();
    report(8, "structural properties", ok, text, secs);
    assert!(ok && secs <= 60.0);
}
