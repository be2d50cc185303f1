//! Timings along a rod sweep, written as CSV to stdout.

use minrank_h2::bench::{run_scaling_study, write_csv, ExperimentConfig, SolverKind};

fn main() -> minrank_h2::error::Result<()> {
    let cfg = ExperimentConfig {
        extents: vec![2.0, 4.0, 8.0, 16.0],
        solver: SolverKind::Both,
        ..ExperimentConfig::default()
    };
    let rows = run_scaling_study(&cfg)?;
    write_csv(&rows, std::io::stdout())
}
