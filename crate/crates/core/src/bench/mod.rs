//! Desk-scale experiment harness: rank, scaling and solve studies with CSV
//! output, plus the dense-oracle verification suite.

mod config;
mod record;
mod studies;

pub use config::{ExperimentConfig, SolverKind};
pub use record::{emit_csv, parse_csv, read_csv, write_csv, BenchRecord, PeakMem, CSV_HEADER};
pub use studies::{
    inverse_residual, loglog_slope, make_model, median_time, run_rank_study, run_scaling_study, run_solve, run_verify,
    scaling_fit, two_body_points, two_body_rank, verify_geometry, write_solution, Check, SolveOutcome, TWO_BODY_EPS,
};
