//! Rank of the interaction between two separated cubes as they grow.

use minrank_h2::bench::{two_body_rank, ExperimentConfig, TWO_BODY_EPS};

fn main() -> minrank_h2::error::Result<()> {
    let cfg = ExperimentConfig {
        svd_lattice: 10,
        ..ExperimentConfig::default()
    };
    println!("edge (wavelengths)  rank at {TWO_BODY_EPS:e}");
    for size in [0.25, 0.5, 1.0, 2.0] {
        let rec = two_body_rank(&cfg, size)?;
        println!("{size:>18}  {}", rec.max_rank.unwrap_or(0));
    }
    Ok(())
}
