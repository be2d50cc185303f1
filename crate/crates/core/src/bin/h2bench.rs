use clap::{Parser, Subcommand};
use minrank_h2::bench::{
    emit_csv, run_rank_study, run_scaling_study, run_solve, run_verify, BenchRecord, ExperimentConfig,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "h2bench", about = "H2 matrix rank, scaling and solve studies")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// key = value configuration file
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. --set extents=1,2,4
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Per-level ranks over a size sweep plus the two-body SVD study
    RankStudy,
    /// Build, matvec, solve and inverse timings with log-log fits
    ScalingStudy,
    /// Solve for a plane-wave excitation on the first configured size
    Solve,
    /// Dense-oracle and structural checks
    Verify,
}

fn config(cli: &Cli) -> minrank_h2::error::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    for o in &cli.overrides {
        cfg.set_pair(o)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> minrank_h2::error::Result<ExitCode> {
    let cfg = config(cli)?;
    let (records, code): (Vec<BenchRecord>, ExitCode) = match cli.cmd {
        Cmd::RankStudy => (run_rank_study(&cfg)?, ExitCode::SUCCESS),
        Cmd::ScalingStudy => (run_scaling_study(&cfg)?, ExitCode::SUCCESS),
        Cmd::Solve => {
            let out = run_solve(&cfg)?;
            if let Some(d) = out.discrepancy {
                println!("iterative/direct discrepancy {d:.3e}");
            }
            let code = if out.converged {
                ExitCode::SUCCESS
            } else {
                eprintln!("iterative solver did not converge");
                ExitCode::from(2)
            };
            (out.records, code)
        }
        Cmd::Verify => {
            let (checks, records) = run_verify(&cfg)?;
            let mut ok = true;
            for c in &checks {
                let tag = if c.passed() { "PASS" } else { "FAIL" };
                println!("{tag} {:<15} {} N={:<5} value={:.3e} bound={:.1e}", c.name, c.shape, c.n, c.value, c.bound);
                ok &= c.passed();
            }
            (records, if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    };
    emit_csv(&records, &cfg.output)?;
    println!("wrote {} rows to {}", records.len(), cfg.output.display());
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
