use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coarse_cli::{cmd_compare, cmd_oracle, cmd_pricing, cmd_solve, cmd_sweep, Overrides, SeedFrom};
use coarse_core::analysis::ComparisonKind;

#[derive(Parser)]
#[command(name = "coarse", version, about = "Optimal coarse information structures and finite menus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Directory for output files.
    #[arg(long, global = true, env = "COARSE_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Starting point of the cutoff iteration.
    #[arg(long, global = true, value_enum)]
    seed_from: Option<SeedFrom>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    LikelihoodRatio,
    UniformVariability,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem; writes solution.json, solution.csv and plot.csv.
    Solve { spec: PathBuf },
    /// Solve for every N in a range; writes sweep.json and sweep.csv.
    Sweep {
        spec: PathBuf,
        #[arg(long)]
        n_from: usize,
        #[arg(long)]
        n_to: usize,
    },
    /// Comparative statics between a base and a shifted problem.
    Compare {
        base: PathBuf,
        shifted: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
    },
    /// Brute-force grid search for comparison with the solver.
    Oracle {
        spec: PathBuf,
        /// Grid points per unit; defaults by N.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Optimal finite menu for a pricing spec.
    Pricing { spec: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let ov = Overrides { tol: c.tol, max_iter: c.max_iter, seed_from: c.seed_from };
    let out = c.out_dir.as_path();
    let result = match &cli.command {
        Command::Solve { spec } => cmd_solve(spec, out, &ov),
        Command::Sweep { spec, n_from, n_to } => cmd_sweep(spec, *n_from, *n_to, out, &ov),
        Command::Compare { base, shifted, kind } => {
            let kind = match kind {
                KindArg::LikelihoodRatio => ComparisonKind::LikelihoodRatio,
                KindArg::UniformVariability => ComparisonKind::UniformVariability,
            };
            cmd_compare(base, shifted, kind, out, &ov)
        }
        Command::Oracle { spec, grid } => cmd_oracle(spec, *grid, out, &ov),
        Command::Pricing { spec } => cmd_pricing(spec, out, &ov),
    };
    match result {
        Ok(o) => {
            // a closed pipe on stdout is not an error worth reporting
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", o.summary);
            for f in o.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
