use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "geolab",
    version,
    about = "Prime geodesic counting experiments for PSL(2, Z)"
)]
struct Cli {
    /// Worker threads for table building and scans.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Binary trace-table cache, reused when it covers the request.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    /// Zeros file; defaults to $GEOLAB_ZEROS, then the bundled table.
    #[arg(long, global = true)]
    zeros: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Counting functions at x and the explicit-formula comparison.
    Count {
        #[arg(long)]
        x: f64,
    },
    /// Export the trace table as CSV.
    Table {
        #[arg(long)]
        t_max: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated explicit formula against exact ψ.
    Explicit {
        #[arg(long)]
        x: f64,
        #[arg(long = "T")]
        t: f64,
        #[arg(long)]
        uncapped: bool,
    },
    /// Error-term scan over a log-uniform grid.
    Scan(ScanArgs),
    /// Exceptional-set measure per window.
    Exceptional {
        #[arg(long)]
        n_min: u32,
        #[arg(long)]
        n_max: u32,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Window mean squares over an (n, T) grid.
    Eq4 {
        #[arg(long)]
        n_min: u32,
        #[arg(long)]
        n_max: u32,
        #[arg(long = "T-list", value_delimiter = ',', required = true)]
        t_list: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the Gallagher inequality on a coefficient file or random sums.
    Gallagher(GallagherArgs),
    /// Load a zeros file and report its Weyl-law diagnostics.
    ValidateZeros,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    x_min: f64,
    #[arg(long)]
    x_max: f64,
    #[arg(long, default_value_t = 8)]
    per_decade: u32,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long)]
    uncapped: bool,
    /// Constant multiplying the truncation height.
    #[arg(long, default_value_t = 1.0)]
    t_scale: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "random"])))]
struct GallagherArgs {
    /// CSV with header nu,re,im.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Number of random sums to check.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    theta: f64,
    #[arg(long = "U")]
    u: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
