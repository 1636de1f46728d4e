mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "krcrit", version, about = "Critical points of the Kirchhoff-Routh function on domains with a small hole")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for seeds and scenarios.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Output table format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output directory.
    #[arg(long, short, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Exit with status 1 on any flagged mismatch.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Green function diagnostics: boundary residual, symmetry and the boundary identity.
    GreenCheck {
        #[arg(long, visible_alias = "domain")]
        config: PathBuf,
        /// Writes the fitted representation as JSON.
        #[arg(long)]
        dump_green: Option<PathBuf>,
    },
    /// Enumerates and classifies the critical points for one ε.
    Find {
        #[arg(long, visible_alias = "domain")]
        config: PathBuf,
        /// Overrides vortices.eps.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        seed_density: Option<usize>,
        /// Writes locations.svg.
        #[arg(long)]
        plot: bool,
    },
    /// Runs an ε-sweep against a theorem's predictions.
    Sweep {
        #[arg(long, visible_alias = "domain")]
        config: PathBuf,
        #[arg(long)]
        seed_density: Option<usize>,
        /// Writes scaling.svg and locations.svg.
        #[arg(long)]
        plot: bool,
    },
    /// Zero table of h(s,·) and the fold thresholds on the unit disk.
    DiskType2 {
        #[arg(long, default_value_t = 1.0)]
        lambda1: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda2: f64,
        /// Hole positions s = |P|; defaults to a grid on [0.80, 0.995].
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
    },
    /// Prints M0, M̃, M̄, M1 and their eigen data.
    Matrices {
        #[arg(long, visible_alias = "domain")]
        config: PathBuf,
    },
    /// Merges find and sweep JSON outputs into one CSV summary.
    Report {
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "summary.csv")]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("krcrit: {e}");
            ExitCode::from(e.status())
        }
    }
}
