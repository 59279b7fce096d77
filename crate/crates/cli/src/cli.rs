use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use weylcap_core::LogBase;

#[derive(Debug, Parser)]
#[command(name = "weylcap", version, about = "Minimal output entropy and classical capacity of Weyl channels")]
pub struct Cli {
    /// Logarithm base for every entropy in the report: 2 (bits) or nat.
    #[arg(long, global = true, default_value = "2", value_parser = parse_base)]
    pub base: LogBase,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for optimizer restarts and sample batches (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

fn parse_base(s: &str) -> Result<LogBase, String> {
    s.parse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormulaChoice {
    Auto,
    Qc,
    Deformed,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Marginals, deformation certificate and symmetry residuals of a channel.
    Describe {
        spec: PathBuf,
        /// Seed of the random test state.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Classical capacity from the closed form.
    Capacity {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = FormulaChoice::Auto)]
        formula: FormulaChoice,
    },
    /// Numerical minimal output entropy of the N-fold tensor power.
    MinEntropy {
        spec: PathBuf,
        #[arg(long = "N", visible_alias = "copies", default_value_t = 1)]
        copies: usize,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Closed form, numerical minimum and block bound at tensor power N.
    Additivity {
        spec: PathBuf,
        #[arg(long = "N", visible_alias = "copies", default_value_t = 2)]
        copies: usize,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Append a summary row to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Random checks of the product-channel entropy bound and of data processing.
    Verify {
        /// Channel spec whose marginals give p (alternative to --p).
        spec: Option<PathBuf>,
        /// Comma-separated distribution p, e.g. 0.5,0.3333333333333333,0.16666666666666666
        #[arg(long, value_delimiter = ',', conflicts_with = "spec", required_unless_present = "spec")]
        p: Option<Vec<f64>>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 2)]
        kdim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The worked qutrit deformation: describe, capacity, min-entropy (N=1,2), additivity (N=2).
    ExampleQutrit {
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}
