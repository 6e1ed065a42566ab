//! `chainscope` command-line front end.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use chainscope::{Error, JumpPolicy, Mode};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "chainscope", version)]
#[command(about = "Chain recurrence, mixing and factor analysis for relations on finite metric spaces")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Built-in system: rotation, doubling or grid_map.
    #[arg(long, global = true, conflicts_with = "input")]
    pub system: Option<String>,

    /// System spec (JSON with "kind") or relation file (JSON edge list or CSV).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Grid size.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,

    /// Rotation number, or "golden".
    #[arg(long, global = true)]
    pub alpha: Option<String>,

    /// Force (true) or disable (false) the coprime grid shift for rotations.
    #[arg(long, global = true)]
    pub minimal: Option<bool>,

    /// arc, sqrt_distorted or discrete.
    #[arg(long, global = true)]
    pub metric: Option<String>,

    /// Distance table CSV (header row of labels) to use as the metric.
    #[arg(long, global = true)]
    pub metric_table: Option<PathBuf>,

    /// nearest or outer:L.
    #[arg(long, global = true)]
    pub scheme: Option<String>,

    /// One or more scales, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub epsilon: Vec<f64>,

    /// Grid sizes (comma separated) or a JSON schedule file.
    #[arg(long, global = true)]
    pub schedule: Option<String>,

    /// bound or length.
    #[arg(long, global = true, default_value = "length")]
    pub mode: Mode,

    /// free-initial or anchored.
    #[arg(long, global = true, default_value = "free-initial")]
    pub policy: JumpPolicy,

    /// complete, knn(k) or auto.
    #[arg(long, global = true, default_value = "auto")]
    pub jump_graph: String,

    /// Values at or below this count as zero.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub numerical_zero: Option<f64>,

    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = "chainscope-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Transitivity and mixing verdicts with per-scale evidence.
    Classify {
        /// Also compute base-point and reverse-direction diagnostics for rho.
        #[arg(long)]
        diagnostics: bool,
    },
    /// Barrier field over all sources.
    Barrier,
    /// Cyclic factor at a scale, or the isometric factor of rho/theta.
    Factor {
        /// cyclic or isometric.
        #[arg(long, default_value = "cyclic")]
        factor: String,
    },
    /// Proximality, regional proximality, R_n and weak mixing.
    Section4,
    /// Refinement study over grid sizes.
    Study {
        /// Quantities, comma separated (theta_max, rho_max, period, scc_count).
        #[arg(long, value_delimiter = ',')]
        quantities: Vec<String>,
    },
    /// Distance table and metric axioms.
    Metrics {
        /// Also write d_f truncated at this many iterations.
        #[arg(long)]
        df_iterations: Option<usize>,
    },
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Capacity { .. } => 3,
        Error::Hypothesis(_)
        | Error::NotChainTransitive { .. }
        | Error::NoFactor
        | Error::InconsistentQuotient(_)
        | Error::NotFunctional(_)
        | Error::NoWitness { .. } => 4,
        _ => 2,
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").replace('"', "'")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if code != 0 {
                eprintln!("chainscope-error tag=usage code=2 message=\"{}\"", one_line(&e.kind().to_string()));
                return ExitCode::from(2);
            }
            return ExitCode::SUCCESS;
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("chainscope-error tag={} code={code} message=\"{}\"", e.tag(), one_line(&e.to_string()));
            ExitCode::from(code)
        }
    }
}
