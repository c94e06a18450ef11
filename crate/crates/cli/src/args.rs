use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Consistent-histories analysis of measurements with commuting partners.
#[derive(Debug, Parser)]
#[command(name = "histories", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the three-state apparatus in context B, C or both.
    Canonical(CanonicalArgs),
    /// Run the experiment for an observable and commuting partners from files.
    Noncontext(NoncontextArgs),
    /// Evaluate the decoherence matrix of a history family file.
    Consistency(ConsistencyArgs),
    /// Spectral decomposition of a hermitian matrix file.
    Spectral(SpectralArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ContextChoice {
    #[value(name = "B")]
    B,
    #[value(name = "C")]
    C,
    Both,
}

#[derive(Debug, Args)]
pub struct RandomStates {
    /// Draw this many initial states uniformly from the unit sphere.
    #[arg(long, value_name = "N", requires = "seed")]
    pub random: Option<usize>,
    /// Seed for --random (required with it).
    #[arg(long, value_name = "S", requires = "random")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CanonicalArgs {
    #[arg(long, value_enum, default_value = "both")]
    pub context: ContextChoice,
    /// Named initial state (e1, e2, e3, c2, c3, uniform). Repeatable.
    /// Defaults to the five eigenstates e1, e2, e3, c2, c3.
    #[arg(long = "state", value_name = "NAME", conflicts_with = "random")]
    pub states: Vec<String>,
    #[command(flatten)]
    pub random: RandomStates,
    /// Report destination; `-` writes to standard output.
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct NoncontextArgs {
    /// Matrix file for the measured observable A.
    #[arg(short = 'a', long = "observable", value_name = "FILE")]
    pub observable: PathBuf,
    /// Matrix file for a partner commuting with A. Repeatable.
    #[arg(short = 'p', long = "partner", value_name = "FILE", required = true)]
    pub partners: Vec<PathBuf>,
    /// Without --random the computational basis states are used.
    #[command(flatten)]
    pub random: RandomStates,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    #[arg(long, value_name = "FILE")]
    pub family: PathBuf,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
    #[arg(long, default_value = "-")]
    pub out: String,
}
