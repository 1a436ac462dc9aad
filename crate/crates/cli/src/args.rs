use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "modeflux", version, about = "Channel ensembles and link analyses for OAM mode-multiplexed FSO links")]
pub struct Cli {
    /// Cap on worker threads (outputs do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a channel ensemble and write it to the cache.
    Ensemble(EnsembleArgs),
    /// Average per-channel rates and AAR over a power sweep (CSV).
    Rates(RatesArgs),
    /// Best transmit set for one size or a range of sizes (JSON).
    Optimize(OptimizeArgs),
    /// Diversity-set search, outage and outage-rate tables (CSV).
    Diversity(DiversityArgs),
    /// Phase-screen and coupling-phase diagnostics (CSV).
    Validate(ValidateArgs),
}

/// Where the ensemble lives: an explicit file, or the default name for a config.
#[derive(Debug, Args)]
pub struct Source {
    /// Experiment config (TOML). Also supplies the detection parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Ensemble cache file. Defaults to the config's file in $MODEFLUX_CACHE_DIR.
    #[arg(long)]
    pub cache: Option<PathBuf>,

    /// Replace the base seed of the config.
    #[arg(long)]
    pub seed_override: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub source: Source,

    /// Output cache file (same as --cache).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Regenerate even if a matching cache exists.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub source: Source,

    /// Transmit set, e.g. "-10,0,10".
    #[arg(long, allow_hyphen_values = true)]
    pub tx: String,

    /// Transmit powers in dBm: a list "-10,0,5" or a sweep "start:stop:step".
    #[arg(long, allow_hyphen_values = true, default_value = "-30:30:1")]
    pub pt_dbm: String,

    /// Write CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub source: Source,

    /// Set size, or a range "lo..hi" (inclusive) to also pick the best size.
    #[arg(long)]
    pub n: String,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiversityArgs {
    #[command(flatten)]
    pub source: Source,

    /// Transmit set, e.g. "-10,0,10".
    #[arg(long, allow_hyphen_values = true)]
    pub tx: String,

    /// Channel (transmitted mode state) to combine for.
    #[arg(long, allow_hyphen_values = true)]
    pub channel: i32,

    #[arg(long, default_value_t = 7)]
    pub max_size: usize,

    /// EFF gain (dB) below which the search stops adding branches.
    #[arg(long, default_value_t = 0.3)]
    pub saturation_delta: f64,

    /// Candidate branches within this many states of the channel.
    #[arg(long, default_value_t = 5)]
    pub window: u32,

    /// Search all states instead of the window.
    #[arg(long)]
    pub unrestricted: bool,

    /// Transmit powers in dBm for the outage table.
    #[arg(long, allow_hyphen_values = true, default_value = "-20:10:1")]
    pub pt_dbm: String,

    /// Outage SINR threshold in dB.
    #[arg(long, allow_hyphen_values = true, default_value_t = modeflux::diversity::DEFAULT_OUTAGE_THRESHOLD_DB)]
    pub threshold_db: f64,

    /// Outage level of the outage achievable rate.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,

    /// Write the search table here and the outage table next to it (`-outage` suffix).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub source: Source,

    /// Phase screens used for the structure function.
    #[arg(long, default_value_t = 200)]
    pub screens: usize,

    #[arg(long)]
    pub out: Option<PathBuf>,
}
