use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hhamt::bench::{Format, Mix, Operation, Structure};
use hhamt::StoragePolicy;

#[derive(Debug, Parser)]
#[command(
    name = "hhamt",
    version,
    about = "Heterogeneous HAMT benchmarks and analyses"
)]
pub struct Cli {
    /// More log output (repeat for debug level).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn verbosity(&self) -> log::LevelFilter {
        match self.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            _ => log::LevelFilter::Debug,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time the operation suite on generated workloads.
    Bench(BenchArgs),
    /// Compare modeled footprints of the multi-map and the map-of-sets baseline.
    Footprint(FootprintArgs),
    /// Compute dominators of edge-list graphs or generated CFGs.
    Dominators(DominatorArgs),
    /// Run the built-in invariant and oracle checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Specialized,
    Generic,
}

impl From<PolicyArg> for StoragePolicy {
    fn from(p: PolicyArg) -> StoragePolicy {
        match p {
            PolicyArg::Specialized => StoragePolicy::Specialized,
            PolicyArg::Generic => StoragePolicy::GenericOnly,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Output file; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    pub output: PathBuf,
}

/// Parses `a..b` (inclusive) or a single exponent `a`.
pub fn parse_sizes(s: &str) -> Result<RangeInclusive<u32>, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| format!("invalid size exponent `{t}`"))
    };
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let x = parse(s)?;
            (x, x)
        }
    };
    if lo > hi {
        return Err(format!("empty size range `{s}`"));
    }
    Ok(lo..=hi)
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Size exponents `a..b`; sizes are 2^x keys.
    #[arg(long, default_value = "1..18", value_parser = parse_sizes)]
    pub sizes: RangeInclusive<u32>,
    #[arg(long, default_value_t = 5)]
    pub seeds: u32,
    /// Weights of 1:1 and 1:2 keys.
    #[arg(long, default_value = "50:50")]
    pub mix: Mix,
    #[arg(long, default_value_t = 8)]
    pub burst: usize,
    /// Structures to measure (comma separated).
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "hhamt_multimap,map_of_sets"
    )]
    pub structures: Vec<Structure>,
    /// Operations to measure (comma separated); all by default.
    #[arg(long, value_delimiter = ',')]
    pub operations: Vec<Operation>,
    #[arg(long, default_value_t = 10)]
    pub warmup: u32,
    #[arg(long, default_value_t = 20)]
    pub measure: u32,
    /// Minimum duration of one measured iteration, in microseconds.
    #[arg(long, default_value_t = 50)]
    pub min_iteration_us: u64,
    #[arg(long, value_enum, default_value = "specialized")]
    pub policy: PolicyArg,
    #[arg(long, value_enum, default_value = "specialized")]
    pub baseline_policy: PolicyArg,
    /// Worker threads across (size, seed) cells.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FootprintArgs {
    #[arg(long, default_value = "6..16", value_parser = parse_sizes)]
    pub sizes: RangeInclusive<u32>,
    #[arg(long, default_value = "50:50")]
    pub mix: Mix,
    /// Dataset seed used at every size.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "specialized")]
    pub policy: PolicyArg,
    #[arg(long, value_enum, default_value = "specialized")]
    pub baseline_policy: PolicyArg,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DominatorArgs {
    /// Edge-list files or directories of them.
    #[arg(long)]
    pub graph: Vec<PathBuf>,
    /// Generate random CFGs with these vertex counts (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub random: Vec<u32>,
    /// Generated graphs per vertex count.
    #[arg(long, default_value_t = 10)]
    pub count: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_ranges() {
        assert_eq!(parse_sizes("1..18"), Ok(1..=18));
        assert_eq!(parse_sizes("6..=16"), Ok(6..=16));
        assert_eq!(parse_sizes("9"), Ok(9..=9));
        assert!(parse_sizes("5..2").is_err());
        assert!(parse_sizes("a..b").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
