//! Benchmark harness: workloads, timed suites, footprint comparisons and
//! report serialization.

mod footprint;
mod report;
mod structures;
mod suite;
mod workload;

use thiserror::Error;

pub use footprint::{
    measure_footprints, multimap_ratios, run_footprint, FootprintConfig, FootprintRow,
};
pub use report::{render_report, write_report, Format, Metadata};
pub use structures::{
    build_champ_map, build_map_of_sets, build_multimap, MapOfSets, Probe, Structure,
};
pub use suite::{
    measure, median, median_mad, run_benchmarks, run_suite, BenchRow, Operation, SuiteConfig,
    TimingConfig,
};
pub use workload::{generate_workload, Dataset, Mix, WorkloadSpec, SIZE_EXPONENT_RANGE};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("size exponent {0} outside 1..=23")]
    SizeExponent(u32),
    #[error("invalid mix `{0}`, expected two weights like 50:50")]
    InvalidMix(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{structure} cannot run here: {reason}")]
    Unsupported {
        structure: Structure,
        reason: String,
    },
    #[error("correctness gate failed for {structure} {operation}: {detail}")]
    GateFailed {
        structure: Structure,
        operation: Operation,
        detail: String,
    },
    #[error("{structure} failed validation: {detail}")]
    Invalid {
        structure: Structure,
        detail: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
