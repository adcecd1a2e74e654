//! Timed operation suites with correctness gates.

use std::collections::HashMap;
use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::structures::{build_champ_map, build_map_of_sets, build_multimap, Probe};
use super::{generate_workload, BenchError, Dataset, Structure, WorkloadSpec};
use crate::storage::StoragePolicy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    Lookup,
    LookupFail,
    Insert,
    InsertFail,
    Delete,
    DeleteFail,
    IterationKey,
    IterationEntry,
}

impl Operation {
    pub const ALL: [Operation; 8] = [
        Operation::Lookup,
        Operation::LookupFail,
        Operation::Insert,
        Operation::InsertFail,
        Operation::Delete,
        Operation::DeleteFail,
        Operation::IterationKey,
        Operation::IterationEntry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operation::Lookup => "lookup",
            Operation::LookupFail => "lookup_fail",
            Operation::Insert => "insert",
            Operation::InsertFail => "insert_fail",
            Operation::Delete => "delete",
            Operation::DeleteFail => "delete_fail",
            Operation::IterationKey => "iteration_key",
            Operation::IterationEntry => "iteration_entry",
        }
    }

    fn is_iteration(self) -> bool {
        matches!(self, Operation::IterationKey | Operation::IterationEntry)
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operation {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Operation::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown operation `{s}`")))
    }
}

/// Measurement regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingConfig {
    pub warmup_iterations: u32,
    pub measure_iterations: u32,
    /// Each iteration repeats the operation until at least this long has
    /// passed, so short bursts stay above timer resolution.
    pub min_iteration_ns: u64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            warmup_iterations: 10,
            measure_iterations: 20,
            min_iteration_ns: 50_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub operations: Vec<Operation>,
    pub timing: TimingConfig,
    /// Layout policy of the HHAMT multi-map and the CHAMP map.
    pub policy: StoragePolicy,
    /// Layout policy of the map-of-sets baseline.
    pub baseline_policy: StoragePolicy,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            operations: Operation::ALL.to_vec(),
            timing: TimingConfig::default(),
            policy: StoragePolicy::Specialized,
            baseline_policy: StoragePolicy::Specialized,
        }
    }
}

/// One timed cell. Burst operations report time per probe; iterations
/// report time per full traversal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub structure: Structure,
    pub operation: Operation,
    pub size_exponent: u32,
    pub seed: u64,
    pub median_ns: f64,
    pub mad_ns: f64,
}

/// Median of `xs` (sorted in place).
pub fn median(xs: &mut [f64]) -> f64 {
    assert!(!xs.is_empty(), "median of no samples");
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Median and median absolute deviation.
pub fn median_mad(samples: &[f64]) -> (f64, f64) {
    let mut xs = samples.to_vec();
    let m = median(&mut xs);
    let mut dev: Vec<f64> = samples.iter().map(|x| (x - m).abs()).collect();
    (m, median(&mut dev))
}

/// Times `f`, which performs `ops` operations per call, and returns
/// median and MAD in nanoseconds per operation.
pub fn measure<F: FnMut()>(mut f: F, ops: usize, cfg: &TimingConfig) -> (f64, f64) {
    let mut reps: u64 = 1;
    loop {
        let t = Instant::now();
        for _ in 0..reps {
            f();
        }
        if t.elapsed().as_nanos() as u64 >= cfg.min_iteration_ns || reps >= 1 << 24 {
            break;
        }
        reps *= 2;
    }
    for _ in 0..cfg.warmup_iterations {
        for _ in 0..reps {
            f();
        }
    }
    let per_op = (reps * ops as u64) as f64;
    let samples: Vec<f64> = (0..cfg.measure_iterations.max(1))
        .map(|_| {
            let t = Instant::now();
            for _ in 0..reps {
                f();
            }
            t.elapsed().as_nanos() as f64 / per_op
        })
        .collect();
    median_mad(&samples)
}

fn probes(d: &Dataset, op: Operation, structure: Structure) -> &[(u32, u32)] {
    let fail = if structure == Structure::ChampMap {
        &d.none
    } else {
        &d.partial
    };
    match op {
        Operation::Lookup | Operation::InsertFail | Operation::Delete => &d.full,
        Operation::LookupFail | Operation::Insert | Operation::DeleteFail => fail,
        Operation::IterationKey | Operation::IterationEntry => &[],
    }
}

fn gate_failure(structure: Structure, op: Operation, detail: String) -> BenchError {
    BenchError::GateFailed {
        structure,
        operation: op,
        detail,
    }
}

/// Checks that `s` answers `op` correctly on `d` before it may be timed.
fn gate<P: Probe>(
    s: &P,
    structure: Structure,
    op: Operation,
    d: &Dataset,
    model: &HashMap<u32, std::collections::HashSet<u32>>,
) -> Result<(), BenchError> {
    let fail = |detail: String| Err(gate_failure(structure, op, detail));
    if s.tuple_count() != d.tuple_count() || s.key_count() != d.key_count {
        return fail(format!(
            "holds {} tuples / {} keys, expected {} / {}",
            s.tuple_count(),
            s.key_count(),
            d.tuple_count(),
            d.key_count
        ));
    }
    let expected = |k: u32, v: u32| model.get(&k).is_some_and(|vs| vs.contains(&v));
    for &(k, v) in probes(d, op, structure) {
        let present = expected(k, v);
        if s.contains(k, v) != present {
            return fail(format!("lookup of ({k}, {v}) disagrees with the model"));
        }
        match op {
            Operation::Insert | Operation::InsertFail => {
                let t = s.inserted(k, v);
                let grow = !present as usize;
                if !t.contains(k, v) || t.tuple_count() != s.tuple_count() + grow {
                    return fail(format!("insert of ({k}, {v}) is wrong"));
                }
            }
            Operation::Delete | Operation::DeleteFail => {
                let t = s.removed(k, v);
                let shrink = present as usize;
                if t.contains(k, v) || t.tuple_count() + shrink != s.tuple_count() {
                    return fail(format!("delete of ({k}, {v}) is wrong"));
                }
            }
            _ => {}
        }
    }
    match op {
        Operation::Lookup
            if !probes(d, op, structure)
                .iter()
                .all(|&(k, v)| expected(k, v)) =>
        {
            return fail("full-match probes are not all present".into());
        }
        Operation::IterationKey if s.walk_keys() != d.key_count => {
            return fail("key iteration is incomplete".into());
        }
        Operation::IterationEntry => {
            if s.walk_entries() != d.tuple_count() {
                return fail("entry iteration is incomplete".into());
            }
            let mut got = s.entries();
            let mut want = d.entries.clone();
            got.sort_unstable();
            want.sort_unstable();
            if got != want {
                return fail("entry iteration differs from the model".into());
            }
        }
        _ => {}
    }
    Ok(())
}

fn time_op<P: Probe>(
    s: &P,
    structure: Structure,
    op: Operation,
    d: &Dataset,
    t: &TimingConfig,
) -> (f64, f64) {
    let ps = probes(d, op, structure);
    match op {
        Operation::Lookup | Operation::LookupFail => measure(
            || {
                for &(k, v) in ps {
                    black_box(s.contains(black_box(k), black_box(v)));
                }
            },
            ps.len(),
            t,
        ),
        Operation::Insert | Operation::InsertFail => measure(
            || {
                for &(k, v) in ps {
                    black_box(s.inserted(black_box(k), black_box(v)));
                }
            },
            ps.len(),
            t,
        ),
        Operation::Delete | Operation::DeleteFail => measure(
            || {
                for &(k, v) in ps {
                    black_box(s.removed(black_box(k), black_box(v)));
                }
            },
            ps.len(),
            t,
        ),
        Operation::IterationKey => measure(
            || {
                black_box(s.walk_keys());
            },
            1,
            t,
        ),
        Operation::IterationEntry => measure(
            || {
                black_box(s.walk_entries());
            },
            1,
            t,
        ),
    }
}

fn run_on<P: Probe>(
    s: &P,
    structure: Structure,
    d: &Dataset,
    config: &SuiteConfig,
) -> Result<Vec<BenchRow>, BenchError> {
    let model = d.model();
    for &op in &config.operations {
        gate(s, structure, op, d, &model)?;
    }
    Ok(config
        .operations
        .iter()
        .map(|&op| {
            debug_assert!(op.is_iteration() || !probes(d, op, structure).is_empty());
            let (median_ns, mad_ns) = time_op(s, structure, op, d, &config.timing);
            BenchRow {
                structure,
                operation: op,
                size_exponent: d.size_exponent,
                seed: d.seed,
                median_ns,
                mad_ns,
            }
        })
        .collect())
}

/// Builds `structure` from `dataset`, gates every requested operation
/// against the reference model, then times them.
pub fn run_suite(
    structure: Structure,
    dataset: &Dataset,
    config: &SuiteConfig,
) -> Result<Vec<BenchRow>, BenchError> {
    match structure {
        Structure::HhamtMultiMap => run_on(
            &build_multimap(dataset, config.policy),
            structure,
            dataset,
            config,
        ),
        Structure::MapOfSets => run_on(
            &build_map_of_sets(dataset, config.baseline_policy),
            structure,
            dataset,
            config,
        ),
        Structure::ChampMap => run_on(
            &build_champ_map(dataset, config.policy)?,
            structure,
            dataset,
            config,
        ),
    }
}

/// Runs every `(size, seed, structure)` cell of `spec`, using up to `jobs`
/// threads across cells. Rows come back in cell order.
pub fn run_benchmarks(
    spec: &WorkloadSpec,
    structures: &[Structure],
    config: &SuiteConfig,
    jobs: usize,
) -> Result<Vec<BenchRow>, BenchError> {
    spec.validate()?;
    if structures.contains(&Structure::ChampMap) && !spec.mix.is_one_to_one() {
        return Err(BenchError::Unsupported {
            structure: Structure::ChampMap,
            reason: format!("mix {} is not 1:1", spec.mix),
        });
    }
    let cells: Vec<(u32, u64)> = spec
        .size_exponents
        .iter()
        .flat_map(|&x| (0..spec.seeds as u64).map(move |s| (x, s)))
        .collect();
    let run_cell = |&(x, seed): &(u32, u64)| -> Result<Vec<BenchRow>, BenchError> {
        let d = generate_workload(spec, x, seed)?;
        log::debug!("bench cell 2^{x} seed {seed}: {} tuples", d.tuple_count());
        let mut rows = Vec::new();
        for &s in structures {
            rows.extend(run_suite(s, &d, config)?);
        }
        Ok(rows)
    };
    let per_cell: Vec<Result<Vec<BenchRow>, BenchError>> = if jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| BenchError::Config(e.to_string()))?;
        pool.install(|| cells.par_iter().map(run_cell).collect())
    } else {
        cells.iter().map(run_cell).collect()
    };
    let mut rows = Vec::new();
    for r in per_cell {
        rows.extend(r?);
    }
    Ok(rows)
}
