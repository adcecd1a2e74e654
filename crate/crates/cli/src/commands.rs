use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hhamt::bench::{
    run_benchmarks, run_footprint, write_report, FootprintConfig, Metadata, Operation, SuiteConfig,
    TimingConfig, WorkloadSpec,
};
use hhamt::dominators::{analyze_all, generated_cfgs, parse_edge_list, CfgGraph};
use hhamt::selftest::{run_selftest, Scale};
use hhamt::FootprintModel;
use serde::Serialize;

use crate::args::{BenchArgs, Command, DominatorArgs, FootprintArgs, OutputArgs, SelftestArgs};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Bench(a) => bench(a),
        Command::Footprint(a) => footprint(a),
        Command::Dominators(a) => dominators(a),
        Command::Selftest(a) => selftest(a),
    }
}

fn emit<T: Serialize>(rows: &[T], meta: &Metadata, out: &OutputArgs) -> Result<()> {
    if out.output.as_os_str() == "-" {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        write_report(rows, out.format.into(), meta, &mut lock)?;
        lock.flush()?;
    } else {
        let file = fs::File::create(&out.output)
            .with_context(|| format!("cannot create {}", out.output.display()))?;
        let mut w = io::BufWriter::new(file);
        write_report(rows, out.format.into(), meta, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn footprint_inputs(a: &FootprintArgs) -> (WorkloadSpec, FootprintConfig) {
    let spec = WorkloadSpec {
        size_exponents: a.sizes.clone().collect(),
        seeds: 1,
        mix: a.mix,
        ..WorkloadSpec::default()
    };
    let config = FootprintConfig {
        model: FootprintModel::default(),
        policy: a.policy.into(),
        baseline_policy: a.baseline_policy.into(),
        seed: a.seed,
    };
    (spec, config)
}

#[derive(Serialize)]
struct BenchConfig<'a> {
    workload: &'a WorkloadSpec,
    suite: &'a SuiteConfig,
    structures: &'a [hhamt::bench::Structure],
    jobs: usize,
}

fn bench(a: BenchArgs) -> Result<()> {
    let spec = WorkloadSpec {
        size_exponents: a.sizes.clone().collect(),
        seeds: a.seeds,
        mix: a.mix,
        burst_size: a.burst,
    };
    let operations = if a.operations.is_empty() {
        Operation::ALL.to_vec()
    } else {
        a.operations.clone()
    };
    let suite = SuiteConfig {
        operations,
        timing: TimingConfig {
            warmup_iterations: a.warmup,
            measure_iterations: a.measure,
            min_iteration_ns: a.min_iteration_us * 1000,
        },
        policy: a.policy.into(),
        baseline_policy: a.baseline_policy.into(),
    };
    let rows = run_benchmarks(&spec, &a.structures, &suite, a.jobs)?;
    let config = BenchConfig {
        workload: &spec,
        suite: &suite,
        structures: &a.structures,
        jobs: a.jobs,
    };
    let meta = Metadata::new("bench", &config)
        .note("wall-clock medians and MAD per operation; iteration rows time one full traversal")
        .note("no garbage-collection control between iterations");
    emit(&rows, &meta, &a.out)
}

fn footprint(a: FootprintArgs) -> Result<()> {
    let (spec, config) = footprint_inputs(&a);
    let rows = run_footprint(&spec, &config)?;
    #[derive(Serialize)]
    struct Config<'a> {
        workload: &'a WorkloadSpec,
        footprint: &'a FootprintConfig,
    }
    let meta = Metadata::new(
        "footprint",
        &Config {
            workload: &spec,
            footprint: &config,
        },
    )
    .note("ratio_vs_baseline = map_of_sets words / structure words");
    emit(&rows, &meta, &a.out)
}

fn graph_files(path: &Path) -> Result<Vec<PathBuf>> {
    let meta = fs::metadata(path).with_context(|| format!("cannot read {}", path.display()))?;
    if !meta.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(path).with_context(|| format!("cannot read {}", path.display()))? {
        let p = entry?.path();
        if p.is_file() {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

fn load_graph(path: &Path) -> Result<(String, CfgGraph)> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let g =
        parse_edge_list(&text).with_context(|| format!("malformed graph {}", path.display()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok((name, g))
}

fn dominators(a: DominatorArgs) -> Result<()> {
    if a.graph.is_empty() && a.random.is_empty() {
        bail!("nothing to analyze: pass --graph and/or --random");
    }
    let mut graphs = Vec::new();
    for p in &a.graph {
        for f in graph_files(p)? {
            graphs.push(load_graph(&f)?);
        }
    }
    graphs.extend(generated_cfgs(&a.random, a.count, a.seed));
    let rows = analyze_all(&graphs, a.jobs)?;
    for r in rows.iter().filter(|r| r.unreachable > 0) {
        log::warn!(
            "{}: {} vertices unreachable from the entry are excluded",
            r.graph_name,
            r.unreachable
        );
    }
    #[derive(Serialize)]
    struct Config<'a> {
        graphs: Vec<String>,
        random: &'a [u32],
        count: u64,
        seed: u64,
    }
    let meta = Metadata::new(
        "dominators",
        &Config {
            graphs: a.graph.iter().map(|p| p.display().to_string()).collect(),
            random: &a.random,
            count: a.count,
            seed: a.seed,
        },
    )
    .note("every row was checked against a boolean-matrix reference solver");
    emit(&rows, &meta, &a.out)
}

fn selftest(a: SelftestArgs) -> Result<()> {
    let results = run_selftest(Scale::QUICK, a.seed);
    for r in &results {
        let mark = if r.passed { "PASS" } else { "FAIL" };
        eprintln!("{mark} {}: {}", r.name, r.detail);
    }
    let meta = Metadata::new("selftest", &Scale::QUICK);
    emit(&results, &meta, &a.out)?;
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        bail!("{failed} self-test check(s) failed");
    }
    Ok(())
}
