use std::collections::{HashMap, HashSet};

use hhamt::bench::{
    generate_workload, render_report, run_benchmarks, BenchError, Format, Metadata, Mix, Operation,
    Structure, SuiteConfig, TimingConfig, WorkloadSpec,
};

fn quick_config(operations: Vec<Operation>) -> SuiteConfig {
    SuiteConfig {
        operations,
        timing: TimingConfig {
            warmup_iterations: 1,
            measure_iterations: 3,
            min_iteration_ns: 1_000,
        },
        ..SuiteConfig::default()
    }
}

#[test]
fn workload_is_deterministic_and_probes_are_well_formed() {
    let spec = WorkloadSpec::default();
    for x in [1, 5, 9] {
        let a = generate_workload(&spec, x, 4).unwrap();
        let b = generate_workload(&spec, x, 4).unwrap();
        assert_eq!(a.entries, b.entries);
        assert_eq!(
            (&a.full, &a.partial, &a.none),
            (&b.full, &b.partial, &b.none)
        );

        let mut values: HashMap<u32, HashSet<u32>> = HashMap::new();
        for &(k, v) in &a.entries {
            assert!(values.entry(k).or_default().insert(v), "duplicate tuple");
        }
        assert_eq!(values.len(), 1 << x);
        assert_eq!(a.key_count, 1 << x);
        assert!(values.values().all(|vs| vs.len() == 1 || vs.len() == 2));
        // Half the keys carry one value, rounding the split up.
        let singles = values.values().filter(|vs| vs.len() == 1).count();
        assert_eq!(singles, (1usize << x).div_ceil(2));

        for probes in [&a.full, &a.partial, &a.none] {
            assert_eq!(probes.len(), spec.burst_size);
        }
        assert!(a.full.iter().all(|(k, v)| values[k].contains(v)));
        assert!(a
            .partial
            .iter()
            .all(|(k, v)| values.get(k).is_some_and(|vs| !vs.contains(v))));
        assert!(a.none.iter().all(|(k, _)| !values.contains_key(k)));
    }
    assert_ne!(
        generate_workload(&spec, 6, 0).unwrap().entries,
        generate_workload(&spec, 6, 1).unwrap().entries
    );
}

#[test]
fn out_of_range_sizes_are_rejected() {
    let spec = WorkloadSpec::default();
    assert!(matches!(
        generate_workload(&spec, 0, 0),
        Err(BenchError::SizeExponent(0))
    ));
    assert!(matches!(
        generate_workload(&spec, 24, 0),
        Err(BenchError::SizeExponent(24))
    ));
}

#[test]
fn every_operation_runs_on_both_multimap_structures() {
    let spec = WorkloadSpec {
        size_exponents: vec![4, 7],
        seeds: 2,
        ..WorkloadSpec::default()
    };
    let structures = [Structure::HhamtMultiMap, Structure::MapOfSets];
    let rows = run_benchmarks(
        &spec,
        &structures,
        &quick_config(Operation::ALL.to_vec()),
        2,
    )
    .unwrap();
    assert_eq!(rows.len(), 2 * 2 * 2 * Operation::ALL.len());
    assert!(rows.iter().all(|r| r.median_ns > 0.0 && r.mad_ns >= 0.0));
    for op in Operation::ALL {
        for s in structures {
            assert_eq!(
                rows.iter()
                    .filter(|r| r.operation == op && r.structure == s)
                    .count(),
                4
            );
        }
    }
}

#[test]
fn champ_map_needs_one_to_one_data() {
    let half = WorkloadSpec {
        size_exponents: vec![4],
        seeds: 1,
        ..WorkloadSpec::default()
    };
    let err = run_benchmarks(
        &half,
        &[Structure::ChampMap],
        &quick_config(vec![Operation::Lookup]),
        1,
    )
    .unwrap_err();
    assert!(matches!(
        err,
        BenchError::Unsupported {
            structure: Structure::ChampMap,
            ..
        }
    ));

    let one = WorkloadSpec {
        mix: Mix::ONE_TO_ONE,
        ..half
    };
    let rows = run_benchmarks(
        &one,
        &Structure::ALL,
        &quick_config(vec![Operation::Lookup, Operation::Delete]),
        1,
    )
    .unwrap();
    assert_eq!(rows.len(), 3 * 2);
}

#[test]
fn reports_render_as_csv_and_json() {
    let spec = WorkloadSpec {
        size_exponents: vec![3],
        seeds: 1,
        ..WorkloadSpec::default()
    };
    let rows = run_benchmarks(
        &spec,
        &[Structure::HhamtMultiMap],
        &quick_config(vec![Operation::Lookup]),
        1,
    )
    .unwrap();
    let meta = Metadata::new("bench", &spec).note("test run");
    let csv = render_report(&rows, Format::Csv, &meta).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("structure,operation,size_exponent,seed,median_ns,mad_ns")
    );
    assert!(lines
        .next()
        .unwrap()
        .starts_with("hhamt_multimap,lookup,3,0,"));

    let json: serde_json::Value =
        serde_json::from_str(&render_report(&rows, Format::Json, &meta).unwrap()).unwrap();
    assert_eq!(json["metadata"]["kind"], "bench");
    assert_eq!(json["metadata"]["notes"][0], "test run");
    assert_eq!(json["metadata"]["config"]["size_exponents"][0], 3);
    assert_eq!(json["rows"][0]["operation"], "lookup");
}
