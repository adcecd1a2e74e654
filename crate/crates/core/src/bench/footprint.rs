//! Modeled memory footprint of the multi-map against the map-of-sets baseline.

use serde::{Deserialize, Serialize};

use super::structures::{build_champ_map, build_map_of_sets, build_multimap};
use super::{generate_workload, BenchError, Structure, WorkloadSpec};
use crate::storage::{FootprintModel, FootprintReport, StoragePolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FootprintConfig {
    pub model: FootprintModel,
    /// Layout policy of the multi-map (and of the CHAMP map on 1:1 data).
    pub policy: StoragePolicy,
    /// Layout policy of the map-of-sets baseline.
    pub baseline_policy: StoragePolicy,
    /// Seed of the dataset measured at every size.
    pub seed: u64,
}

impl Default for FootprintConfig {
    fn default() -> Self {
        FootprintConfig {
            model: FootprintModel::default(),
            policy: StoragePolicy::Specialized,
            baseline_policy: StoragePolicy::Specialized,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FootprintRow {
    pub structure: Structure,
    pub size_exponent: u32,
    pub words_total: u64,
    pub nodes: u64,
    pub slots: u64,
    /// Baseline words divided by this structure's words.
    pub ratio_vs_baseline: f64,
}

impl FootprintRow {
    fn new(structure: Structure, x: u32, r: &FootprintReport, baseline_words: u64) -> Self {
        FootprintRow {
            structure,
            size_exponent: x,
            words_total: r.words_total,
            nodes: r.nodes,
            slots: r.slots,
            ratio_vs_baseline: baseline_words as f64 / r.words_total as f64,
        }
    }
}

/// Multi-map and baseline footprints at one size, after validating both.
pub fn measure_footprints(
    spec: &WorkloadSpec,
    size_exponent: u32,
    config: &FootprintConfig,
) -> Result<(FootprintReport, FootprintReport), BenchError> {
    let d = generate_workload(spec, size_exponent, config.seed)?;
    let mm = build_multimap(&d, config.policy);
    mm.validate()
        .map_err(|v| gate(Structure::HhamtMultiMap, v.to_string()))?;
    if mm.tuple_count() != d.tuple_count() {
        return Err(gate(Structure::HhamtMultiMap, "tuple count differs".into()));
    }
    let base = build_map_of_sets(&d, config.baseline_policy);
    base.map()
        .validate()
        .map_err(|v| gate(Structure::MapOfSets, v.to_string()))?;
    for set in base.map().values() {
        set.validate()
            .map_err(|v| gate(Structure::MapOfSets, v.to_string()))?;
    }
    Ok((
        mm.footprint_with(config.model),
        base.footprint_with(config.model),
    ))
}

fn gate(structure: Structure, detail: String) -> BenchError {
    BenchError::Invalid { structure, detail }
}

/// One baseline row and one multi-map row per size; on 1:1 data also a
/// CHAMP map row.
pub fn run_footprint(
    spec: &WorkloadSpec,
    config: &FootprintConfig,
) -> Result<Vec<FootprintRow>, BenchError> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &x in &spec.size_exponents {
        let (mm, base) = measure_footprints(spec, x, config)?;
        rows.push(FootprintRow::new(
            Structure::MapOfSets,
            x,
            &base,
            base.words_total,
        ));
        rows.push(FootprintRow::new(
            Structure::HhamtMultiMap,
            x,
            &mm,
            base.words_total,
        ));
        if spec.mix.is_one_to_one() {
            let d = generate_workload(spec, x, config.seed)?;
            let map = build_champ_map(&d, config.policy)?;
            let r = map.footprint_with(config.model);
            rows.push(FootprintRow::new(
                Structure::ChampMap,
                x,
                &r,
                base.words_total,
            ));
        }
    }
    Ok(rows)
}

/// Ratios of the multi-map rows, in size order.
pub fn multimap_ratios(rows: &[FootprintRow]) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.structure == Structure::HhamtMultiMap)
        .map(|r| r.ratio_vs_baseline)
        .collect()
}
