//! The structures under measurement, behind one probing interface.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BenchError, Dataset};
use crate::storage::{FootprintAcc, FootprintModel, FootprintReport, StoragePolicy};
use crate::{PersistentMap, PersistentMultiMap, PersistentSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    /// Heterogeneous multi-map with inline singletons.
    #[serde(rename = "hhamt_multimap")]
    HhamtMultiMap,
    /// CHAMP map whose values are CHAMP sets.
    MapOfSets,
    /// Plain CHAMP map; only meaningful on 1:1 data.
    ChampMap,
}

impl Structure {
    pub const ALL: [Structure; 3] = [
        Structure::HhamtMultiMap,
        Structure::MapOfSets,
        Structure::ChampMap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Structure::HhamtMultiMap => "hhamt_multimap",
            Structure::MapOfSets => "map_of_sets",
            Structure::ChampMap => "champ_map",
        }
    }

    /// Whether the structure can hold `dataset` without losing tuples.
    pub fn supports(self, dataset: &Dataset) -> bool {
        self != Structure::ChampMap || dataset.tuple_count() == dataset.key_count
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Structure {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Structure::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown structure `{s}`")))
    }
}

/// Common probing surface of the measured structures.
/// Counts an element while keeping it observable to the optimizer.
#[inline]
fn visit<T>(n: usize, item: T) -> usize {
    std::hint::black_box(item);
    n + 1
}

pub trait Probe: Clone {
    fn contains(&self, key: u32, value: u32) -> bool;
    fn inserted(&self, key: u32, value: u32) -> Self;
    fn removed(&self, key: u32, value: u32) -> Self;
    fn tuple_count(&self) -> usize;
    fn key_count(&self) -> usize;
    /// Visits every key; returns how many were seen.
    fn walk_keys(&self) -> usize;
    /// Visits every tuple; returns a checksum-style fold of the count.
    fn walk_entries(&self) -> usize;
    fn entries(&self) -> Vec<(u32, u32)>;
}

impl Probe for PersistentMultiMap<u32, u32> {
    #[inline]
    fn contains(&self, key: u32, value: u32) -> bool {
        self.contains_entry(&key, &value)
    }

    fn inserted(&self, key: u32, value: u32) -> Self {
        self.insert(key, value)
    }

    fn removed(&self, key: u32, value: u32) -> Self {
        self.remove(&key, &value)
    }

    fn tuple_count(&self) -> usize {
        PersistentMultiMap::tuple_count(self)
    }

    fn key_count(&self) -> usize {
        PersistentMultiMap::key_count(self)
    }

    fn walk_keys(&self) -> usize {
        self.keys().fold(0, visit)
    }

    fn walk_entries(&self) -> usize {
        self.entries().fold(0, visit)
    }

    fn entries(&self) -> Vec<(u32, u32)> {
        PersistentMultiMap::entries(self)
            .map(|(k, v)| (*k, *v))
            .collect()
    }
}

/// Baseline multi-map: a CHAMP map from keys to CHAMP sets of values.
#[derive(Clone, Debug)]
pub struct MapOfSets {
    map: PersistentMap<u32, PersistentSet<u32>>,
    tuples: usize,
    policy: StoragePolicy,
}

impl MapOfSets {
    pub fn new(policy: StoragePolicy) -> Self {
        MapOfSets {
            map: PersistentMap::with_policy(policy),
            tuples: 0,
            policy,
        }
    }

    pub fn insert(&self, key: u32, value: u32) -> Self {
        let set = match self.map.get(&key) {
            Some(set) => set.insert(value),
            None => PersistentSet::with_policy(self.policy).insert(value),
        };
        if self.map.get(&key).is_some_and(|old| old.ptr_eq(&set)) {
            return self.clone();
        }
        MapOfSets {
            map: self.map.insert(key, set),
            tuples: self.tuples + 1,
            policy: self.policy,
        }
    }

    pub fn remove(&self, key: u32, value: u32) -> Self {
        let Some(old) = self.map.get(&key) else {
            return self.clone();
        };
        let set = old.remove(&value);
        if set.ptr_eq(old) {
            return self.clone();
        }
        let map = if set.is_empty() {
            self.map.remove(&key)
        } else {
            self.map.insert(key, set)
        };
        MapOfSets {
            map,
            tuples: self.tuples - 1,
            policy: self.policy,
        }
    }

    pub fn get(&self, key: u32) -> Option<&PersistentSet<u32>> {
        self.map.get(&key)
    }

    pub fn map(&self) -> &PersistentMap<u32, PersistentSet<u32>> {
        &self.map
    }

    pub fn footprint(&self) -> FootprintReport {
        self.footprint_with(FootprintModel::default())
    }

    /// Map nodes, one handle per value set, and the set nodes.
    pub fn footprint_with(&self, model: FootprintModel) -> FootprintReport {
        let mut acc = FootprintAcc::new(model);
        self.map.footprint_into(&mut acc);
        for set in self.map.values() {
            acc.nested_set_handle();
            set.footprint_into(&mut acc);
        }
        acc.finish()
    }
}

impl Probe for MapOfSets {
    #[inline]
    fn contains(&self, key: u32, value: u32) -> bool {
        self.map.get(&key).is_some_and(|s| s.contains(&value))
    }

    fn inserted(&self, key: u32, value: u32) -> Self {
        self.insert(key, value)
    }

    fn removed(&self, key: u32, value: u32) -> Self {
        self.remove(key, value)
    }

    fn tuple_count(&self) -> usize {
        self.tuples
    }

    fn key_count(&self) -> usize {
        self.map.len()
    }

    fn walk_keys(&self) -> usize {
        self.map.keys().fold(0, visit)
    }

    fn walk_entries(&self) -> usize {
        self.map
            .iter()
            .flat_map(|(k, s)| s.iter().map(move |v| (k, v)))
            .fold(0, visit)
    }

    fn entries(&self) -> Vec<(u32, u32)> {
        self.map
            .iter()
            .flat_map(|(k, s)| s.iter().map(move |v| (*k, *v)))
            .collect()
    }
}

impl Probe for PersistentMap<u32, u32> {
    #[inline]
    fn contains(&self, key: u32, value: u32) -> bool {
        self.get(&key) == Some(&value)
    }

    fn inserted(&self, key: u32, value: u32) -> Self {
        self.insert(key, value)
    }

    fn removed(&self, key: u32, value: u32) -> Self {
        if self.get(&key) == Some(&value) {
            self.remove(&key)
        } else {
            self.clone()
        }
    }

    fn tuple_count(&self) -> usize {
        self.len()
    }

    fn key_count(&self) -> usize {
        self.len()
    }

    fn walk_keys(&self) -> usize {
        self.keys().fold(0, visit)
    }

    fn walk_entries(&self) -> usize {
        self.iter().fold(0, visit)
    }

    fn entries(&self) -> Vec<(u32, u32)> {
        self.iter().map(|(k, v)| (*k, *v)).collect()
    }
}

pub fn build_multimap(d: &Dataset, policy: StoragePolicy) -> PersistentMultiMap<u32, u32> {
    let mut m = PersistentMultiMap::with_policy(policy);
    for &(k, v) in &d.entries {
        m.insert_mut(k, v);
    }
    m
}

pub fn build_map_of_sets(d: &Dataset, policy: StoragePolicy) -> MapOfSets {
    d.entries
        .iter()
        .fold(MapOfSets::new(policy), |m, &(k, v)| m.insert(k, v))
}

pub fn build_champ_map(
    d: &Dataset,
    policy: StoragePolicy,
) -> Result<PersistentMap<u32, u32>, BenchError> {
    if !Structure::ChampMap.supports(d) {
        return Err(BenchError::Unsupported {
            structure: Structure::ChampMap,
            reason: "data is not 1:1".into(),
        });
    }
    let mut m = PersistentMap::with_policy(policy);
    for &(k, v) in &d.entries {
        m.insert_mut(k, v);
    }
    Ok(m)
}
