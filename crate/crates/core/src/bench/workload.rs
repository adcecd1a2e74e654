//! Deterministic workload generation.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BenchError;

/// Smallest and largest accepted size exponent.
pub const SIZE_EXPONENT_RANGE: (u32, u32) = (1, 23);

/// Share of keys bound to one value versus two values, as relative weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mix {
    pub one_to_one: u32,
    pub one_to_two: u32,
}

impl Mix {
    pub const HALF: Mix = Mix {
        one_to_one: 50,
        one_to_two: 50,
    };
    pub const ONE_TO_ONE: Mix = Mix {
        one_to_one: 100,
        one_to_two: 0,
    };

    pub fn new(one_to_one: u32, one_to_two: u32) -> Result<Self, BenchError> {
        if one_to_one.checked_add(one_to_two).unwrap_or(0) == 0 {
            return Err(BenchError::InvalidMix(format!("{one_to_one}:{one_to_two}")));
        }
        Ok(Mix {
            one_to_one,
            one_to_two,
        })
    }

    pub fn is_one_to_one(&self) -> bool {
        self.one_to_two == 0
    }

    /// Number of 1:1 keys among `keys`, rounded half up.
    pub fn one_to_one_keys(&self, keys: usize) -> usize {
        let total = (self.one_to_one + self.one_to_two) as u64;
        ((keys as u64 * self.one_to_one as u64 + total / 2) / total) as usize
    }
}

impl Default for Mix {
    fn default() -> Self {
        Mix::HALF
    }
}

impl fmt::Display for Mix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.one_to_one, self.one_to_two)
    }
}

impl FromStr for Mix {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        let bad = || BenchError::InvalidMix(s.to_string());
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let a = a.trim().parse().map_err(|_| bad())?;
        let b = b.trim().parse().map_err(|_| bad())?;
        Mix::new(a, b)
    }
}

/// Parameters shared by every benchmark and footprint run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    /// Data sizes as exponents: `x` means `2^x` keys.
    pub size_exponents: Vec<u32>,
    pub seeds: u32,
    pub mix: Mix,
    /// Probes per timed operation.
    pub burst_size: usize,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        WorkloadSpec {
            size_exponents: (1..=18).collect(),
            seeds: 5,
            mix: Mix::HALF,
            burst_size: 8,
        }
    }
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        let (lo, hi) = SIZE_EXPONENT_RANGE;
        if let Some(&x) = self.size_exponents.iter().find(|&&x| x < lo || x > hi) {
            return Err(BenchError::SizeExponent(x));
        }
        if self.size_exponents.is_empty() {
            return Err(BenchError::Config("no sizes requested".into()));
        }
        if self.seeds == 0 {
            return Err(BenchError::Config("seed count must be positive".into()));
        }
        if self.burst_size == 0 {
            return Err(BenchError::Config("burst size must be positive".into()));
        }
        Ok(())
    }
}

/// Generated data for one `(size, seed)` cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub size_exponent: u32,
    pub seed: u64,
    /// Every `(key, value)` tuple, grouped by key.
    pub entries: Vec<(u32, u32)>,
    pub key_count: usize,
    /// Present tuples.
    pub full: Vec<(u32, u32)>,
    /// Present key, absent value.
    pub partial: Vec<(u32, u32)>,
    /// Absent key.
    pub none: Vec<(u32, u32)>,
}

impl Dataset {
    pub fn tuple_count(&self) -> usize {
        self.entries.len()
    }

    /// The entries as a reference multi-map.
    pub fn model(&self) -> HashMap<u32, HashSet<u32>> {
        let mut m: HashMap<u32, HashSet<u32>> = HashMap::new();
        for &(k, v) in &self.entries {
            m.entry(k).or_default().insert(v);
        }
        m
    }
}

fn cell_seed(seed: u64, size_exponent: u32) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ ((size_exponent as u64) << 56) ^ 0x5eed
}

/// Builds the dataset for `2^size_exponent` keys.
pub fn generate_workload(
    spec: &WorkloadSpec,
    size_exponent: u32,
    seed: u64,
) -> Result<Dataset, BenchError> {
    let (lo, hi) = SIZE_EXPONENT_RANGE;
    if size_exponent < lo || size_exponent > hi {
        return Err(BenchError::SizeExponent(size_exponent));
    }
    if spec.burst_size == 0 {
        return Err(BenchError::Config("burst size must be positive".into()));
    }
    let keys = 1usize << size_exponent;
    let burst = spec.burst_size;
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(seed, size_exponent));

    // Present keys first, then keys reserved for absent probes.
    let mut seen = HashSet::with_capacity(keys + burst);
    let mut all_keys = Vec::with_capacity(keys + burst);
    while all_keys.len() < keys + burst {
        let k: u32 = rng.gen();
        if seen.insert(k) {
            all_keys.push(k);
        }
    }
    let (present, absent) = all_keys.split_at(keys);

    let singles = spec.mix.one_to_one_keys(keys);
    let mut entries = Vec::with_capacity(2 * keys);
    let mut values: HashMap<u32, Vec<u32>> = HashMap::with_capacity(keys);
    for (i, &k) in present.iter().enumerate() {
        let arity = if i < singles { 1 } else { 2 };
        let vs = values.entry(k).or_default();
        while vs.len() < arity {
            let v: u32 = rng.gen();
            if !vs.contains(&v) {
                vs.push(v);
                entries.push((k, v));
            }
        }
    }

    let mut full: Vec<(u32, u32)> = entries
        .choose_multiple(&mut rng, burst.min(entries.len()))
        .copied()
        .collect();
    pad_by_duplication(&mut full, burst);

    let mut partial = Vec::with_capacity(burst);
    while partial.len() < burst {
        let k = *present.choose(&mut rng).expect("at least one key");
        let v: u32 = rng.gen();
        if !values[&k].contains(&v) && !partial.contains(&(k, v)) {
            partial.push((k, v));
        }
    }

    let none = absent.iter().map(|&k| (k, rng.gen())).collect();

    Ok(Dataset {
        size_exponent,
        seed,
        entries,
        key_count: keys,
        full,
        partial,
        none,
    })
}

/// Repeats the leading elements until `v` has `len` elements.
fn pad_by_duplication<T: Copy>(v: &mut Vec<T>, len: usize) {
    let distinct = v.len();
    let mut i = 0;
    while v.len() < len {
        let x = v[i % distinct];
        v.push(x);
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_half_mix() {
        let spec = WorkloadSpec::default();
        let d = generate_workload(&spec, 1, 0).unwrap();
        assert_eq!(d.key_count, 2);
        assert_eq!(d.tuple_count(), 3);
        let model = d.model();
        let mut arities: Vec<usize> = model.values().map(HashSet::len).collect();
        arities.sort();
        assert_eq!(arities, [1, 2]);
        assert_eq!(d.full.len(), 8);
    }

    #[test]
    fn deterministic() {
        let spec = WorkloadSpec::default();
        assert_eq!(
            generate_workload(&spec, 9, 3).unwrap(),
            generate_workload(&spec, 9, 3).unwrap()
        );
        assert_ne!(
            generate_workload(&spec, 9, 3).unwrap().entries,
            generate_workload(&spec, 9, 4).unwrap().entries
        );
    }

    #[test]
    fn probe_sets_are_disjoint_and_classified() {
        let spec = WorkloadSpec::default();
        for x in [1, 4, 10] {
            let d = generate_workload(&spec, x, 1).unwrap();
            let model = d.model();
            for (k, v) in &d.full {
                assert!(model[k].contains(v));
            }
            for (k, v) in &d.partial {
                assert!(model.contains_key(k) && !model[k].contains(v));
            }
            for (k, _) in &d.none {
                assert!(!model.contains_key(k));
            }
        }
    }

    #[test]
    fn rejects_bad_exponents_and_mixes() {
        let spec = WorkloadSpec::default();
        assert!(matches!(
            generate_workload(&spec, 0, 0),
            Err(BenchError::SizeExponent(0))
        ));
        assert!(generate_workload(&spec, 24, 0).is_err());
        assert!("0:0".parse::<Mix>().is_err());
        assert!("50-50".parse::<Mix>().is_err());
        assert_eq!("70:30".parse::<Mix>().unwrap(), Mix::new(70, 30).unwrap());
    }

    #[test]
    fn pure_one_to_one() {
        let spec = WorkloadSpec {
            mix: Mix::ONE_TO_ONE,
            ..WorkloadSpec::default()
        };
        let d = generate_workload(&spec, 6, 0).unwrap();
        assert_eq!(d.tuple_count(), 64);
    }
}
