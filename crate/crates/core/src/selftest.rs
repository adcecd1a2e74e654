//! Built-in invariant and oracle checks, runnable from the command line.
//!
//! Each check compares the library against a straightforward reference
//! (per-branch loops, a `HashMap` of `HashSet`s, a boolean-matrix dominator
//! solver) on seeded random inputs.

use std::collections::{BTreeSet, HashMap};
use std::hash::BuildHasher;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bench::{generate_workload, Mix, WorkloadSpec};
use crate::bitmap::{Pattern, PatternBitmap, BRANCH_FACTOR};
use crate::dominators::{analyze, random_digraph};
use crate::hash::ConstantHashBuilder;
use crate::{DefaultHashBuilder, PersistentMap, PersistentMultiMap, StoragePolicy};

/// How much work each check does.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Scale {
    pub bitmap_words: usize,
    pub sequences: usize,
    pub ops_per_sequence: usize,
    pub canonical_sets: usize,
    pub graphs_per_size: u64,
}

impl Scale {
    pub const QUICK: Scale = Scale {
        bitmap_words: 100_000,
        sequences: 10,
        ops_per_sequence: 10_000,
        canonical_sets: 50,
        graphs_per_size: 10,
    };
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &'static str, r: Result<String, String>) -> CheckResult {
    match r {
        Ok(detail) => CheckResult {
            name,
            passed: true,
            detail,
        },
        Err(detail) => CheckResult {
            name,
            passed: false,
            detail,
        },
    }
}

pub fn run_selftest(scale: Scale, seed: u64) -> Vec<CheckResult> {
    vec![
        result("bit_engine", check_bit_engine(scale.bitmap_words, seed)),
        result("model_equivalence", check_model(scale, seed)),
        result("canonicity", check_canonicity(scale.canonical_sets, seed)),
        result("one_to_one_footprint", check_one_to_one()),
        result("specialization", check_specialization(seed)),
        result("dominators", check_dominators(scale.graphs_per_size, seed)),
        result("collision_torture", check_collisions(seed)),
    ]
}

fn check_bit_engine(words: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..words {
        let bm = PatternBitmap::from_word(rng.gen());
        let patterns: Vec<Pattern> = (0..BRANCH_FACTOR)
            .map(|b| Pattern::from_code(((bm.word() >> (2 * b)) & 3) as u8))
            .collect();
        let hist = bm.histogram();
        for p in Pattern::ALL {
            let count = patterns.iter().filter(|&&q| q == p).count();
            if bm.count(p) != count || hist[p] as usize != count {
                return Err(format!("count of {p:?} wrong for {:#018x}", bm.word()));
            }
            for b in 0..BRANCH_FACTOR {
                let rank = patterns[..b as usize].iter().filter(|&&q| q == p).count();
                if bm.index(p, b) != rank {
                    return Err(format!("index({p:?}, {b}) wrong for {:#018x}", bm.word()));
                }
            }
        }
        let b = rng.gen_range(0..BRANCH_FACTOR);
        let p = Pattern::ALL[rng.gen_range(0..4)];
        let after = bm.set(b, p);
        for c in 0..BRANCH_FACTOR {
            let want = if c == b { p } else { patterns[c as usize] };
            if after.get(c) != want {
                return Err(format!("set({b}, {p:?}) disturbed branch {c}"));
            }
        }
    }
    for b in 0..BRANCH_FACTOR {
        for p in [Pattern::Node, Pattern::Inline, Pattern::Collection] {
            if PatternBitmap::EMPTY.set(b, p).recover_single() != (b, p) {
                return Err(format!("recover_single failed for ({b}, {p:?})"));
            }
        }
    }
    Ok(format!("{words} random words, 96 single-entry bitmaps"))
}

type Model = HashMap<u32, BTreeSet<u32>>;

fn agree<S: BuildHasher + Clone>(
    m: &PersistentMultiMap<u32, u32, S>,
    model: &Model,
) -> Result<(), String> {
    let tuples: usize = model.values().map(BTreeSet::len).sum();
    if m.tuple_count() != tuples || m.key_count() != model.len() {
        return Err(format!(
            "counts {}/{} vs model {}/{}",
            m.tuple_count(),
            m.key_count(),
            tuples,
            model.len()
        ));
    }
    let mut entries: Vec<(u32, u32)> = m.entries().map(|(k, v)| (*k, *v)).collect();
    entries.sort_unstable();
    let mut want: Vec<(u32, u32)> = model
        .iter()
        .flat_map(|(k, vs)| vs.iter().map(move |v| (*k, *v)))
        .collect();
    want.sort_unstable();
    if entries != want {
        return Err("entry iteration differs from the model".into());
    }
    let mut keys: Vec<u32> = m.keys().copied().collect();
    keys.sort_unstable();
    let mut want_keys: Vec<u32> = model.keys().copied().collect();
    want_keys.sort_unstable();
    if keys != want_keys {
        return Err("key iteration differs from the model".into());
    }
    m.validate().map_err(|v| v.to_string())
}

/// Runs `ops` random operations against both the multi-map and the model.
pub fn model_equivalence<S: BuildHasher + Clone>(
    hasher: S,
    policy: StoragePolicy,
    ops: usize,
    key_range: u32,
    value_range: u32,
    seed: u64,
) -> Result<PersistentMultiMap<u32, u32, S>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = PersistentMultiMap::with_hasher_and_policy(hasher, policy);
    let mut model = Model::new();
    for i in 0..ops {
        let k = rng.gen_range(0..key_range);
        let v = rng.gen_range(0..value_range);
        match rng.gen_range(0..10) {
            0..=3 => {
                let grew = model.entry(k).or_default().insert(v);
                if m.insert_mut(k, v) != grew {
                    return Err(format!("op {i}: insert ({k}, {v}) result differs"));
                }
            }
            4..=5 => {
                let had = model.get_mut(&k).is_some_and(|vs| vs.remove(&v));
                if model.get(&k).is_some_and(BTreeSet::is_empty) {
                    model.remove(&k);
                }
                if m.remove_mut(&k, &v) != had {
                    return Err(format!("op {i}: remove ({k}, {v}) result differs"));
                }
            }
            6 => {
                let had = model.remove(&k).is_some();
                if m.remove_key_mut(&k) != had {
                    return Err(format!("op {i}: remove_key {k} result differs"));
                }
            }
            _ => {
                let want = model.get(&k);
                let got = m.get(&k);
                let same = match want {
                    None => got.is_empty() && !m.contains_key(&k),
                    Some(vs) => got.len() == vs.len() && vs.iter().all(|v| got.contains(v)),
                };
                let entry = want.is_some_and(|vs| vs.contains(&v));
                if !same || m.contains_entry(&k, &v) != entry {
                    return Err(format!("op {i}: lookup of {k} differs"));
                }
            }
        }
        if i % 1024 == 0 {
            agree(&m, &model).map_err(|e| format!("op {i}: {e}"))?;
        }
    }
    agree(&m, &model)?;
    Ok(m)
}

fn check_model(scale: Scale, seed: u64) -> Result<String, String> {
    for s in 0..scale.sequences as u64 {
        let range = 64 << (s % 6);
        model_equivalence(
            DefaultHashBuilder::default(),
            StoragePolicy::Specialized,
            scale.ops_per_sequence,
            range,
            8,
            seed ^ s,
        )?;
    }
    Ok(format!(
        "{} sequences of {} operations",
        scale.sequences, scale.ops_per_sequence
    ))
}

/// Builds `entries` sorted, shuffled, and as a superset with the extras
/// removed again, and checks all three are structurally equal.
pub fn canonical_builds<S: BuildHasher + Clone>(
    hasher: S,
    entries: &[(u32, u32)],
    seed: u64,
) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sorted = entries.to_vec();
    sorted.sort_unstable();
    let build = |xs: &[(u32, u32)]| {
        let mut m = PersistentMultiMap::with_hasher(hasher.clone());
        for &(k, v) in xs {
            m.insert_mut(k, v);
        }
        m
    };
    let reference = build(&sorted);
    let mut shuffled = sorted.clone();
    shuffled.shuffle(&mut rng);
    let mut extras: Vec<(u32, u32)> = (0..sorted.len() / 2 + 1)
        .map(|_| (rng.gen(), rng.gen()))
        .collect();
    extras.extend(sorted.iter().map(|&(k, _)| (k, rng.gen::<u32>())));
    extras.retain(|e| sorted.binary_search(e).is_err());
    extras.sort_unstable();
    extras.dedup();
    let mut superset: Vec<(u32, u32)> = sorted.iter().chain(&extras).copied().collect();
    superset.shuffle(&mut rng);
    let mut pruned = build(&superset);
    extras.shuffle(&mut rng);
    for (k, v) in &extras {
        pruned.remove_mut(k, v);
    }
    if build(&shuffled) != reference {
        return Err("shuffled build differs".into());
    }
    if pruned != reference {
        return Err("superset-then-delete build differs".into());
    }
    reference.validate().map_err(|v| v.to_string())?;
    pruned.validate().map_err(|v| v.to_string())
}

fn random_entries(rng: &mut ChaCha8Rng, max_exp: u32) -> Vec<(u32, u32)> {
    let n = rng.gen_range(0..=(1usize << max_exp));
    let keys = (n / 2).max(1) as u32;
    let mut v: Vec<(u32, u32)> = (0..n)
        .map(|_| (rng.gen_range(0..keys), rng.gen_range(0..4)))
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn check_canonicity(sets: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..sets {
        let entries = random_entries(&mut rng, 10);
        canonical_builds(DefaultHashBuilder::default(), &entries, seed + i as u64)?;
    }
    Ok(format!("{sets} entry sets"))
}

fn check_one_to_one() -> Result<String, String> {
    let spec = WorkloadSpec {
        mix: Mix::ONE_TO_ONE,
        ..WorkloadSpec::default()
    };
    for x in [6, 10, 14] {
        let d = generate_workload(&spec, x, 0).map_err(|e| e.to_string())?;
        let mm: PersistentMultiMap<u32, u32> = d.entries.iter().copied().collect();
        let map: PersistentMap<u32, u32> = d.entries.iter().copied().collect();
        let (a, b) = (mm.footprint(), map.footprint());
        if a.nested_sets != 0 || mm.stats().collection_entries != 0 {
            return Err(format!("2^{x}: nested sets allocated on 1:1 data"));
        }
        if a != b {
            return Err(format!(
                "2^{x}: {} words vs map {}",
                a.words_total, b.words_total
            ));
        }
    }
    Ok("sizes 2^6, 2^10, 2^14".into())
}

fn check_specialization(seed: u64) -> Result<String, String> {
    for s in 0..4 {
        let a = model_equivalence(
            DefaultHashBuilder::default(),
            StoragePolicy::Specialized,
            5_000,
            256,
            4,
            seed ^ s,
        )?;
        let b = model_equivalence(
            DefaultHashBuilder::default(),
            StoragePolicy::GenericOnly,
            5_000,
            256,
            4,
            seed ^ s,
        )?;
        if a != b {
            return Err("layouts produce different structures".into());
        }
        if a.footprint().words_total >= b.footprint().words_total {
            return Err("specialized layout is not smaller".into());
        }
    }
    Ok("4 sequences, both layouts".into())
}

fn check_dominators(graphs: u64, seed: u64) -> Result<String, String> {
    for n in [128, 256, 512] {
        for s in 0..graphs {
            let g = random_digraph(n, 3, seed ^ (s + n as u64 * 1000));
            analyze("random", &g).map_err(|e| format!("{n} vertices, graph {s}: {e}"))?;
        }
    }
    Ok(format!("{graphs} graphs each of 128, 256, 512 vertices"))
}

fn check_collisions(seed: u64) -> Result<String, String> {
    let hasher = ConstantHashBuilder::new(0xabad_cafe);
    let m = model_equivalence(hasher, StoragePolicy::Specialized, 3_000, 40, 4, seed)?;
    let stats = m.stats();
    if m.key_count() > 1 && stats.collision_nodes != 1 {
        return Err("entries escaped the collision node".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..10 {
        let entries = random_entries(&mut rng, 6);
        canonical_builds(hasher, &entries, seed + i)?;
    }
    Ok("3000 operations, 10 canonical builds".into())
}
