//! Reference implementations shared by the integration tests. Nothing here
//! calls into the library's own internals.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::hash::BuildHasher;

use hhamt::bitmap::{Pattern, PatternBitmap};
use hhamt::dominators::CfgGraph;
use hhamt::PersistentMultiMap;

/// Pattern codes of a raw 64-bit word, decoded one branch at a time.
pub fn decode(word: u64) -> [u8; 32] {
    let mut out = [0u8; 32];
    for (b, slot) in out.iter_mut().enumerate() {
        let lo = (word >> (2 * b)) & 1;
        let hi = (word >> (2 * b + 1)) & 1;
        *slot = (hi << 1 | lo) as u8;
    }
    out
}

pub fn encode(codes: &[u8; 32]) -> u64 {
    codes
        .iter()
        .enumerate()
        .fold(0u64, |w, (b, &c)| w | (c as u64) << (2 * b))
}

pub fn naive_filter(word: u64, code: u8) -> u64 {
    let mut out = 0;
    for (b, &c) in decode(word).iter().enumerate() {
        if c == code {
            out |= 1u64 << (2 * b);
        }
    }
    out
}

pub fn naive_histogram(word: u64) -> [u32; 4] {
    let mut h = [0u32; 4];
    for c in decode(word) {
        h[c as usize] += 1;
    }
    h
}

/// Compares every bitmap query against the per-branch oracle. Returns the
/// first disagreement.
pub fn check_bitmap_word(word: u64, set_branch: u32, set_code: u8) -> Result<(), String> {
    let bm = PatternBitmap::from_word(word);
    let codes = decode(word);
    for b in 0..32u32 {
        if bm.get(b).code() != codes[b as usize] {
            return Err(format!("get({b}) on {word:#018x}"));
        }
    }
    let hist = bm.histogram();
    let want_hist = naive_histogram(word);
    for p in Pattern::ALL {
        let code = p.code();
        if bm.filter(p) != naive_filter(word, code) {
            return Err(format!("filter({p:?}) on {word:#018x}"));
        }
        if hist[p] != want_hist[code as usize] || bm.count(p) != want_hist[code as usize] as usize {
            return Err(format!("histogram/count({p:?}) on {word:#018x}"));
        }
        let mut rank = 0;
        for b in 0..32u32 {
            if bm.index(p, b) != rank {
                return Err(format!("index({p:?}, {b}) on {word:#018x}"));
            }
            rank += (codes[b as usize] == code) as usize;
        }
    }
    let mut want = codes;
    want[set_branch as usize] = set_code;
    let after = bm.set(set_branch, Pattern::from_code(set_code));
    if after.word() != encode(&want) {
        return Err(format!("set({set_branch}, {set_code}) on {word:#018x}"));
    }
    Ok(())
}

/// Reference multi-map.
pub type Model = BTreeMap<u32, BTreeSet<u32>>;

pub fn model_insert(m: &mut Model, k: u32, v: u32) -> bool {
    m.entry(k).or_default().insert(v)
}

pub fn model_remove(m: &mut Model, k: u32, v: u32) -> bool {
    let Some(vs) = m.get_mut(&k) else {
        return false;
    };
    let hit = vs.remove(&v);
    if vs.is_empty() {
        m.remove(&k);
    }
    hit
}

pub fn model_tuples(m: &Model) -> usize {
    m.values().map(BTreeSet::len).sum()
}

pub fn sorted_entries<S: BuildHasher + Clone>(
    m: &PersistentMultiMap<u32, u32, S>,
) -> Vec<(u32, u32)> {
    let mut v: Vec<(u32, u32)> = m.entries().map(|(k, v)| (*k, *v)).collect();
    v.sort_unstable();
    v
}

pub fn model_entries(m: &Model) -> Vec<(u32, u32)> {
    m.iter()
        .flat_map(|(k, vs)| vs.iter().map(move |v| (*k, *v)))
        .collect()
}

/// Full comparison: counts, key and entry iteration multisets, per-key views.
pub fn agrees<S: BuildHasher + Clone>(
    m: &PersistentMultiMap<u32, u32, S>,
    model: &Model,
) -> Result<(), String> {
    if m.tuple_count() != model_tuples(model) || m.key_count() != model.len() {
        return Err(format!(
            "counts {}/{} vs {}/{}",
            m.tuple_count(),
            m.key_count(),
            model_tuples(model),
            model.len()
        ));
    }
    if sorted_entries(m) != model_entries(model) {
        return Err("entry multiset differs".into());
    }
    let mut keys: Vec<u32> = m.keys().copied().collect();
    keys.sort_unstable();
    if !keys.iter().eq(model.keys()) {
        return Err("key multiset differs".into());
    }
    for (k, vs) in m.iter() {
        let mut got: Vec<u32> = vs.iter().copied().collect();
        got.sort_unstable();
        if !model.get(k).is_some_and(|want| got.iter().eq(want.iter())) {
            return Err(format!("values of key {k} differ"));
        }
    }
    Ok(())
}

/// Dominance by definition: `d` dominates `v` iff `v` is reachable from the
/// entry and every entry-to-`v` path passes through `d`, i.e. `v` becomes
/// unreachable once `d` is deleted. `None` for unreachable vertices.
pub fn dominators_by_removal(g: &CfgGraph) -> Vec<Option<BTreeSet<u32>>> {
    let n = g.vertex_count();
    let succ = g.successors();
    let reach = |banned: Option<u32>| -> Vec<bool> {
        let mut seen = vec![false; n];
        if banned == Some(g.entry()) {
            return seen;
        }
        let mut queue = VecDeque::from([g.entry()]);
        seen[g.entry() as usize] = true;
        while let Some(u) = queue.pop_front() {
            for &w in &succ[u as usize] {
                if Some(w) != banned && !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    };
    let base = reach(None);
    let mut dom: Vec<Option<BTreeSet<u32>>> = base
        .iter()
        .enumerate()
        .map(|(v, &r)| r.then(|| BTreeSet::from([v as u32])))
        .collect();
    for d in 0..n as u32 {
        if !base[d as usize] {
            continue;
        }
        let without = reach(Some(d));
        for v in 0..n {
            if base[v] && !without[v] {
                dom[v].as_mut().unwrap().insert(d);
            }
        }
    }
    dom
}

/// Fraction of vertices with exactly one predecessor among those with any.
pub fn one_to_one_counts(g: &CfgGraph) -> (usize, usize) {
    let mut preds: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for &(s, t) in g.edges() {
        preds.entry(t).or_default().insert(s);
    }
    let single = preds.values().filter(|p| p.len() == 1).count();
    (single, preds.len())
}
