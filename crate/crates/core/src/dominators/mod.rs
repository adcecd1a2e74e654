//! Dominator sets computed by a set-based fixpoint over persistent
//! multi-maps.
//!
//! `Dom(entry) = {entry}` and, for every other reachable vertex `n`,
//! `Dom(n)` is the intersection of `Dom(p)` over the predecessors `p` of
//! `n`, plus `n` itself.

mod graph;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use graph::{parse_edge_list, random_cfg, random_digraph, CfgGraph, ParseError};

use crate::{PersistentMultiMap, PersistentSet};

/// Vertex-to-vertex-set relation.
pub type Relation = PersistentMultiMap<u32, u32>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomError {
    #[error("entry vertex {0} is not a vertex of the graph")]
    MissingEntry(u32),
    #[error("dominator sets disagree with the reference at vertex {0}")]
    Mismatch(String),
}

/// Predecessor relation: `(d, s)` for every edge `s -> d`.
pub fn compute_preds(g: &CfgGraph) -> Relation {
    let mut preds = Relation::new();
    for &(s, d) in g.edges() {
        preds.insert_mut(d, s);
    }
    preds
}

/// Shape of a relation: distinct keys, tuples, and the share of keys bound
/// to exactly one value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationStats {
    pub key_count: usize,
    pub tuple_count: usize,
    /// Percentage in `[0, 100]`; 100 for an empty relation.
    pub ratio_1to1: f64,
}

pub fn relation_stats(m: &Relation) -> RelationStats {
    let mut keys = 0;
    let mut tuples = 0;
    let mut singles = 0;
    for k in m.keys() {
        let n = m.get(k).len();
        keys += 1;
        tuples += n;
        singles += (n == 1) as usize;
    }
    let ratio_1to1 = if keys == 0 {
        100.0
    } else {
        100.0 * singles as f64 / keys as f64
    };
    RelationStats {
        key_count: keys,
        tuple_count: tuples,
        ratio_1to1,
    }
}

#[derive(Clone, Debug)]
pub struct Dominators {
    /// Vertex to its dominator set, for reachable vertices only.
    pub dom: Relation,
    /// Passes over the vertices, including the final one that changed
    /// nothing.
    pub iterations: usize,
    /// Vertices not reachable from the entry, excluded from `dom`.
    pub unreachable: Vec<u32>,
}

impl Dominators {
    pub fn get(&self, v: u32) -> PersistentSet<u32> {
        self.dom.get(&v).to_set()
    }
}

/// Reverse postorder of the vertices reachable from `entry`.
pub fn reverse_postorder(succ: &[Vec<u32>], entry: u32) -> Vec<u32> {
    let mut visited = vec![false; succ.len()];
    let mut order = Vec::new();
    let mut stack = vec![(entry, 0usize)];
    visited[entry as usize] = true;
    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        if let Some(&w) = succ[v as usize].get(*next) {
            *next += 1;
            if !visited[w as usize] {
                visited[w as usize] = true;
                stack.push((w, 0));
            }
        } else {
            order.push(v);
            stack.pop();
        }
    }
    order.reverse();
    order
}

/// Intersects the sets pairwise, level by level, until one remains.
fn staged_intersection(mut sets: Vec<PersistentSet<u32>>) -> PersistentSet<u32> {
    while sets.len() > 1 {
        sets = sets
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => a.intersection(b),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    sets.pop().expect("at least one predecessor")
}

pub fn compute_dominators(g: &CfgGraph) -> Result<Dominators, DomError> {
    let n = g.vertex_count() as u32;
    let entry = g.entry();
    if entry >= n {
        return Err(DomError::MissingEntry(entry));
    }
    let succ = g.successors();
    let rpo = reverse_postorder(&succ, entry);
    let mut reachable = vec![false; n as usize];
    for &v in &rpo {
        reachable[v as usize] = true;
    }
    let unreachable: Vec<u32> = (0..n).filter(|&v| !reachable[v as usize]).collect();
    if !unreachable.is_empty() {
        log::debug!(
            "{} vertices unreachable from the entry are excluded",
            unreachable.len()
        );
    }

    let preds = compute_preds(g);
    let all: PersistentSet<u32> = rpo.iter().copied().collect();
    let mut dom = Relation::new();
    dom.set_values_mut(entry, &PersistentSet::new().insert(entry));
    for &v in &rpo[1..] {
        dom.set_values_mut(v, &all);
    }

    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut changed = false;
        for &v in &rpo[1..] {
            let incoming: Vec<PersistentSet<u32>> = preds
                .get(&v)
                .iter()
                .filter(|p| reachable[**p as usize])
                .map(|p| dom.get(p).to_set())
                .collect();
            let next = staged_intersection(incoming).insert(v);
            if next != dom.get(&v).to_set() {
                dom.set_values_mut(v, &next);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(Dominators {
        dom,
        iterations,
        unreachable,
    })
}

/// Plain boolean-matrix iterative dominator computation, used as a
/// cross-check. Row `v` is `None` for unreachable vertices.
pub fn reference_dominators(g: &CfgGraph) -> Vec<Option<Vec<bool>>> {
    let n = g.vertex_count();
    let entry = g.entry() as usize;
    let succ = g.successors();
    let rpo = reverse_postorder(&succ, g.entry());
    let mut reachable = vec![false; n];
    for &v in &rpo {
        reachable[v as usize] = true;
    }
    let mut pred = vec![Vec::new(); n];
    for &(s, d) in g.edges() {
        pred[d as usize].push(s as usize);
    }
    let mut dom: Vec<Vec<bool>> = (0..n).map(|_| reachable.clone()).collect();
    dom[entry] = vec![false; n];
    dom[entry][entry] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..n {
            if v == entry || !reachable[v] {
                continue;
            }
            let mut row = reachable.clone();
            for &p in pred[v].iter().filter(|&&p| reachable[p]) {
                for (r, &d) in row.iter_mut().zip(&dom[p]) {
                    *r &= d;
                }
            }
            row[v] = true;
            if row != dom[v] {
                dom[v] = row;
                changed = true;
            }
        }
    }
    (0..n)
        .map(|v| reachable[v].then(|| dom[v].clone()))
        .collect()
}

/// Compares `d` against [`reference_dominators`].
pub fn check_dominators(g: &CfgGraph, d: &Dominators) -> Result<(), DomError> {
    for (v, row) in reference_dominators(g).into_iter().enumerate() {
        let got = d.dom.get(&(v as u32));
        let ok = match row {
            None => got.is_empty(),
            Some(row) => {
                let want: Vec<u32> = (0..row.len() as u32).filter(|&w| row[w as usize]).collect();
                got.len() == want.len() && want.iter().all(|w| got.contains(w))
            }
        };
        if !ok {
            return Err(DomError::Mismatch(g.name(v as u32).to_string()));
        }
    }
    Ok(())
}

/// One line of a dominator report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomRow {
    pub graph_name: String,
    pub vertices: usize,
    pub edges: usize,
    pub dom_iterations: usize,
    pub runtime_ns: u64,
    pub preds_keys: usize,
    pub preds_tuples: usize,
    pub preds_pct_1to1: f64,
    /// Vertices left out because the entry cannot reach them.
    #[serde(skip)]
    pub unreachable: usize,
}

/// Computes dominators of `g` (timed), verifies them against the reference
/// and reports the predecessor-relation shape.
pub fn analyze(name: &str, g: &CfgGraph) -> Result<DomRow, DomError> {
    let start = Instant::now();
    let d = compute_dominators(g)?;
    let runtime_ns = start.elapsed().as_nanos() as u64;
    check_dominators(g, &d)?;
    let stats = relation_stats(&compute_preds(g));
    Ok(DomRow {
        graph_name: name.to_string(),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        dom_iterations: d.iterations,
        runtime_ns,
        preds_keys: stats.key_count,
        preds_tuples: stats.tuple_count,
        preds_pct_1to1: stats.ratio_1to1,
        unreachable: d.unreachable.len(),
    })
}

/// [`analyze`] over many graphs, using up to `jobs` threads. Rows keep the
/// input order.
pub fn analyze_all(graphs: &[(String, CfgGraph)], jobs: usize) -> Result<Vec<DomRow>, DomError> {
    if jobs <= 1 {
        return graphs.iter().map(|(name, g)| analyze(name, g)).collect();
    }
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    pool.install(|| {
        graphs
            .par_iter()
            .map(|(name, g)| analyze(name, g))
            .collect()
    })
}

/// `count` structured random CFGs per vertex count, named
/// `cfg-<vertices>-<seed>`.
pub fn generated_cfgs(sizes: &[u32], count: u64, seed: u64) -> Vec<(String, CfgGraph)> {
    sizes
        .iter()
        .flat_map(|&n| {
            (0..count).map(move |i| {
                let s = seed + i;
                (format!("cfg-{n}-{s}"), random_cfg(n, s))
            })
        })
        .collect()
}
