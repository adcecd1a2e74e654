//! Control-flow graphs and the edge-list format.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// A directed graph with named vertices and a designated entry vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfgGraph {
    names: Vec<String>,
    index: HashMap<String, u32>,
    edges: Vec<(u32, u32)>,
    entry: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing `entry <vertex>` declaration")]
    MissingEntry,
}

impl CfgGraph {
    /// Graph over vertices `0..n` named by their index. Duplicate edges are
    /// collapsed; edges must refer to existing vertices.
    pub fn from_edges(n: u32, entry: u32, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        assert!(entry < n, "entry vertex {entry} out of range");
        let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        let mut g = CfgGraph {
            names,
            index,
            edges: Vec::new(),
            entry,
        };
        let mut seen = HashSet::new();
        for (s, d) in edges {
            assert!(s < n && d < n, "edge ({s}, {d}) out of range");
            if seen.insert((s, d)) {
                g.edges.push((s, d));
            }
        }
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Unique edges in first-seen order.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn entry(&self) -> u32 {
        self.entry
    }

    pub fn name(&self, v: u32) -> &str {
        &self.names[v as usize]
    }

    pub fn vertex(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    /// Successor lists indexed by vertex.
    pub fn successors(&self) -> Vec<Vec<u32>> {
        let mut succ = vec![Vec::new(); self.vertex_count()];
        for &(s, d) in &self.edges {
            succ[s as usize].push(d);
        }
        succ
    }

    fn intern(&mut self, name: &str) -> u32 {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    /// Renders the graph in the edge-list format accepted by
    /// [`parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("entry {}\n", self.name(self.entry));
        for &(s, d) in &self.edges {
            out.push_str(self.name(s));
            out.push(' ');
            out.push_str(self.name(d));
            out.push('\n');
        }
        out
    }
}

/// Parses an edge list: `entry <vertex>` on the first non-comment line, then
/// one `src dst` pair per line. `#` starts a comment; blank lines are
/// ignored. Vertices are numbered in order of first appearance.
pub fn parse_edge_list(text: &str) -> Result<CfgGraph, ParseError> {
    let mut graph: Option<CfgGraph> = None;
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let malformed = |message: String| ParseError::Malformed {
            line: line_no,
            message,
        };
        match graph.as_mut() {
            None => {
                let [kw, name] = tokens[..] else {
                    return Err(malformed(format!(
                        "expected `entry <vertex>`, found `{line}`"
                    )));
                };
                if kw != "entry" {
                    return Err(ParseError::MissingEntry);
                }
                let mut g = CfgGraph {
                    names: Vec::new(),
                    index: HashMap::new(),
                    edges: Vec::new(),
                    entry: 0,
                };
                g.entry = g.intern(name);
                graph = Some(g);
            }
            Some(g) => {
                let [src, dst] = tokens[..] else {
                    return Err(malformed(format!(
                        "expected `src dst`, found {} token(s)",
                        tokens.len()
                    )));
                };
                let (s, d) = (g.intern(src), g.intern(dst));
                if seen.insert((s, d)) {
                    g.edges.push((s, d));
                }
            }
        }
    }
    graph.ok_or(ParseError::MissingEntry)
}

/// Random digraph over `n` vertices with entry 0, where each vertex gets
/// a number of out-edges drawn uniformly from `0..=max_out`. Vertices may be
/// unreachable; self-loops and back edges occur.
pub fn random_digraph(n: u32, max_out: u32, seed: u64) -> CfgGraph {
    assert!(n > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for s in 0..n {
        for _ in 0..rng.gen_range(0..=max_out) {
            edges.push((s, rng.gen_range(0..n)));
        }
    }
    CfgGraph::from_edges(n, 0, edges)
}

/// Random structured control-flow graph with exactly `n` vertices, every
/// vertex reachable from the entry and out-degree at most two.
///
/// The generator recursively composes sequences, if-then, if-then-else and
/// while-loop regions. Joins and loop headers are the only vertices with two
/// predecessors.
pub fn random_cfg(n: u32, seed: u64) -> CfgGraph {
    assert!(n > 0);
    let mut b = CfgBuilder {
        rng: ChaCha8Rng::seed_from_u64(seed),
        next: 0,
        edges: Vec::new(),
    };
    let (entry, _exit) = b.region(n);
    debug_assert_eq!(b.next, n);
    CfgGraph::from_edges(n, entry, b.edges)
}

struct CfgBuilder {
    rng: ChaCha8Rng,
    next: u32,
    edges: Vec<(u32, u32)>,
}

impl CfgBuilder {
    fn block(&mut self) -> u32 {
        self.next += 1;
        self.next - 1
    }

    /// Emits a single-entry single-exit region of exactly `budget` blocks.
    fn region(&mut self, budget: u32) -> (u32, u32) {
        if budget == 1 {
            let b = self.block();
            return (b, b);
        }
        // Weights: sequence, if-then, if-then-else, loop.
        let mut weights = [6u32, 0, 0, 0];
        if budget >= 3 {
            weights[1] = 1;
            weights[3] = 1;
        }
        if budget >= 4 {
            weights[2] = 2;
        }
        let total: u32 = weights.iter().sum();
        let mut pick = self.rng.gen_range(0..total);
        let mut kind = 0;
        while pick >= weights[kind] {
            pick -= weights[kind];
            kind += 1;
        }
        match kind {
            0 => {
                let k = self.rng.gen_range(1..budget);
                let (a_in, a_out) = self.region(k);
                let (b_in, b_out) = self.region(budget - k);
                self.edges.push((a_out, b_in));
                (a_in, b_out)
            }
            1 => {
                let c = self.block();
                let (t_in, t_out) = self.region(budget - 2);
                let j = self.block();
                self.edges.extend([(c, t_in), (c, j), (t_out, j)]);
                (c, j)
            }
            2 => {
                let c = self.block();
                let k = self.rng.gen_range(1..budget - 2);
                let (t_in, t_out) = self.region(k);
                let (e_in, e_out) = self.region(budget - 2 - k);
                let j = self.block();
                self.edges
                    .extend([(c, t_in), (c, e_in), (t_out, j), (e_out, j)]);
                (c, j)
            }
            _ => {
                let h = self.block();
                let (b_in, b_out) = self.region(budget - 2);
                let x = self.block();
                self.edges.extend([(h, b_in), (b_out, h), (h, x)]);
                (h, x)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_graph() {
        let g = parse_edge_list("entry A\nA B").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.name(g.entry()), "A");
    }

    #[test]
    fn entry_only_graph() {
        let g = parse_edge_list("# cfg\n\nentry start\n").unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = parse_edge_list("entry a\na b\na b # again\nb a\n").unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 0)]);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_edge_list("entry a\n\na b c\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::Malformed {
                line: 3,
                message: "expected `src dst`, found 3 token(s)".into()
            }
        );
        assert_eq!(parse_edge_list("a b\n"), Err(ParseError::MissingEntry));
        assert_eq!(
            parse_edge_list("# nothing\n"),
            Err(ParseError::MissingEntry)
        );
        assert!(matches!(
            parse_edge_list("entry\n"),
            Err(ParseError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = random_digraph(30, 3, 9);
        let h = parse_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(h.edge_count(), g.edge_count());
        for (&(a, b), &(c, d)) in g.edges().iter().zip(h.edges()) {
            assert_eq!((g.name(a), g.name(b)), (h.name(c), h.name(d)));
        }
    }

    #[test]
    fn structured_cfg_shape() {
        for seed in 0..20 {
            let g = random_cfg(200, seed);
            assert_eq!(g.vertex_count(), 200);
            let succ = g.successors();
            assert!(succ.iter().all(|s| s.len() <= 2));
            // Every vertex reachable from the entry.
            let mut seen = [false; 200];
            let mut stack = vec![g.entry()];
            while let Some(v) = stack.pop() {
                if !std::mem::replace(&mut seen[v as usize], true) {
                    stack.extend(&succ[v as usize]);
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }
}
