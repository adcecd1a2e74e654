//! Lookup, iteration and structural equality.

use super::{Cell, Config, Meta, NodeRef};
use crate::bitmap::{mask, Pattern, BITS_PER_LEVEL};

impl<C: Config> NodeRef<C> {
    /// Payload cell for `key`, if present.
    #[inline]
    pub(crate) fn find(&self, key: &C::Key, hash: u32) -> Option<&Cell<C>> {
        let mut node = self;
        let mut shift = 0;
        loop {
            let bm = match *node.meta() {
                Meta::Trie(bm) => bm,
                Meta::Collision(_) => {
                    return node
                        .cells()
                        .iter()
                        .find(|c| c.key().is_some_and(|k| k == key));
                }
            };
            let branch = mask(hash, shift);
            match bm.get(branch) {
                Pattern::Empty => return None,
                Pattern::Inline => {
                    let cell = &node.cells()[bm.index(Pattern::Inline, branch)];
                    return match cell {
                        Cell::Inline(e) if C::inline_key(e) == key => Some(cell),
                        _ => None,
                    };
                }
                Pattern::Collection => {
                    let pos = bm.count(Pattern::Inline) + bm.index(Pattern::Collection, branch);
                    let cell = &node.cells()[pos];
                    return match cell {
                        Cell::Collection(e) if C::collection_key(e) == key => Some(cell),
                        _ => None,
                    };
                }
                Pattern::Node => {
                    let cells = node.cells();
                    let pos =
                        cells.len() - bm.count(Pattern::Node) + bm.index(Pattern::Node, branch);
                    let Cell::Node(child) = &cells[pos] else {
                        unreachable!("node region holds sub-nodes")
                    };
                    node = child;
                    shift += BITS_PER_LEVEL;
                }
            }
        }
    }

    /// Depth-first stream of payload cells: per node the inline region, then
    /// the collection region, then each sub-node in branch order.
    pub(crate) fn payloads(&self) -> Cells<'_, C> {
        Cells {
            stack: vec![(self.cells(), payload_len(self))],
            current: [].iter(),
        }
    }

    /// Structural equality. Both sides must be canonical for this to decide
    /// content equality.
    pub(crate) fn structurally_eq(&self, other: &Self) -> bool
    where
        C::Inline: PartialEq,
        C::Collection: PartialEq,
    {
        if NodeRef::ptr_eq(self, other) {
            return true;
        }
        match (self.meta(), other.meta()) {
            (Meta::Trie(a), Meta::Trie(b)) => {
                a == b
                    && self
                        .cells()
                        .iter()
                        .zip(other.cells())
                        .all(|(x, y)| cell_eq(x, y))
            }
            (Meta::Collision(a), Meta::Collision(b)) => {
                a == b
                    && self.cells().len() == other.cells().len()
                    && self.cells().iter().all(|x| {
                        let key = x.key();
                        other
                            .cells()
                            .iter()
                            .find(|y| y.key() == key)
                            .is_some_and(|y| cell_eq(x, y))
                    })
            }
            _ => false,
        }
    }

    /// Shape statistics of the subtree.
    pub(crate) fn stats(&self) -> TrieStats {
        let mut stats = TrieStats::default();
        self.collect_stats(0, &mut stats);
        stats
    }

    fn collect_stats(&self, depth: u32, stats: &mut TrieStats) {
        stats.max_depth = stats.max_depth.max(depth);
        match self.meta() {
            Meta::Trie(bm) => {
                stats.trie_nodes += 1;
                let h = bm.histogram();
                stats.inline_entries += h[Pattern::Inline] as usize;
                stats.collection_entries += h[Pattern::Collection] as usize;
            }
            Meta::Collision(_) => {
                stats.collision_nodes += 1;
                for c in self.cells() {
                    match c {
                        Cell::Inline(_) => stats.inline_entries += 1,
                        Cell::Collection(_) => stats.collection_entries += 1,
                        Cell::Node(_) => {}
                    }
                }
            }
        }
        for c in self.cells() {
            if let Cell::Node(child) = c {
                child.collect_stats(depth + 1, stats);
            }
        }
    }
}

fn cell_eq<C: Config>(x: &Cell<C>, y: &Cell<C>) -> bool
where
    C::Inline: PartialEq,
    C::Collection: PartialEq,
{
    match (x, y) {
        (Cell::Inline(a), Cell::Inline(b)) => a == b,
        (Cell::Collection(a), Cell::Collection(b)) => a == b,
        (Cell::Node(a), Cell::Node(b)) => a.structurally_eq(b),
        _ => false,
    }
}

fn payload_len<C: Config>(node: &NodeRef<C>) -> usize {
    match node.meta() {
        Meta::Trie(bm) => bm.count(Pattern::Inline) + bm.count(Pattern::Collection),
        Meta::Collision(_) => node.cells().len(),
    }
}

/// Shape of a trie: node counts, payload categories, depth.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrieStats {
    pub trie_nodes: usize,
    pub collision_nodes: usize,
    pub inline_entries: usize,
    pub collection_entries: usize,
    /// Deepest node level; the root is level 0.
    pub max_depth: u32,
}

/// Iterator over the payload cells of a trie.
pub(crate) struct Cells<'a, C: Config> {
    /// Per pending node: its cells and the length of its payload prefix.
    stack: Vec<(&'a [Cell<C>], usize)>,
    current: std::slice::Iter<'a, Cell<C>>,
}

impl<'a, C: Config> Iterator for Cells<'a, C> {
    type Item = &'a Cell<C>;

    fn next(&mut self) -> Option<&'a Cell<C>> {
        loop {
            if let Some(cell) = self.current.next() {
                return Some(cell);
            }
            let (cells, payloads) = self.stack.pop()?;
            let (payload, nodes) = cells.split_at(payloads);
            // Push sub-nodes in reverse so the lowest branch is visited first.
            for cell in nodes.iter().rev() {
                if let Cell::Node(child) = cell {
                    self.stack.push((child.cells(), payload_len(child)));
                }
            }
            self.current = payload.iter();
        }
    }
}
