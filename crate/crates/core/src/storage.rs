//! Slot storage behind trie nodes.
//!
//! A node's cells live either inline in the node allocation
//! ([`StorageClass::FixedArity`], for nodes of at most
//! [`FIXED_ARITY_MAX`] slots) or in a separate heap block referenced from the
//! node ([`StorageClass::Generic`]). The class is looked up in a
//! two-dimensional table indexed by the inline-region slot count and the
//! remaining slot count.
//!
//! This module also carries the abstract footprint model used to compare
//! encodings: words for object headers, bitmaps, slots and out-of-line
//! indirections, with shared structure counted once.

use std::collections::HashSet;
use std::fmt;
use std::io;
use std::sync::Arc;

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

/// Largest slot count that gets an inline, fixed-arity layout.
pub const FIXED_ARITY_MAX: usize = 8;

/// Upper bound on slots per trie node (32 branches of at most two slots).
pub const MAX_SLOTS: usize = 64;

// Fixed-arity nodes never hold more cells than slots.
const SCRATCH_CELLS: usize = FIXED_ARITY_MAX;

/// Physical layout of a node's slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StorageClass {
    /// Cells in a separate heap block; one extra indirection per node.
    Generic,
    /// Cells inline in the node; the payload is the total slot count.
    FixedArity(u8),
}

impl StorageClass {
    pub const fn is_generic(self) -> bool {
        matches!(self, StorageClass::Generic)
    }
}

/// Whether a collection may use fixed-arity layouts at all.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StoragePolicy {
    #[default]
    Specialized,
    GenericOnly,
}

impl StoragePolicy {
    #[inline]
    pub fn select(self, inline_slots: usize, other_slots: usize) -> StorageClass {
        match self {
            StoragePolicy::Specialized => select_storage(inline_slots, other_slots),
            StoragePolicy::GenericOnly => StorageClass::Generic,
        }
    }
}

const fn build_table() -> [[StorageClass; MAX_SLOTS + 1]; MAX_SLOTS + 1] {
    let mut table = [[StorageClass::Generic; MAX_SLOTS + 1]; MAX_SLOTS + 1];
    let mut t = 0;
    while t <= FIXED_ARITY_MAX {
        let mut u = 0;
        while t + u <= FIXED_ARITY_MAX {
            table[t][u] = StorageClass::FixedArity((t + u) as u8);
            u += 1;
        }
        t += 1;
    }
    table
}

static SPECIALIZATIONS: [[StorageClass; MAX_SLOTS + 1]; MAX_SLOTS + 1] = build_table();

/// Storage class for a node with `inline_slots` slots in its inline region
/// and `other_slots` slots in its collection and sub-node regions.
///
/// Counts beyond [`MAX_SLOTS`] (large collision nodes) are always generic.
#[inline]
pub fn select_storage(inline_slots: usize, other_slots: usize) -> StorageClass {
    if inline_slots > MAX_SLOTS || other_slots > MAX_SLOTS {
        return StorageClass::Generic;
    }
    SPECIALIZATIONS[inline_slots][other_slots]
}

struct Block<M, S: ?Sized> {
    meta: M,
    inline_slots: u16,
    other_slots: u16,
    cells: S,
}

enum Repr<M, T> {
    Fixed(Arc<Block<M, [T]>>),
    Generic(Arc<Block<M, Box<[T]>>>),
}

/// Immutable, shareable node allocation: a header word `M` plus cells.
///
/// Cloning is a reference-count increment.
pub struct SlotStorage<M, T> {
    repr: Repr<M, T>,
}

impl<M, T> Clone for SlotStorage<M, T> {
    fn clone(&self) -> Self {
        let repr = match &self.repr {
            Repr::Fixed(b) => Repr::Fixed(Arc::clone(b)),
            Repr::Generic(b) => Repr::Generic(Arc::clone(b)),
        };
        SlotStorage { repr }
    }
}

impl<M, T> SlotStorage<M, T> {
    #[inline]
    pub fn meta(&self) -> &M {
        match &self.repr {
            Repr::Fixed(b) => &b.meta,
            Repr::Generic(b) => &b.meta,
        }
    }

    #[inline]
    pub fn cells(&self) -> &[T] {
        match &self.repr {
            Repr::Fixed(b) => &b.cells,
            Repr::Generic(b) => &b.cells,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cells().len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.cells().is_empty()
    }

    /// Slots in the inline region.
    pub fn inline_slots(&self) -> usize {
        match &self.repr {
            Repr::Fixed(b) => b.inline_slots as usize,
            Repr::Generic(b) => b.inline_slots as usize,
        }
    }

    /// Slots in the collection and sub-node regions.
    pub fn other_slots(&self) -> usize {
        match &self.repr {
            Repr::Fixed(b) => b.other_slots as usize,
            Repr::Generic(b) => b.other_slots as usize,
        }
    }

    pub fn slot_count(&self) -> usize {
        self.inline_slots() + self.other_slots()
    }

    pub fn class(&self) -> StorageClass {
        match &self.repr {
            Repr::Fixed(_) => StorageClass::FixedArity(self.slot_count() as u8),
            Repr::Generic(_) => StorageClass::Generic,
        }
    }

    /// Address identifying this allocation; equal for clones.
    #[inline]
    pub fn addr(&self) -> usize {
        match &self.repr {
            Repr::Fixed(b) => Arc::as_ptr(b) as *const u8 as usize,
            Repr::Generic(b) => Arc::as_ptr(b) as *const u8 as usize,
        }
    }

    #[inline]
    pub fn ptr_eq(a: &Self, b: &Self) -> bool {
        a.addr() == b.addr()
    }
}

impl<M: fmt::Debug, T: fmt::Debug> fmt::Debug for SlotStorage<M, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SlotStorage")
            .field("class", &self.class())
            .field("meta", self.meta())
            .field("cells", &self.cells())
            .finish()
    }
}

enum Scratch<T> {
    Inline(ArrayVec<T, SCRATCH_CELLS>),
    Heap(Vec<T>),
}

/// Sequential writer for a node under construction.
///
/// Cells are written front to back; the write cursor is [`SlotBuilder::len`].
/// Nothing is shared until [`SlotBuilder::finish`] publishes the storage.
pub struct SlotBuilder<T> {
    scratch: Scratch<T>,
}

impl<T> SlotBuilder<T> {
    /// Builder for a node expected to hold `cells` cells.
    pub fn with_capacity(cells: usize) -> Self {
        let scratch = if cells <= SCRATCH_CELLS {
            Scratch::Inline(ArrayVec::new())
        } else {
            Scratch::Heap(Vec::with_capacity(cells))
        };
        SlotBuilder { scratch }
    }

    #[inline]
    pub fn len(&self) -> usize {
        match &self.scratch {
            Scratch::Inline(v) => v.len(),
            Scratch::Heap(v) => v.len(),
        }
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cells written so far.
    pub fn as_slice(&self) -> &[T] {
        match &self.scratch {
            Scratch::Inline(v) => v.as_slice(),
            Scratch::Heap(v) => v.as_slice(),
        }
    }

    #[inline]
    pub fn push(&mut self, cell: T) {
        match &mut self.scratch {
            Scratch::Inline(v) => {
                if let Err(err) = v.try_push(cell) {
                    let mut heap = Vec::with_capacity(MAX_SLOTS);
                    heap.extend(v.drain(..));
                    heap.push(err.element());
                    self.scratch = Scratch::Heap(heap);
                }
            }
            Scratch::Heap(v) => v.push(cell),
        }
    }

    /// Copies `src[src_off..src_off + len]` to positions
    /// `dst_off..dst_off + len`. `dst_off` must equal the write cursor.
    #[inline]
    pub fn copy_range(&mut self, src: &[T], src_off: usize, dst_off: usize, len: usize)
    where
        T: Clone,
    {
        assert_eq!(dst_off, self.len(), "copy_range must write at the cursor");
        let src = &src[src_off..src_off + len];
        match &mut self.scratch {
            Scratch::Heap(v) => v.extend_from_slice(src),
            Scratch::Inline(v) if v.remaining_capacity() >= len => {
                for cell in src {
                    v.push(cell.clone());
                }
            }
            Scratch::Inline(_) => {
                for cell in src {
                    self.push(cell.clone());
                }
            }
        }
    }

    /// Publishes the cells with header `meta`, choosing the layout from
    /// `policy` and the slot counts.
    pub fn finish<M>(
        self,
        meta: M,
        inline_slots: usize,
        other_slots: usize,
        policy: StoragePolicy,
    ) -> SlotStorage<M, T> {
        let class = policy.select(inline_slots, other_slots);
        let (inline_slots, other_slots) = (inline_slots as u16, other_slots as u16);
        let repr = match (class, self.scratch) {
            (StorageClass::Generic, Scratch::Inline(v)) => Repr::Generic(Arc::new(Block {
                meta,
                inline_slots,
                other_slots,
                cells: v.into_iter().collect::<Box<[T]>>(),
            })),
            (StorageClass::Generic, Scratch::Heap(v)) => Repr::Generic(Arc::new(Block {
                meta,
                inline_slots,
                other_slots,
                cells: v.into_boxed_slice(),
            })),
            (StorageClass::FixedArity(_), Scratch::Inline(v)) => {
                Repr::Fixed(fixed(meta, inline_slots, other_slots, v))
            }
            (StorageClass::FixedArity(_), Scratch::Heap(v)) => Repr::Fixed(fixed(
                meta,
                inline_slots,
                other_slots,
                v.into_iter().collect(),
            )),
        };
        SlotStorage { repr }
    }
}

fn fixed<M, T>(
    meta: M,
    inline_slots: u16,
    other_slots: u16,
    cells: ArrayVec<T, SCRATCH_CELLS>,
) -> Arc<Block<M, [T]>> {
    fn exact<M, T, const N: usize>(
        meta: M,
        inline_slots: u16,
        other_slots: u16,
        cells: ArrayVec<T, SCRATCH_CELLS>,
    ) -> Arc<Block<M, [T]>> {
        let mut it = cells.into_iter();
        let cells: [T; N] = std::array::from_fn(|_| it.next().expect("cell count checked"));
        Arc::new(Block {
            meta,
            inline_slots,
            other_slots,
            cells,
        })
    }

    match cells.len() {
        0 => exact::<M, T, 0>(meta, inline_slots, other_slots, cells),
        1 => exact::<M, T, 1>(meta, inline_slots, other_slots, cells),
        2 => exact::<M, T, 2>(meta, inline_slots, other_slots, cells),
        3 => exact::<M, T, 3>(meta, inline_slots, other_slots, cells),
        4 => exact::<M, T, 4>(meta, inline_slots, other_slots, cells),
        5 => exact::<M, T, 5>(meta, inline_slots, other_slots, cells),
        6 => exact::<M, T, 6>(meta, inline_slots, other_slots, cells),
        7 => exact::<M, T, 7>(meta, inline_slots, other_slots, cells),
        8 => exact::<M, T, 8>(meta, inline_slots, other_slots, cells),
        n => unreachable!("fixed-arity storage with {n} cells"),
    }
}

/// Word costs of the abstract memory model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FootprintModel {
    /// Per object (trie node, collision node, nested set handle).
    pub header_words: u64,
    /// Per trie node for the pattern bitmap; per collision node for its hash.
    pub bitmap_words: u64,
    /// Per slot.
    pub slot_words: u64,
    /// Per out-of-line storage block.
    pub indirection_words: u64,
}

impl Default for FootprintModel {
    fn default() -> Self {
        FootprintModel {
            header_words: 2,
            bitmap_words: 1,
            slot_words: 1,
            indirection_words: 1,
        }
    }
}

/// Modeled footprint. All `*_words` fields are in words; `slots`, `nodes`
/// and `nested_sets` are counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FootprintReport {
    pub words_total: u64,
    pub nodes: u64,
    pub slots: u64,
    pub headers: u64,
    pub bitmaps: u64,
    pub indirections: u64,
    pub nested_sets: u64,
}

impl FootprintReport {
    pub const CSV_HEADER: [&'static str; 7] = [
        "words_total",
        "nodes",
        "slots",
        "headers",
        "bitmaps",
        "indirections",
        "nested_sets",
    ];

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }

    /// Writes a header line and one row per report.
    pub fn write_csv<W: io::Write>(reports: &[FootprintReport], out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in reports {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Accumulates a footprint over a node graph, counting each allocation once.
#[derive(Debug)]
pub struct FootprintAcc {
    model: FootprintModel,
    visited: HashSet<usize>,
    report: FootprintReport,
}

impl FootprintAcc {
    pub fn new(model: FootprintModel) -> Self {
        FootprintAcc {
            model,
            visited: HashSet::new(),
            report: FootprintReport::default(),
        }
    }

    pub fn model(&self) -> &FootprintModel {
        &self.model
    }

    /// Records one node allocation. Returns `false` (and records nothing)
    /// when the storage was already counted.
    pub fn visit<M, T>(&mut self, storage: &SlotStorage<M, T>) -> bool {
        if !self.visited.insert(storage.addr()) {
            return false;
        }
        let m = self.model;
        let r = &mut self.report;
        r.nodes += 1;
        r.headers += m.header_words;
        r.bitmaps += m.bitmap_words;
        r.slots += storage.slot_count() as u64;
        if storage.class().is_generic() {
            r.indirections += m.indirection_words;
        }
        true
    }

    /// Records a nested set object: a header plus two fields (size and root
    /// reference). Handles are stored by value in their owner and therefore
    /// never shared.
    pub fn nested_set_handle(&mut self) {
        self.report.nested_sets += 1;
        self.report.headers += self.model.header_words;
        self.report.slots += 2;
    }

    pub fn finish(mut self) -> FootprintReport {
        let r = &mut self.report;
        r.words_total = r.headers + r.bitmaps + r.slots * self.model.slot_words + r.indirections;
        self.report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(cells: &[u32], t: usize, u: usize, policy: StoragePolicy) -> SlotStorage<u8, u32> {
        let mut b = SlotBuilder::with_capacity(cells.len());
        b.copy_range(cells, 0, 0, cells.len());
        b.finish(0, t, u, policy)
    }

    #[test]
    fn selection_table() {
        assert_eq!(select_storage(0, 0), StorageClass::FixedArity(0));
        assert_eq!(select_storage(4, 3), StorageClass::FixedArity(7));
        assert_eq!(select_storage(8, 0), StorageClass::FixedArity(8));
        assert_eq!(select_storage(5, 4), StorageClass::Generic);
        assert_eq!(select_storage(20, 10), StorageClass::Generic);
        assert_eq!(select_storage(64, 0), StorageClass::Generic);
        assert_eq!(select_storage(500, 0), StorageClass::Generic);
        for t in 0..=MAX_SLOTS {
            for u in 0..=(MAX_SLOTS - t) {
                let expected = if t + u <= FIXED_ARITY_MAX {
                    StorageClass::FixedArity((t + u) as u8)
                } else {
                    StorageClass::Generic
                };
                assert_eq!(select_storage(t, u), expected, "t={t} u={u}");
            }
        }
    }

    #[test]
    fn generic_policy_never_specializes() {
        assert_eq!(
            StoragePolicy::GenericOnly.select(0, 0),
            StorageClass::Generic
        );
        assert_eq!(
            StoragePolicy::Specialized.select(2, 1),
            StorageClass::FixedArity(3)
        );
    }

    #[test]
    fn empty_copy_leaves_destination_unchanged() {
        let src = [1u32, 2, 3];
        let mut b = SlotBuilder::with_capacity(1);
        b.push(9);
        b.copy_range(&src, 1, 1, 0);
        let s = b.finish(0u8, 1, 0, StoragePolicy::Specialized);
        assert_eq!(s.cells(), &[9]);
    }

    #[test]
    fn full_copy_is_identity() {
        let cells: Vec<u32> = (0..40).collect();
        for policy in [StoragePolicy::Specialized, StoragePolicy::GenericOnly] {
            let s = build(&cells, 40, 0, policy);
            let copy = build(s.cells(), s.inline_slots(), s.other_slots(), policy);
            assert_eq!(copy.cells(), s.cells());
            assert_eq!(copy.class(), StorageClass::Generic);
        }
        let small = build(&[1, 2, 3], 2, 1, StoragePolicy::Specialized);
        assert_eq!(small.class(), StorageClass::FixedArity(3));
        assert_eq!(small.cells(), &[1, 2, 3]);
    }

    #[test]
    fn insert_at_rank_matches_element_wise_rebuild() {
        let src: Vec<u32> = (0..7).map(|i| i * 10).collect();
        for rank in 0..=src.len() {
            let mut b = SlotBuilder::with_capacity(src.len() + 1);
            b.copy_range(&src, 0, 0, rank);
            b.push(999);
            b.copy_range(&src, rank, rank + 1, src.len() - rank);
            let fast = b.finish(0u8, 8, 0, StoragePolicy::Specialized);

            let mut naive = Vec::new();
            for (i, c) in src.iter().enumerate() {
                if i == rank {
                    naive.push(999);
                }
                naive.push(*c);
            }
            if rank == src.len() {
                naive.push(999);
            }
            assert_eq!(fast.cells(), naive.as_slice());
        }
    }

    #[test]
    #[should_panic(expected = "cursor")]
    fn copy_range_rejects_gaps() {
        let mut b = SlotBuilder::<u32>::with_capacity(2);
        b.copy_range(&[1, 2], 0, 1, 1);
    }

    #[test]
    fn builder_spills_past_scratch() {
        let mut b = SlotBuilder::with_capacity(0);
        for i in 0..100u32 {
            b.push(i);
        }
        let s = b.finish(0u8, 100, 0, StoragePolicy::Specialized);
        assert_eq!(s.len(), 100);
        assert_eq!(s.cells()[99], 99);
        assert!(s.class().is_generic());
    }

    #[test]
    fn clones_share_identity_and_count_once() {
        let s = build(&[1, 2], 2, 0, StoragePolicy::Specialized);
        let t = s.clone();
        assert!(SlotStorage::ptr_eq(&s, &t));
        let mut acc = FootprintAcc::new(FootprintModel::default());
        assert!(acc.visit(&s));
        assert!(!acc.visit(&t));
        let r = acc.finish();
        assert_eq!(r.nodes, 1);
        assert_eq!(r.words_total, 2 + 1 + 2);
    }

    #[test]
    fn generic_storage_costs_one_indirection() {
        let s = build(&[1, 2], 2, 0, StoragePolicy::GenericOnly);
        let mut acc = FootprintAcc::new(FootprintModel::default());
        acc.visit(&s);
        let r = acc.finish();
        assert_eq!(r.indirections, 1);
        assert_eq!(r.words_total, 6);
    }

    #[test]
    fn report_serializations() {
        let r = FootprintReport {
            words_total: 10,
            nodes: 2,
            slots: 3,
            headers: 4,
            bitmaps: 2,
            indirections: 1,
            nested_sets: 0,
        };
        let json = r.to_json();
        assert!(json.starts_with("{\"words_total\":10,\"nodes\":2"));
        let mut out = Vec::new();
        FootprintReport::write_csv(&[r], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "words_total,nodes,slots,headers,bitmaps,indirections,nested_sets\n10,2,3,4,2,1,0\n"
        );
    }
}
