//! Node-level algorithms shared by every collection in the crate.
//!
//! A trie node is a [`PatternBitmap`] plus one [`SlotStorage`] allocation
//! whose cells are grouped in three contiguous regions:
//!
//! ```text
//! [ inline payloads | collection payloads | sub-nodes ]
//! ```
//!
//! Each region is sorted by branch index, so the position of a cell is its
//! region offset plus [`PatternBitmap::index`] for its category. Keys whose
//! full 32-bit hashes collide end up in a collision node below the last trie
//! level.
//!
//! The algorithms are generic over a [`Config`] that fixes what an inline
//! and a collection payload are. Maps and sets only ever use the inline
//! category; the multi-map uses both.

mod check;
mod config;
mod query;
mod update;

use std::fmt;
use std::hash::BuildHasher;

use crate::bitmap::{Pattern, PatternBitmap, BITS_PER_LEVEL, MAX_SHIFT};
use crate::storage::{FootprintAcc, SlotBuilder, SlotStorage, StoragePolicy};

pub use check::Violation;
pub(crate) use config::{
    KeyRemover, MapConfig, MultiConfig, RawSet, ValueRemover, WholeKeyRemover,
};
pub use query::TrieStats;

/// Shift of the first level below the trie proper, where collision nodes live.
pub(crate) const COLLISION_SHIFT: u32 = MAX_SHIFT + BITS_PER_LEVEL;

/// Payload layout of one kind of collection.
pub(crate) trait Config: Sized {
    type Key: Eq + std::hash::Hash;
    type Inline: Clone;
    type Collection: Clone;

    /// Slots taken by one inline entry.
    const INLINE_WIDTH: usize;
    /// Slots taken by one collection entry.
    const COLLECTION_WIDTH: usize;

    fn inline_key(entry: &Self::Inline) -> &Self::Key;
    fn collection_key(entry: &Self::Collection) -> &Self::Key;

    /// An inline entry with an equal key is already present.
    fn merge_inline<S: BuildHasher>(
        existing: &Self::Inline,
        incoming: Self::Inline,
        ctx: &Ctx<'_, S>,
    ) -> Outcome<Self>;

    /// A collection entry with an equal key is already present.
    fn merge_collection<S: BuildHasher>(
        existing: &Self::Collection,
        incoming: Self::Inline,
        ctx: &Ctx<'_, S>,
    ) -> Outcome<Self>;

    /// Number of values held by a collection payload.
    fn collection_len(entry: &Self::Collection) -> usize;

    /// Checks a collection payload's own invariants.
    fn check_collection<S: BuildHasher>(
        entry: &Self::Collection,
        ctx: &Ctx<'_, S>,
    ) -> Result<(), Violation>;

    /// Adds whatever a collection payload references to the footprint.
    fn collection_footprint(entry: &Self::Collection, acc: &mut FootprintAcc);
}

/// What to delete once the key's payload has been found.
pub(crate) trait Remover<C: Config> {
    fn on_inline(&self, entry: &C::Inline) -> Outcome<C>;
    fn on_collection<S: BuildHasher>(&self, entry: &C::Collection, ctx: &Ctx<'_, S>) -> Outcome<C>;
}

/// How an insertion combines with a payload already stored under its key.
pub(crate) trait Merge<C: Config> {
    fn key(&self) -> &C::Key;
    /// Cell to store, and its delta, when the key is absent.
    fn fresh(self) -> (Cell<C>, Delta);
    fn merge<S: BuildHasher>(self, existing: &Cell<C>, ctx: &Ctx<'_, S>) -> Outcome<C>;
}

/// Adds one inline entry, merging per the config.
pub(crate) struct Entry<C: Config>(pub C::Inline);

impl<C: Config> Merge<C> for Entry<C> {
    #[inline]
    fn key(&self) -> &C::Key {
        C::inline_key(&self.0)
    }

    fn fresh(self) -> (Cell<C>, Delta) {
        (Cell::Inline(self.0), Delta::new(1, 1))
    }

    fn merge<S: BuildHasher>(self, existing: &Cell<C>, ctx: &Ctx<'_, S>) -> Outcome<C> {
        match existing {
            Cell::Inline(e) => C::merge_inline(e, self.0, ctx),
            Cell::Collection(e) => C::merge_collection(e, self.0, ctx),
            Cell::Node(_) => unreachable!("merge target is a payload"),
        }
    }
}

/// Stores a payload cell, replacing whatever the key held.
pub(crate) struct Replace<C: Config>(pub Cell<C>);

impl<C: Config> Cell<C> {
    /// Tuples held by a payload cell.
    fn tuples(&self) -> isize {
        match self {
            Cell::Inline(_) => 1,
            Cell::Collection(e) => C::collection_len(e) as isize,
            Cell::Node(_) => 0,
        }
    }
}

impl<C: Config> Merge<C> for Replace<C> {
    fn key(&self) -> &C::Key {
        self.0.key().expect("replacement is a payload")
    }

    fn fresh(self) -> (Cell<C>, Delta) {
        let n = self.0.tuples();
        (self.0, Delta::new(n, 1))
    }

    fn merge<S: BuildHasher>(self, existing: &Cell<C>, _: &Ctx<'_, S>) -> Outcome<C> {
        let delta = Delta::new(self.0.tuples() - existing.tuples(), 0);
        match self.0 {
            Cell::Inline(e) => Outcome::Inline(e, delta),
            Cell::Collection(e) => Outcome::Collection(e, delta),
            Cell::Node(_) => unreachable!("replacement is a payload"),
        }
    }
}

/// Hasher and layout policy threaded through every operation.
pub(crate) struct Ctx<'a, S> {
    pub hasher: &'a S,
    pub policy: StoragePolicy,
}

impl<'a, S> Ctx<'a, S> {
    pub fn new(hasher: &'a S, policy: StoragePolicy) -> Self {
        Ctx { hasher, policy }
    }
}

/// Change in flattened tuple count and distinct key count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Delta {
    pub tuples: isize,
    pub keys: isize,
}

impl Delta {
    pub const fn new(tuples: isize, keys: isize) -> Self {
        Delta { tuples, keys }
    }
}

/// Result of merging into, or removing from, one payload entry.
pub(crate) enum Outcome<C: Config> {
    Unchanged,
    Remove(Delta),
    Inline(C::Inline, Delta),
    Collection(C::Collection, Delta),
}

/// A rebuilt node plus the bookkeeping delta of the update.
pub(crate) struct Change<C: Config> {
    pub node: NodeRef<C>,
    pub delta: Delta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Meta {
    Trie(PatternBitmap),
    Collision(u32),
}

pub(crate) enum Cell<C: Config> {
    Inline(C::Inline),
    Collection(C::Collection),
    Node(NodeRef<C>),
}

impl<C: Config> Clone for Cell<C> {
    fn clone(&self) -> Self {
        match self {
            Cell::Inline(e) => Cell::Inline(e.clone()),
            Cell::Collection(e) => Cell::Collection(e.clone()),
            Cell::Node(n) => Cell::Node(n.clone()),
        }
    }
}

impl<C: Config> Cell<C> {
    pub fn pattern(&self) -> Pattern {
        match self {
            Cell::Inline(_) => Pattern::Inline,
            Cell::Collection(_) => Pattern::Collection,
            Cell::Node(_) => Pattern::Node,
        }
    }

    /// Key of a payload cell.
    pub fn key(&self) -> Option<&C::Key> {
        match self {
            Cell::Inline(e) => Some(C::inline_key(e)),
            Cell::Collection(e) => Some(C::collection_key(e)),
            Cell::Node(_) => None,
        }
    }

    fn slot_width(&self) -> usize {
        match self {
            Cell::Inline(_) => C::INLINE_WIDTH,
            Cell::Collection(_) => C::COLLECTION_WIDTH,
            Cell::Node(_) => 1,
        }
    }
}

impl<C: Config> fmt::Debug for Cell<C>
where
    C::Inline: fmt::Debug,
    C::Collection: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Inline(e) => f.debug_tuple("Inline").field(e).finish(),
            Cell::Collection(e) => f.debug_tuple("Collection").field(e).finish(),
            Cell::Node(n) => f.debug_tuple("Node").field(n).finish(),
        }
    }
}

/// Shared handle to an immutable trie or collision node.
pub(crate) struct NodeRef<C: Config>(SlotStorage<Meta, Cell<C>>);

impl<C: Config> Clone for NodeRef<C> {
    fn clone(&self) -> Self {
        NodeRef(self.0.clone())
    }
}

impl<C: Config> fmt::Debug for NodeRef<C>
where
    C::Inline: fmt::Debug,
    C::Collection: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Node")
            .field("meta", self.meta())
            .field("class", &self.0.class())
            .field("cells", &self.cells())
            .finish()
    }
}

impl<C: Config> NodeRef<C> {
    pub fn empty(policy: StoragePolicy) -> Self {
        NodeRef(SlotBuilder::with_capacity(0).finish(
            Meta::Trie(PatternBitmap::EMPTY),
            0,
            0,
            policy,
        ))
    }

    #[inline]
    pub fn meta(&self) -> &Meta {
        self.0.meta()
    }

    #[inline]
    pub fn cells(&self) -> &[Cell<C>] {
        self.0.cells()
    }

    pub fn storage(&self) -> &SlotStorage<Meta, Cell<C>> {
        &self.0
    }

    #[inline]
    pub fn ptr_eq(a: &Self, b: &Self) -> bool {
        SlotStorage::ptr_eq(&a.0, &b.0)
    }

    #[inline]
    pub fn ptr_eq_root(&self, other: &Self) -> bool {
        Self::ptr_eq(self, other)
    }

    /// True when the node holds exactly one payload entry and no sub-nodes.
    pub fn is_single_payload(&self) -> bool {
        match self.meta() {
            Meta::Trie(bm) => {
                bm.count(Pattern::Node) == 0
                    && bm.count(Pattern::Inline) + bm.count(Pattern::Collection) == 1
            }
            Meta::Collision(_) => self.cells().len() == 1,
        }
    }

    /// The only payload of a node for which [`Self::is_single_payload`]
    /// holds.
    pub fn single_payload(&self) -> &Cell<C> {
        debug_assert!(self.is_single_payload());
        match self.meta() {
            Meta::Trie(bm) => {
                let (branch, pattern) = bm.recover_single();
                &self.cells()[cell_position(*bm, pattern, branch)]
            }
            Meta::Collision(_) => &self.cells()[0],
        }
    }
}

/// Position of `branch`'s cell given that it holds `pattern`.
#[inline]
pub(crate) fn cell_position(bm: PatternBitmap, pattern: Pattern, branch: u32) -> usize {
    match pattern {
        Pattern::Inline => bm.index(Pattern::Inline, branch),
        Pattern::Collection => bm.count(Pattern::Inline) + bm.index(Pattern::Collection, branch),
        Pattern::Node => {
            bm.count(Pattern::Inline)
                + bm.count(Pattern::Collection)
                + bm.index(Pattern::Node, branch)
        }
        Pattern::Empty => unreachable!("empty branches have no cell"),
    }
}

/// Slot counts `(inline region, other regions)` for a trie bitmap.
pub(crate) fn trie_slots<C: Config>(bm: PatternBitmap) -> (usize, usize) {
    (
        C::INLINE_WIDTH * bm.count(Pattern::Inline),
        C::COLLECTION_WIDTH * bm.count(Pattern::Collection) + bm.count(Pattern::Node),
    )
}

fn collision_slots<C: Config>(cells: &[Cell<C>]) -> (usize, usize) {
    let mut inline = 0;
    let mut other = 0;
    for c in cells {
        match c {
            Cell::Inline(_) => inline += C::INLINE_WIDTH,
            _ => other += c.slot_width(),
        }
    }
    (inline, other)
}

/// Copies the cells of `src` with index `skip` removed, restricted to the
/// range `[from, to)` of that reduced sequence.
fn copy_skipping<T: Clone>(
    b: &mut SlotBuilder<T>,
    src: &[T],
    skip: Option<usize>,
    from: usize,
    to: usize,
) {
    match skip {
        None => {
            if from < to {
                b.copy_range(src, from, b.len(), to - from);
            }
        }
        Some(s) => {
            let low_end = to.min(s);
            if from < low_end {
                b.copy_range(src, from, b.len(), low_end - from);
            }
            let high_start = from.max(s);
            if high_start < to {
                b.copy_range(src, high_start + 1, b.len(), to - high_start);
            }
        }
    }
}

impl<C: Config> NodeRef<C> {
    /// Copy of a trie node with `branch` switched to `pattern`.
    ///
    /// The old cell at `branch` (if any) is dropped and `cell` (required
    /// unless `pattern` is empty) is placed at its new rank.
    pub(crate) fn edit(
        &self,
        bm: PatternBitmap,
        branch: u32,
        pattern: Pattern,
        cell: Option<Cell<C>>,
        policy: StoragePolicy,
    ) -> NodeRef<C> {
        let old_pattern = bm.get(branch);
        let old_pos =
            (old_pattern != Pattern::Empty).then(|| cell_position(bm, old_pattern, branch));
        let new_bm = bm.set(branch, pattern);
        let src = self.cells();
        let remaining = src.len() - old_pos.is_some() as usize;

        let mut b = SlotBuilder::with_capacity(remaining + cell.is_some() as usize);
        match cell {
            Some(cell) => {
                debug_assert_eq!(cell.pattern(), pattern);
                let new_pos = cell_position(new_bm, pattern, branch);
                copy_skipping(&mut b, src, old_pos, 0, new_pos);
                b.push(cell);
                copy_skipping(&mut b, src, old_pos, new_pos, remaining);
            }
            None => {
                debug_assert_eq!(pattern, Pattern::Empty);
                copy_skipping(&mut b, src, old_pos, 0, remaining);
            }
        }
        let (t, u) = trie_slots::<C>(new_bm);
        NodeRef(b.finish(Meta::Trie(new_bm), t, u, policy))
    }

    pub(crate) fn collision(hash: u32, cells: SlotBuilder<Cell<C>>, policy: StoragePolicy) -> Self {
        let (t, u) = collision_slots::<C>(cells.as_slice());
        NodeRef(cells.finish(Meta::Collision(hash), t, u, policy))
    }

    /// Node holding two payload cells whose keys differ, placed at `shift`.
    pub(crate) fn pair(
        a: Cell<C>,
        hash_a: u32,
        b: Cell<C>,
        hash_b: u32,
        shift: u32,
        policy: StoragePolicy,
    ) -> Self {
        if shift > MAX_SHIFT {
            debug_assert_eq!(hash_a, hash_b);
            let mut cells = SlotBuilder::with_capacity(2);
            cells.push(a);
            cells.push(b);
            return Self::collision(hash_a, cells, policy);
        }
        let branch_a = crate::bitmap::mask(hash_a, shift);
        let branch_b = crate::bitmap::mask(hash_b, shift);
        if branch_a == branch_b {
            let child = Self::pair(a, hash_a, b, hash_b, shift + BITS_PER_LEVEL, policy);
            let bm = PatternBitmap::EMPTY.set(branch_a, Pattern::Node);
            let mut cells = SlotBuilder::with_capacity(1);
            cells.push(Cell::Node(child));
            let (t, u) = trie_slots::<C>(bm);
            return NodeRef(cells.finish(Meta::Trie(bm), t, u, policy));
        }
        let bm = PatternBitmap::EMPTY
            .set(branch_a, a.pattern())
            .set(branch_b, b.pattern());
        let a_first = cell_position(bm, a.pattern(), branch_a) == 0;
        let mut cells = SlotBuilder::with_capacity(2);
        if a_first {
            cells.push(a);
            cells.push(b);
        } else {
            cells.push(b);
            cells.push(a);
        }
        let (t, u) = trie_slots::<C>(bm);
        NodeRef(cells.finish(Meta::Trie(bm), t, u, policy))
    }

    /// Copy of a collision node with cell `index` replaced (`Some`) or
    /// removed (`None`).
    pub(crate) fn collision_edit(
        &self,
        hash: u32,
        index: usize,
        cell: Option<Cell<C>>,
        policy: StoragePolicy,
    ) -> Self {
        let src = self.cells();
        let mut b = SlotBuilder::with_capacity(src.len());
        b.copy_range(src, 0, 0, index);
        if let Some(cell) = cell {
            b.push(cell);
        }
        b.copy_range(src, index + 1, b.len(), src.len() - index - 1);
        Self::collision(hash, b, policy)
    }

    /// Copy of a collision node with `cell` appended.
    pub(crate) fn collision_push(&self, hash: u32, cell: Cell<C>, policy: StoragePolicy) -> Self {
        let src = self.cells();
        let mut b = SlotBuilder::with_capacity(src.len() + 1);
        b.copy_range(src, 0, 0, src.len());
        b.push(cell);
        Self::collision(hash, b, policy)
    }
}
