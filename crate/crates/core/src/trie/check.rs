//! Invariant checking and footprint traversal.

use std::fmt;
use std::hash::BuildHasher;

use super::{collision_slots, trie_slots, Cell, Config, Ctx, Meta, NodeRef, COLLISION_SHIFT};
use crate::bitmap::{mask, Pattern, BITS_PER_LEVEL, MAX_SHIFT};
use crate::hash::hash32;
use crate::storage::FootprintAcc;

/// A broken structural invariant, with the path of branches leading to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    path: Vec<u32>,
    message: String,
}

impl Violation {
    pub(crate) fn new(message: impl Into<String>) -> Self {
        Violation {
            path: Vec::new(),
            message: message.into(),
        }
    }

    fn at(mut self, branch: u32) -> Self {
        self.path.insert(0, branch);
        self
    }

    /// Branch indices from the root to the offending node.
    pub fn path(&self) -> &[u32] {
        &self.path
    }

    pub fn message(&self) -> &str {
        &self.message
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at path {:?})", self.message, self.path)
    }
}

impl std::error::Error for Violation {}

/// Tuple and key totals of a checked subtree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Counts {
    pub tuples: usize,
    pub keys: usize,
}

fn prefix_mask(shift: u32) -> u32 {
    if shift >= 32 {
        u32::MAX
    } else {
        (1u32 << shift) - 1
    }
}

impl<C: Config> NodeRef<C> {
    /// Checks every invariant of the trie rooted here and returns its totals.
    pub(crate) fn check<S: BuildHasher>(&self, ctx: &Ctx<'_, S>) -> Result<Counts, Violation> {
        self.check_at(0, 0, true, ctx)
    }

    fn check_at<S: BuildHasher>(
        &self,
        shift: u32,
        prefix: u32,
        is_root: bool,
        ctx: &Ctx<'_, S>,
    ) -> Result<Counts, Violation> {
        let storage = self.storage();
        let expected_slots = match *self.meta() {
            Meta::Trie(bm) => trie_slots::<C>(bm),
            Meta::Collision(_) => collision_slots::<C>(self.cells()),
        };
        if (storage.inline_slots(), storage.other_slots()) != expected_slots {
            return Err(Violation::new(format!(
                "stored slot counts {:?} differ from layout {:?}",
                (storage.inline_slots(), storage.other_slots()),
                expected_slots
            )));
        }
        let expected_class = ctx.policy.select(expected_slots.0, expected_slots.1);
        if storage.class() != expected_class {
            return Err(Violation::new(format!(
                "storage class {:?}, policy selects {:?}",
                storage.class(),
                expected_class
            )));
        }
        match *self.meta() {
            Meta::Trie(bm) => self.check_trie(bm, shift, prefix, is_root, ctx),
            Meta::Collision(hash) => self.check_collision(hash, shift, prefix, is_root, ctx),
        }
    }

    fn check_payload<S: BuildHasher>(
        cell: &Cell<C>,
        shift: u32,
        prefix: u32,
        ctx: &Ctx<'_, S>,
        counts: &mut Counts,
    ) -> Result<u32, Violation> {
        let key = cell
            .key()
            .ok_or_else(|| Violation::new("sub-node in a payload region"))?;
        let hash = hash32(ctx.hasher, key);
        if hash & prefix_mask(shift) != prefix {
            return Err(Violation::new(format!(
                "key hash {hash:#010x} does not extend prefix {prefix:#x} at shift {shift}"
            )));
        }
        counts.keys += 1;
        match cell {
            Cell::Inline(_) => counts.tuples += 1,
            Cell::Collection(e) => {
                C::check_collection(e, ctx)?;
                counts.tuples += C::collection_len(e);
            }
            Cell::Node(_) => unreachable!(),
        }
        Ok(hash)
    }

    fn check_trie<S: BuildHasher>(
        &self,
        bm: crate::bitmap::PatternBitmap,
        shift: u32,
        prefix: u32,
        is_root: bool,
        ctx: &Ctx<'_, S>,
    ) -> Result<Counts, Violation> {
        if shift > MAX_SHIFT {
            return Err(Violation::new(format!("trie node at shift {shift}")));
        }
        let h = bm.histogram();
        let occupied = (h[Pattern::Inline] + h[Pattern::Collection] + h[Pattern::Node]) as usize;
        if occupied != self.cells().len() {
            return Err(Violation::new(format!(
                "bitmap has {occupied} occupied branches but node has {} cells",
                self.cells().len()
            )));
        }
        if !is_root {
            let payloads = h.payload_arity() as usize;
            let nodes = h[Pattern::Node] as usize;
            if payloads < 2 && nodes == 0 {
                return Err(Violation::new(format!(
                    "non-root node with {payloads} payload(s) and no sub-nodes"
                )));
            }
        }
        let mut counts = Counts::default();
        for (branch, pattern) in bm.occupied() {
            let pos = super::cell_position(bm, pattern, branch);
            let cell = &self.cells()[pos];
            if cell.pattern() != pattern {
                return Err(Violation::new(format!(
                    "branch {branch} is {pattern:?} in the bitmap but {:?} in its cell",
                    cell.pattern()
                ))
                .at(branch));
            }
            match cell {
                Cell::Node(child) => {
                    let sub = child
                        .check_at(
                            shift + BITS_PER_LEVEL,
                            prefix | (branch << shift),
                            false,
                            ctx,
                        )
                        .map_err(|v| v.at(branch))?;
                    counts.tuples += sub.tuples;
                    counts.keys += sub.keys;
                }
                _ => {
                    let hash = Self::check_payload(cell, shift, prefix, ctx, &mut counts)
                        .map_err(|v| v.at(branch))?;
                    if mask(hash, shift) != branch {
                        return Err(Violation::new(format!(
                            "key hash {hash:#010x} filed under branch {branch}"
                        ))
                        .at(branch));
                    }
                }
            }
        }
        Ok(counts)
    }

    fn check_collision<S: BuildHasher>(
        &self,
        hash: u32,
        shift: u32,
        prefix: u32,
        is_root: bool,
        ctx: &Ctx<'_, S>,
    ) -> Result<Counts, Violation> {
        if is_root || shift != COLLISION_SHIFT {
            return Err(Violation::new(format!("collision node at shift {shift}")));
        }
        if hash != prefix {
            return Err(Violation::new(format!(
                "collision node hash {hash:#010x} differs from path {prefix:#010x}"
            )));
        }
        let cells = self.cells();
        if cells.len() < 2 {
            return Err(Violation::new(format!(
                "collision node with {} entries",
                cells.len()
            )));
        }
        let mut counts = Counts::default();
        for (i, cell) in cells.iter().enumerate() {
            if matches!(cell, Cell::Node(_)) {
                return Err(Violation::new("sub-node inside a collision node"));
            }
            Self::check_payload(cell, shift, prefix, ctx, &mut counts)?;
            if cells[..i].iter().any(|c| c.key() == cell.key()) {
                return Err(Violation::new("duplicate key in a collision node"));
            }
        }
        Ok(counts)
    }

    /// Adds every allocation reachable from here to `acc`.
    pub(crate) fn footprint_into(&self, acc: &mut FootprintAcc) {
        if !acc.visit(self.storage()) {
            return;
        }
        for cell in self.cells() {
            match cell {
                Cell::Inline(_) => {}
                Cell::Collection(e) => C::collection_footprint(e, acc),
                Cell::Node(child) => child.footprint_into(acc),
            }
        }
    }
}
