//! Persistent insert and delete.
//!
//! Both return `None` when the structure is left unchanged, so callers can
//! keep their existing handle. Every rebuilt node is in canonical form:
//! collection payloads hold at least two values, and no node below the root
//! is left with a single payload and no sub-nodes.

use std::hash::BuildHasher;

use super::{Cell, Change, Config, Ctx, Merge, Meta, NodeRef, Outcome, Remover};
use crate::bitmap::{mask, Pattern, BITS_PER_LEVEL};
use crate::hash::hash32;

impl<C: Config> NodeRef<C> {
    /// Inserts the payload described by `m`, whose key hashes to `hash`, at
    /// the level of `shift`.
    pub(crate) fn insert<S: BuildHasher, M: Merge<C>>(
        &self,
        m: M,
        hash: u32,
        shift: u32,
        ctx: &Ctx<'_, S>,
    ) -> Option<Change<C>> {
        let bm = match *self.meta() {
            Meta::Trie(bm) => bm,
            Meta::Collision(h) => return self.collision_insert(h, m, ctx),
        };
        let branch = mask(hash, shift);
        let pattern = bm.get(branch);
        let policy = ctx.policy;
        match pattern {
            Pattern::Empty => {
                let (cell, delta) = m.fresh();
                Some(Change {
                    node: self.edit(bm, branch, cell.pattern(), Some(cell), policy),
                    delta,
                })
            }
            Pattern::Node => {
                let pos = super::cell_position(bm, pattern, branch);
                let Cell::Node(child) = &self.cells()[pos] else {
                    unreachable!("node region holds sub-nodes")
                };
                let change = child.insert(m, hash, shift + BITS_PER_LEVEL, ctx)?;
                Some(Change {
                    node: self.edit(
                        bm,
                        branch,
                        Pattern::Node,
                        Some(Cell::Node(change.node)),
                        policy,
                    ),
                    delta: change.delta,
                })
            }
            Pattern::Inline | Pattern::Collection => {
                let pos = super::cell_position(bm, pattern, branch);
                let existing = &self.cells()[pos];
                let existing_key = existing.key().expect("payload cell");
                if existing_key == m.key() {
                    let outcome = m.merge(existing, ctx);
                    return self.apply(bm, branch, outcome, policy);
                }
                let existing_hash = hash32(ctx.hasher, existing_key);
                let (cell, delta) = m.fresh();
                let sub = NodeRef::pair(
                    existing.clone(),
                    existing_hash,
                    cell,
                    hash,
                    shift + BITS_PER_LEVEL,
                    policy,
                );
                Some(Change {
                    node: self.edit(bm, branch, Pattern::Node, Some(Cell::Node(sub)), policy),
                    delta,
                })
            }
        }
    }

    /// Deletes what `remover` selects from the payload keyed by `key`.
    pub(crate) fn delete<S: BuildHasher, R: Remover<C>>(
        &self,
        key: &C::Key,
        hash: u32,
        shift: u32,
        remover: &R,
        ctx: &Ctx<'_, S>,
    ) -> Option<Change<C>> {
        let bm = match *self.meta() {
            Meta::Trie(bm) => bm,
            Meta::Collision(h) => return self.collision_delete(h, key, remover, ctx),
        };
        let branch = mask(hash, shift);
        let pattern = bm.get(branch);
        let policy = ctx.policy;
        match pattern {
            Pattern::Empty => None,
            Pattern::Inline | Pattern::Collection => {
                let pos = super::cell_position(bm, pattern, branch);
                let outcome = match &self.cells()[pos] {
                    Cell::Inline(e) if C::inline_key(e) == key => remover.on_inline(e),
                    Cell::Collection(e) if C::collection_key(e) == key => {
                        remover.on_collection(e, ctx)
                    }
                    _ => return None,
                };
                self.apply(bm, branch, outcome, policy)
            }
            Pattern::Node => {
                let pos = super::cell_position(bm, pattern, branch);
                let Cell::Node(child) = &self.cells()[pos] else {
                    unreachable!("node region holds sub-nodes")
                };
                let change = child.delete(key, hash, shift + BITS_PER_LEVEL, remover, ctx)?;
                let delta = change.delta;
                if !change.node.is_single_payload() {
                    let node = self.edit(
                        bm,
                        branch,
                        Pattern::Node,
                        Some(Cell::Node(change.node)),
                        policy,
                    );
                    return Some(Change { node, delta });
                }
                let only_child = bm.count(Pattern::Node) == 1
                    && bm.count(Pattern::Inline) + bm.count(Pattern::Collection) == 0;
                if only_child && shift > 0 {
                    // Hand the lone payload up; an ancestor inlines it.
                    return Some(change);
                }
                let payload = change.node.single_payload().clone();
                let node = self.edit(bm, branch, payload.pattern(), Some(payload), policy);
                Some(Change { node, delta })
            }
        }
    }

    fn apply(
        &self,
        bm: crate::bitmap::PatternBitmap,
        branch: u32,
        outcome: Outcome<C>,
        policy: crate::storage::StoragePolicy,
    ) -> Option<Change<C>> {
        let (pattern, cell, delta) = match outcome {
            Outcome::Unchanged => return None,
            Outcome::Remove(d) => (Pattern::Empty, None, d),
            Outcome::Inline(e, d) => (Pattern::Inline, Some(Cell::Inline(e)), d),
            Outcome::Collection(e, d) => (Pattern::Collection, Some(Cell::Collection(e)), d),
        };
        Some(Change {
            node: self.edit(bm, branch, pattern, cell, policy),
            delta,
        })
    }

    fn collision_insert<S: BuildHasher, M: Merge<C>>(
        &self,
        hash: u32,
        m: M,
        ctx: &Ctx<'_, S>,
    ) -> Option<Change<C>> {
        let key = m.key();
        let found = self
            .cells()
            .iter()
            .position(|c| c.key().is_some_and(|k| k == key));
        let Some(index) = found else {
            let (cell, delta) = m.fresh();
            return Some(Change {
                node: self.collision_push(hash, cell, ctx.policy),
                delta,
            });
        };
        let outcome = m.merge(&self.cells()[index], ctx);
        self.apply_collision(hash, index, outcome, ctx)
    }

    fn collision_delete<S: BuildHasher, R: Remover<C>>(
        &self,
        hash: u32,
        key: &C::Key,
        remover: &R,
        ctx: &Ctx<'_, S>,
    ) -> Option<Change<C>> {
        let index = self
            .cells()
            .iter()
            .position(|c| c.key().is_some_and(|k| k == key))?;
        let outcome = match &self.cells()[index] {
            Cell::Inline(e) => remover.on_inline(e),
            Cell::Collection(e) => remover.on_collection(e, ctx),
            Cell::Node(_) => unreachable!("collision nodes hold payloads only"),
        };
        self.apply_collision(hash, index, outcome, ctx)
    }

    fn apply_collision<S>(
        &self,
        hash: u32,
        index: usize,
        outcome: Outcome<C>,
        ctx: &Ctx<'_, S>,
    ) -> Option<Change<C>> {
        let (cell, delta) = match outcome {
            Outcome::Unchanged => return None,
            Outcome::Remove(d) => (None, d),
            Outcome::Inline(e, d) => (Some(Cell::Inline(e)), d),
            Outcome::Collection(e, d) => (Some(Cell::Collection(e)), d),
        };
        Some(Change {
            node: self.collision_edit(hash, index, cell, ctx.policy),
            delta,
        })
    }
}
