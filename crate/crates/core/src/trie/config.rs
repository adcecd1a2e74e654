//! Payload layouts: CHAMP-style maps and sets (inline only) and the
//! heterogeneous multi-map (inline singletons plus nested value sets).

use std::convert::Infallible;
use std::fmt;
use std::hash::{BuildHasher, Hash};
use std::marker::PhantomData;

use super::{Cell, Config, Ctx, Delta, Entry, NodeRef, Outcome, Remover, Violation};
use crate::hash::hash32;
use crate::storage::{FootprintAcc, StoragePolicy};

pub(crate) struct SetConfig<T>(PhantomData<fn() -> T>);

impl<T: Eq + Hash + Clone> Config for SetConfig<T> {
    type Key = T;
    type Inline = T;
    type Collection = Infallible;

    const INLINE_WIDTH: usize = 1;
    const COLLECTION_WIDTH: usize = 2;

    #[inline]
    fn inline_key(entry: &T) -> &T {
        entry
    }

    fn collection_key(entry: &Infallible) -> &T {
        match *entry {}
    }

    fn merge_inline<S: BuildHasher>(_: &T, _: T, _: &Ctx<'_, S>) -> Outcome<Self> {
        Outcome::Unchanged
    }

    fn merge_collection<S: BuildHasher>(e: &Infallible, _: T, _: &Ctx<'_, S>) -> Outcome<Self> {
        match *e {}
    }

    fn collection_len(e: &Infallible) -> usize {
        match *e {}
    }

    fn check_collection<S: BuildHasher>(e: &Infallible, _: &Ctx<'_, S>) -> Result<(), Violation> {
        match *e {}
    }

    fn collection_footprint(e: &Infallible, _: &mut FootprintAcc) {
        match *e {}
    }
}

pub(crate) struct MapConfig<K, V>(PhantomData<fn() -> (K, V)>);

impl<K: Eq + Hash + Clone, V: Clone> Config for MapConfig<K, V> {
    type Key = K;
    type Inline = (K, V);
    type Collection = Infallible;

    const INLINE_WIDTH: usize = 2;
    const COLLECTION_WIDTH: usize = 2;

    #[inline]
    fn inline_key(entry: &(K, V)) -> &K {
        &entry.0
    }

    fn collection_key(entry: &Infallible) -> &K {
        match *entry {}
    }

    /// Maps replace the value of an existing key.
    fn merge_inline<S: BuildHasher>(_: &(K, V), incoming: (K, V), _: &Ctx<'_, S>) -> Outcome<Self> {
        Outcome::Inline(incoming, Delta::new(0, 0))
    }

    fn merge_collection<S: BuildHasher>(
        e: &Infallible,
        _: (K, V),
        _: &Ctx<'_, S>,
    ) -> Outcome<Self> {
        match *e {}
    }

    fn collection_len(e: &Infallible) -> usize {
        match *e {}
    }

    fn check_collection<S: BuildHasher>(e: &Infallible, _: &Ctx<'_, S>) -> Result<(), Violation> {
        match *e {}
    }

    fn collection_footprint(e: &Infallible, _: &mut FootprintAcc) {
        match *e {}
    }
}

/// Removes a whole key from a map or set.
pub(crate) struct KeyRemover;

impl<T: Eq + Hash + Clone> Remover<SetConfig<T>> for KeyRemover {
    fn on_inline(&self, _: &T) -> Outcome<SetConfig<T>> {
        Outcome::Remove(Delta::new(-1, -1))
    }

    fn on_collection<S: BuildHasher>(
        &self,
        e: &Infallible,
        _: &Ctx<'_, S>,
    ) -> Outcome<SetConfig<T>> {
        match *e {}
    }
}

impl<K: Eq + Hash + Clone, V: Clone> Remover<MapConfig<K, V>> for KeyRemover {
    fn on_inline(&self, _: &(K, V)) -> Outcome<MapConfig<K, V>> {
        Outcome::Remove(Delta::new(-1, -1))
    }

    fn on_collection<S: BuildHasher>(
        &self,
        e: &Infallible,
        _: &Ctx<'_, S>,
    ) -> Outcome<MapConfig<K, V>> {
        match *e {}
    }
}

/// Persistent hash set without its hasher: the nested value-set type of the
/// multi-map and the core of [`crate::PersistentSet`].
pub(crate) struct RawSet<T: Eq + Hash + Clone> {
    root: NodeRef<SetConfig<T>>,
    len: usize,
}

impl<T: Eq + Hash + Clone> Clone for RawSet<T> {
    fn clone(&self) -> Self {
        RawSet {
            root: self.root.clone(),
            len: self.len,
        }
    }
}

impl<T: Eq + Hash + Clone + fmt::Debug> fmt::Debug for RawSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl<T: Eq + Hash + Clone> PartialEq for RawSet<T> {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.root.structurally_eq(&other.root)
    }
}

impl<T: Eq + Hash + Clone> RawSet<T> {
    pub fn empty(policy: StoragePolicy) -> Self {
        RawSet {
            root: NodeRef::empty(policy),
            len: 0,
        }
    }

    /// Two-element set; `a != b`.
    pub fn pair<S: BuildHasher>(a: T, b: T, ctx: &Ctx<'_, S>) -> Self {
        let (ha, hb) = (hash32(ctx.hasher, &a), hash32(ctx.hasher, &b));
        RawSet {
            root: NodeRef::pair(Cell::Inline(a), ha, Cell::Inline(b), hb, 0, ctx.policy),
            len: 2,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn root(&self) -> &NodeRef<SetConfig<T>> {
        &self.root
    }

    #[inline]
    pub fn contains<S: BuildHasher>(&self, value: &T, hasher: &S) -> bool {
        self.root.find(value, hash32(hasher, value)).is_some()
    }

    pub fn insert<S: BuildHasher>(&self, value: T, ctx: &Ctx<'_, S>) -> Option<Self> {
        let hash = hash32(ctx.hasher, &value);
        let change = self.root.insert(Entry(value), hash, 0, ctx)?;
        Some(RawSet {
            root: change.node,
            len: (self.len as isize + change.delta.tuples) as usize,
        })
    }

    pub fn remove<S: BuildHasher>(&self, value: &T, ctx: &Ctx<'_, S>) -> Option<Self> {
        let hash = hash32(ctx.hasher, value);
        let change = self.root.delete(value, hash, 0, &KeyRemover, ctx)?;
        Some(RawSet {
            root: change.node,
            len: (self.len as isize + change.delta.tuples) as usize,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> + '_ {
        self.root.payloads().map(|c| match c {
            Cell::Inline(v) => v,
            _ => unreachable!("sets only hold inline payloads"),
        })
    }

    /// The element of a one-element set.
    fn only(&self) -> &T {
        debug_assert_eq!(self.len, 1);
        match self.root.single_payload() {
            Cell::Inline(v) => v,
            _ => unreachable!("sets only hold inline payloads"),
        }
    }
}

pub(crate) struct MultiConfig<K, V>(PhantomData<fn() -> (K, V)>);

impl<K, V> Config for MultiConfig<K, V>
where
    K: Eq + Hash + Clone,
    V: Eq + Hash + Clone,
{
    type Key = K;
    type Inline = (K, V);
    type Collection = (K, RawSet<V>);

    const INLINE_WIDTH: usize = 2;
    const COLLECTION_WIDTH: usize = 2;

    #[inline]
    fn inline_key(entry: &(K, V)) -> &K {
        &entry.0
    }

    #[inline]
    fn collection_key(entry: &(K, RawSet<V>)) -> &K {
        &entry.0
    }

    /// Promotes a singleton to a two-element nested set.
    fn merge_inline<S: BuildHasher>(
        existing: &(K, V),
        incoming: (K, V),
        ctx: &Ctx<'_, S>,
    ) -> Outcome<Self> {
        if existing.1 == incoming.1 {
            return Outcome::Unchanged;
        }
        let (key, value) = incoming;
        let set = RawSet::pair(existing.1.clone(), value, ctx);
        Outcome::Collection((key, set), Delta::new(1, 0))
    }

    fn merge_collection<S: BuildHasher>(
        existing: &(K, RawSet<V>),
        incoming: (K, V),
        ctx: &Ctx<'_, S>,
    ) -> Outcome<Self> {
        match existing.1.insert(incoming.1, ctx) {
            None => Outcome::Unchanged,
            Some(set) => Outcome::Collection((existing.0.clone(), set), Delta::new(1, 0)),
        }
    }

    fn collection_len(entry: &(K, RawSet<V>)) -> usize {
        entry.1.len()
    }

    fn check_collection<S: BuildHasher>(
        entry: &(K, RawSet<V>),
        ctx: &Ctx<'_, S>,
    ) -> Result<(), Violation> {
        let set = &entry.1;
        if set.len() < 2 {
            return Err(Violation::new(format!(
                "nested set with {} value(s) must be inlined",
                set.len()
            )));
        }
        let counts = set.root().check(ctx)?;
        if counts.keys != set.len() {
            return Err(Violation::new(format!(
                "nested set caches size {} but holds {}",
                set.len(),
                counts.keys
            )));
        }
        Ok(())
    }

    fn collection_footprint(entry: &(K, RawSet<V>), acc: &mut FootprintAcc) {
        acc.nested_set_handle();
        entry.1.root().footprint_into(acc);
    }
}

/// Removes one `(key, value)` tuple, demoting a set that shrinks to one
/// value back to an inline singleton.
pub(crate) struct ValueRemover<'a, V>(pub &'a V);

impl<K, V> Remover<MultiConfig<K, V>> for ValueRemover<'_, V>
where
    K: Eq + Hash + Clone,
    V: Eq + Hash + Clone,
{
    fn on_inline(&self, entry: &(K, V)) -> Outcome<MultiConfig<K, V>> {
        if entry.1 == *self.0 {
            Outcome::Remove(Delta::new(-1, -1))
        } else {
            Outcome::Unchanged
        }
    }

    fn on_collection<S: BuildHasher>(
        &self,
        entry: &(K, RawSet<V>),
        ctx: &Ctx<'_, S>,
    ) -> Outcome<MultiConfig<K, V>> {
        match entry.1.remove(self.0, ctx) {
            None => Outcome::Unchanged,
            Some(set) if set.len() == 1 => {
                Outcome::Inline((entry.0.clone(), set.only().clone()), Delta::new(-1, 0))
            }
            Some(set) => Outcome::Collection((entry.0.clone(), set), Delta::new(-1, 0)),
        }
    }
}

/// Removes a key with all its values.
pub(crate) struct WholeKeyRemover;

impl<K, V> Remover<MultiConfig<K, V>> for WholeKeyRemover
where
    K: Eq + Hash + Clone,
    V: Eq + Hash + Clone,
{
    fn on_inline(&self, _: &(K, V)) -> Outcome<MultiConfig<K, V>> {
        Outcome::Remove(Delta::new(-1, -1))
    }

    fn on_collection<S: BuildHasher>(
        &self,
        entry: &(K, RawSet<V>),
        _: &Ctx<'_, S>,
    ) -> Outcome<MultiConfig<K, V>> {
        Outcome::Remove(Delta::new(-(entry.1.len() as isize), -1))
    }
}
