use std::fmt;
use std::hash::{BuildHasher, Hash};

use super::PersistentSet;
use crate::hash::{hash32, DefaultHashBuilder};
use crate::storage::{FootprintAcc, FootprintModel, FootprintReport, StoragePolicy};
use crate::trie::{
    Cell, Ctx, Entry, MultiConfig, NodeRef, RawSet, Replace, TrieStats, ValueRemover, Violation,
    WholeKeyRemover,
};

/// Persistent hash multi-map.
///
/// A key bound to a single value stores that value inline next to the key.
/// A key bound to several values stores a nested persistent set. The switch
/// between the two encodings is automatic in both directions.
pub struct PersistentMultiMap<K, V, S = DefaultHashBuilder>
where
    K: Eq + Hash + Clone,
    V: Eq + Hash + Clone,
{
    root: NodeRef<MultiConfig<K, V>>,
    tuples: usize,
    keys: usize,
    hasher: S,
    policy: StoragePolicy,
}

/// The values bound to one key of a [`PersistentMultiMap`].
pub struct ValueSet<'a, V: Eq + Hash + Clone, S> {
    inner: Values<'a, V>,
    hasher: &'a S,
    policy: StoragePolicy,
}

enum Values<'a, V: Eq + Hash + Clone> {
    Empty,
    One(&'a V),
    Many(&'a RawSet<V>),
}

impl<'a, V: Eq + Hash + Clone, S: BuildHasher> ValueSet<'a, V, S> {
    pub fn len(&self) -> usize {
        match &self.inner {
            Values::Empty => 0,
            Values::One(_) => 1,
            Values::Many(set) => set.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.inner, Values::Empty)
    }

    pub fn contains(&self, value: &V) -> bool {
        match &self.inner {
            Values::Empty => false,
            Values::One(v) => *v == value,
            Values::Many(set) => set.contains(value, self.hasher),
        }
    }

    pub fn iter(&self) -> Box<dyn Iterator<Item = &'a V> + 'a> {
        match self.inner {
            Values::Empty => Box::new(std::iter::empty()),
            Values::One(v) => Box::new(std::iter::once(v)),
            Values::Many(set) => Box::new(set.iter()),
        }
    }

    /// The values as a standalone set. A nested set is shared, not copied.
    pub fn to_set(&self) -> PersistentSet<V, S>
    where
        S: Clone,
    {
        let hasher = self.hasher.clone();
        match self.inner {
            Values::Empty => PersistentSet::with_hasher_and_policy(hasher, self.policy),
            Values::One(v) => {
                PersistentSet::with_hasher_and_policy(hasher, self.policy).insert(v.clone())
            }
            Values::Many(set) => PersistentSet::from_raw(set.clone(), hasher, self.policy),
        }
    }
}

impl<V: Eq + Hash + Clone + fmt::Debug, S: BuildHasher> fmt::Debug for ValueSet<'_, V, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl<K, V> PersistentMultiMap<K, V>
where
    K: Eq + Hash + Clone,
    V: Eq + Hash + Clone,
{
    pub fn new() -> Self {
        Self::with_hasher(DefaultHashBuilder::default())
    }

    pub fn with_policy(policy: StoragePolicy) -> Self {
        Self::with_hasher_and_policy(DefaultHashBuilder::default(), policy)
    }
}

impl<K, V> Default for PersistentMultiMap<K, V>
where
    K: Eq + Hash + Clone,
    V: Eq + Hash + Clone,
{
    fn default() -> Self {
        Self::new()
    }
}

impl<K, V, S: Clone> Clone for PersistentMultiMap<K, V, S>
where
    K: Eq + Hash + Clone,
    V: Eq + Hash + Clone,
{
    fn clone(&self) -> Self {
        PersistentMultiMap {
            root: self.root.clone(),
            tuples: self.tuples,
            keys: self.keys,
            hasher: self.hasher.clone(),
            policy: self.policy,
        }
    }
}

impl<K, V, S> PersistentMultiMap<K, V, S>
where
    K: Eq + Hash + Clone,
    V: Eq + Hash + Clone,
    S: BuildHasher + Clone,
{
    pub fn with_hasher(hasher: S) -> Self {
        Self::with_hasher_and_policy(hasher, StoragePolicy::default())
    }

    pub fn with_hasher_and_policy(hasher: S, policy: StoragePolicy) -> Self {
        PersistentMultiMap {
            root: NodeRef::empty(policy),
            tuples: 0,
            keys: 0,
            hasher,
            policy,
        }
    }

    fn ctx(&self) -> Ctx<'_, S> {
        Ctx::new(&self.hasher, self.policy)
    }

    fn commit(&mut self, change: Option<crate::trie::Change<MultiConfig<K, V>>>) -> bool {
        let Some(change) = change else {
            return false;
        };
        self.root = change.node;
        self.tuples = (self.tuples as isize + change.delta.tuples) as usize;
        self.keys = (self.keys as isize + change.delta.keys) as usize;
        true
    }

    /// Number of `(key, value)` tuples.
    #[inline]
    pub fn len(&self) -> usize {
        self.tuples
    }

    #[inline]
    pub fn tuple_count(&self) -> usize {
        self.tuples
    }

    #[inline]
    pub fn key_count(&self) -> usize {
        self.keys
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.tuples == 0
    }

    pub fn hasher(&self) -> &S {
        &self.hasher
    }

    pub fn policy(&self) -> StoragePolicy {
        self.policy
    }

    fn view<'a>(&'a self, cell: Option<&'a Cell<MultiConfig<K, V>>>) -> ValueSet<'a, V, S> {
        let inner = match cell {
            None => Values::Empty,
            Some(Cell::Inline((_, v))) => Values::One(v),
            Some(Cell::Collection((_, set))) => Values::Many(set),
            Some(Cell::Node(_)) => unreachable!("lookups return payloads"),
        };
        ValueSet {
            inner,
            hasher: &self.hasher,
            policy: self.policy,
        }
    }

    /// Values bound to `key`; empty when the key is absent.
    #[inline]
    pub fn get(&self, key: &K) -> ValueSet<'_, V, S> {
        self.view(self.root.find(key, hash32(&self.hasher, key)))
    }

    #[inline]
    pub fn contains_key(&self, key: &K) -> bool {
        self.root.find(key, hash32(&self.hasher, key)).is_some()
    }

    #[inline]
    pub fn contains_entry(&self, key: &K, value: &V) -> bool {
        match self.root.find(key, hash32(&self.hasher, key)) {
            None => false,
            Some(Cell::Inline((_, v))) => v == value,
            Some(Cell::Collection((_, set))) => set.contains(value, &self.hasher),
            Some(Cell::Node(_)) => unreachable!("lookups return payloads"),
        }
    }

    /// The multi-map with the tuple `(key, value)` added.
    pub fn insert(&self, key: K, value: V) -> Self {
        let mut next = self.clone();
        next.insert_mut(key, value);
        next
    }

    /// The multi-map without the tuple `(key, value)`.
    pub fn remove(&self, key: &K, value: &V) -> Self {
        let mut next = self.clone();
        next.remove_mut(key, value);
        next
    }

    /// The multi-map without `key` and any of its values.
    pub fn remove_key(&self, key: &K) -> Self {
        let mut next = self.clone();
        next.remove_key_mut(key);
        next
    }

    /// The multi-map with `key` bound to exactly `values`. A set of two or
    /// more values is stored by reference, sharing its nodes, so its hasher
    /// must hash like this map's (always true for stateless builders such as
    /// [`crate::DefaultHashBuilder`]). A set with a different storage policy
    /// is copied instead.
    pub fn with_values(&self, key: K, values: &PersistentSet<V, S>) -> Self {
        let mut next = self.clone();
        next.set_values_mut(key, values);
        next
    }

    /// In-place insert; returns whether the tuple was new.
    pub fn insert_mut(&mut self, key: K, value: V) -> bool {
        let hash = hash32(&self.hasher, &key);
        let change = self.root.insert(Entry((key, value)), hash, 0, &self.ctx());
        self.commit(change)
    }

    /// In-place tuple removal; returns whether the tuple was present.
    pub fn remove_mut(&mut self, key: &K, value: &V) -> bool {
        let hash = hash32(&self.hasher, key);
        let change = self
            .root
            .delete(key, hash, 0, &ValueRemover(value), &self.ctx());
        self.commit(change)
    }

    /// In-place key removal; returns whether the key was present.
    pub fn remove_key_mut(&mut self, key: &K) -> bool {
        let hash = hash32(&self.hasher, key);
        let change = self
            .root
            .delete(key, hash, 0, &WholeKeyRemover, &self.ctx());
        self.commit(change)
    }

    /// In-place variant of [`Self::with_values`].
    pub fn set_values_mut(&mut self, key: K, values: &PersistentSet<V, S>) {
        let cell = match values.len() {
            0 => {
                self.remove_key_mut(&key);
                return;
            }
            1 => {
                let v = values.iter().next().expect("one value").clone();
                Cell::Inline((key, v))
            }
            _ => {
                debug_assert!(
                    values
                        .iter()
                        .all(|v| hash32(&self.hasher, v) == hash32(values.hasher(), v)),
                    "value set hashed with a different hasher"
                );
                if values.policy() == self.policy {
                    Cell::Collection((key, values.raw().clone()))
                } else {
                    // Nodes of a nested set follow the map's layout policy.
                    let ctx = self.ctx();
                    let mut raw = RawSet::empty(self.policy);
                    for v in values.iter() {
                        raw = raw.insert(v.clone(), &ctx).unwrap_or(raw);
                    }
                    Cell::Collection((key, raw))
                }
            }
        };
        let hash = hash32(&self.hasher, cell.key().expect("payload"));
        let change = self.root.insert(Replace(cell), hash, 0, &self.ctx());
        self.commit(change);
    }

    /// Distinct keys with their values.
    pub fn iter(&self) -> impl Iterator<Item = (&K, ValueSet<'_, V, S>)> + '_ {
        self.root.payloads().map(move |c| {
            let key = c.key().expect("payload");
            (key, self.view(Some(c)))
        })
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> + '_ {
        self.root.payloads().map(|c| c.key().expect("payload"))
    }

    /// Every `(key, value)` tuple.
    pub fn entries(&self) -> impl Iterator<Item = (&K, &V)> + '_ {
        self.root
            .payloads()
            .flat_map(|c| -> Box<dyn Iterator<Item = (&K, &V)>> {
                match c {
                    Cell::Inline((k, v)) => Box::new(std::iter::once((k, v))),
                    Cell::Collection((k, set)) => Box::new(set.iter().map(move |v| (k, v))),
                    Cell::Node(_) => unreachable!("payload stream"),
                }
            })
    }

    pub fn footprint(&self) -> FootprintReport {
        self.footprint_with(FootprintModel::default())
    }

    pub fn footprint_with(&self, model: FootprintModel) -> FootprintReport {
        let mut acc = FootprintAcc::new(model);
        self.footprint_into(&mut acc);
        acc.finish()
    }

    /// Adds the trie nodes, nested set handles and nested set nodes to `acc`.
    pub fn footprint_into(&self, acc: &mut FootprintAcc) {
        self.root.footprint_into(acc);
    }

    pub fn validate(&self) -> Result<(), Violation> {
        let counts = self.root.check(&self.ctx())?;
        if counts.keys != self.keys || counts.tuples != self.tuples {
            return Err(Violation::new(format!(
                "multi-map caches {} tuples / {} keys but holds {} / {}",
                self.tuples, self.keys, counts.tuples, counts.keys
            )));
        }
        Ok(())
    }

    pub fn stats(&self) -> TrieStats {
        self.root.stats()
    }
}

impl<K, V, S> PartialEq for PersistentMultiMap<K, V, S>
where
    K: Eq + Hash + Clone,
    V: Eq + Hash + Clone,
{
    fn eq(&self, other: &Self) -> bool {
        self.tuples == other.tuples
            && self.keys == other.keys
            && self.root.structurally_eq(&other.root)
    }
}

impl<K, V, S> Eq for PersistentMultiMap<K, V, S>
where
    K: Eq + Hash + Clone,
    V: Eq + Hash + Clone,
{
}

impl<K, V, S> fmt::Debug for PersistentMultiMap<K, V, S>
where
    K: Eq + Hash + Clone + fmt::Debug,
    V: Eq + Hash + Clone + fmt::Debug,
    S: BuildHasher + Clone,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.iter()).finish()
    }
}

impl<K, V, S> FromIterator<(K, V)> for PersistentMultiMap<K, V, S>
where
    K: Eq + Hash + Clone,
    V: Eq + Hash + Clone,
    S: BuildHasher + Clone + Default,
{
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        let mut map = Self::with_hasher(S::default());
        map.extend(iter);
        map
    }
}

impl<K, V, S> Extend<(K, V)> for PersistentMultiMap<K, V, S>
where
    K: Eq + Hash + Clone,
    V: Eq + Hash + Clone,
    S: BuildHasher + Clone,
{
    fn extend<I: IntoIterator<Item = (K, V)>>(&mut self, iter: I) {
        for (k, v) in iter {
            self.insert_mut(k, v);
        }
    }
}
