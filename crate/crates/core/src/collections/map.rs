use std::fmt;
use std::hash::{BuildHasher, Hash};

use crate::hash::{hash32, DefaultHashBuilder};
use crate::storage::{FootprintAcc, FootprintModel, FootprintReport, StoragePolicy};
use crate::trie::{Cell, Ctx, Entry, KeyRemover, MapConfig, NodeRef, TrieStats, Violation};

/// Persistent hash map in the CHAMP layout: every entry is stored inline.
pub struct PersistentMap<K: Eq + Hash + Clone, V: Clone, S = DefaultHashBuilder> {
    root: NodeRef<MapConfig<K, V>>,
    len: usize,
    hasher: S,
    policy: StoragePolicy,
}

impl<K: Eq + Hash + Clone, V: Clone> PersistentMap<K, V> {
    pub fn new() -> Self {
        Self::with_hasher(DefaultHashBuilder::default())
    }

    pub fn with_policy(policy: StoragePolicy) -> Self {
        Self::with_hasher_and_policy(DefaultHashBuilder::default(), policy)
    }
}

impl<K: Eq + Hash + Clone, V: Clone> Default for PersistentMap<K, V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Eq + Hash + Clone, V: Clone, S: Clone> Clone for PersistentMap<K, V, S> {
    fn clone(&self) -> Self {
        PersistentMap {
            root: self.root.clone(),
            len: self.len,
            hasher: self.hasher.clone(),
            policy: self.policy,
        }
    }
}

impl<K: Eq + Hash + Clone, V: Clone, S: BuildHasher + Clone> PersistentMap<K, V, S> {
    pub fn with_hasher(hasher: S) -> Self {
        Self::with_hasher_and_policy(hasher, StoragePolicy::default())
    }

    pub fn with_hasher_and_policy(hasher: S, policy: StoragePolicy) -> Self {
        PersistentMap {
            root: NodeRef::empty(policy),
            len: 0,
            hasher,
            policy,
        }
    }

    fn ctx(&self) -> Ctx<'_, S> {
        Ctx::new(&self.hasher, self.policy)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn hasher(&self) -> &S {
        &self.hasher
    }

    pub fn policy(&self) -> StoragePolicy {
        self.policy
    }

    #[inline]
    pub fn get(&self, key: &K) -> Option<&V> {
        match self.root.find(key, hash32(&self.hasher, key))? {
            Cell::Inline((_, v)) => Some(v),
            _ => unreachable!("maps only hold inline payloads"),
        }
    }

    #[inline]
    pub fn contains_key(&self, key: &K) -> bool {
        self.get(key).is_some()
    }

    /// The map with `key` bound to `value`, replacing any previous binding.
    pub fn insert(&self, key: K, value: V) -> Self {
        let mut next = self.clone();
        next.insert_mut(key, value);
        next
    }

    /// The map without `key`.
    pub fn remove(&self, key: &K) -> Self {
        let mut next = self.clone();
        next.remove_mut(key);
        next
    }

    /// In-place insert; returns whether the key was new.
    pub fn insert_mut(&mut self, key: K, value: V) -> bool {
        let hash = hash32(&self.hasher, &key);
        let Some(change) = self.root.insert(Entry((key, value)), hash, 0, &self.ctx()) else {
            return false;
        };
        self.root = change.node;
        self.len = (self.len as isize + change.delta.keys) as usize;
        change.delta.keys > 0
    }

    /// In-place remove; returns whether the key was present.
    pub fn remove_mut(&mut self, key: &K) -> bool {
        let hash = hash32(&self.hasher, key);
        let Some(change) = self.root.delete(key, hash, 0, &KeyRemover, &self.ctx()) else {
            return false;
        };
        self.root = change.node;
        self.len = (self.len as isize + change.delta.keys) as usize;
        true
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &V)> + '_ {
        self.root.payloads().map(|c| match c {
            Cell::Inline((k, v)) => (k, v),
            _ => unreachable!("maps only hold inline payloads"),
        })
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> + '_ {
        self.iter().map(|(k, _)| k)
    }

    pub fn values(&self) -> impl Iterator<Item = &V> + '_ {
        self.iter().map(|(_, v)| v)
    }

    pub fn footprint(&self) -> FootprintReport {
        self.footprint_with(FootprintModel::default())
    }

    pub fn footprint_with(&self, model: FootprintModel) -> FootprintReport {
        let mut acc = FootprintAcc::new(model);
        self.footprint_into(&mut acc);
        acc.finish()
    }

    /// Adds the trie nodes of this map to `acc`. Values are opaque slots;
    /// whatever they reference is not followed.
    pub fn footprint_into(&self, acc: &mut FootprintAcc) {
        self.root.footprint_into(acc);
    }

    pub fn validate(&self) -> Result<(), Violation> {
        let counts = self.root.check(&self.ctx())?;
        if counts.keys != self.len {
            return Err(Violation::new(format!(
                "map caches size {} but holds {}",
                self.len, counts.keys
            )));
        }
        Ok(())
    }

    pub fn stats(&self) -> TrieStats {
        self.root.stats()
    }
}

impl<K: Eq + Hash + Clone, V: Clone + PartialEq, S> PartialEq for PersistentMap<K, V, S> {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.root.structurally_eq(&other.root)
    }
}

impl<K: Eq + Hash + Clone, V: Clone + Eq, S> Eq for PersistentMap<K, V, S> {}

impl<K, V, S> fmt::Debug for PersistentMap<K, V, S>
where
    K: Eq + Hash + Clone + fmt::Debug,
    V: Clone + fmt::Debug,
    S: BuildHasher + Clone,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.iter()).finish()
    }
}

impl<K, V, S> FromIterator<(K, V)> for PersistentMap<K, V, S>
where
    K: Eq + Hash + Clone,
    V: Clone,
    S: BuildHasher + Clone + Default,
{
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        let mut map = Self::with_hasher(S::default());
        map.extend(iter);
        map
    }
}

impl<K, V, S> Extend<(K, V)> for PersistentMap<K, V, S>
where
    K: Eq + Hash + Clone,
    V: Clone,
    S: BuildHasher + Clone,
{
    fn extend<I: IntoIterator<Item = (K, V)>>(&mut self, iter: I) {
        for (k, v) in iter {
            self.insert_mut(k, v);
        }
    }
}
