use std::fmt;
use std::hash::{BuildHasher, Hash};

use crate::hash::DefaultHashBuilder;
use crate::storage::{FootprintAcc, FootprintModel, FootprintReport, StoragePolicy};
use crate::trie::{Ctx, RawSet, TrieStats, Violation};

/// Persistent hash set.
///
/// Updates return a new set and leave the receiver untouched; unchanged
/// parts of the trie are shared between versions.
pub struct PersistentSet<T: Eq + Hash + Clone, S = DefaultHashBuilder> {
    raw: RawSet<T>,
    hasher: S,
    policy: StoragePolicy,
}

impl<T: Eq + Hash + Clone> PersistentSet<T> {
    pub fn new() -> Self {
        Self::with_hasher(DefaultHashBuilder::default())
    }

    pub fn with_policy(policy: StoragePolicy) -> Self {
        Self::with_hasher_and_policy(DefaultHashBuilder::default(), policy)
    }
}

impl<T: Eq + Hash + Clone> Default for PersistentSet<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Eq + Hash + Clone, S: Clone> Clone for PersistentSet<T, S> {
    fn clone(&self) -> Self {
        PersistentSet {
            raw: self.raw.clone(),
            hasher: self.hasher.clone(),
            policy: self.policy,
        }
    }
}

impl<T: Eq + Hash + Clone, S: BuildHasher + Clone> PersistentSet<T, S> {
    pub fn with_hasher(hasher: S) -> Self {
        Self::with_hasher_and_policy(hasher, StoragePolicy::default())
    }

    pub fn with_hasher_and_policy(hasher: S, policy: StoragePolicy) -> Self {
        PersistentSet {
            raw: RawSet::empty(policy),
            hasher,
            policy,
        }
    }

    pub(crate) fn from_raw(raw: RawSet<T>, hasher: S, policy: StoragePolicy) -> Self {
        PersistentSet {
            raw,
            hasher,
            policy,
        }
    }

    pub(crate) fn raw(&self) -> &RawSet<T> {
        &self.raw
    }

    fn ctx(&self) -> Ctx<'_, S> {
        Ctx::new(&self.hasher, self.policy)
    }

    fn derive(&self, raw: RawSet<T>) -> Self {
        Self::from_raw(raw, self.hasher.clone(), self.policy)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.raw.len() == 0
    }

    pub fn hasher(&self) -> &S {
        &self.hasher
    }

    pub fn policy(&self) -> StoragePolicy {
        self.policy
    }

    #[inline]
    pub fn contains(&self, value: &T) -> bool {
        self.raw.contains(value, &self.hasher)
    }

    /// The set with `value` added.
    pub fn insert(&self, value: T) -> Self {
        match self.raw.insert(value, &self.ctx()) {
            Some(raw) => self.derive(raw),
            None => self.clone(),
        }
    }

    /// The set without `value`.
    pub fn remove(&self, value: &T) -> Self {
        match self.raw.remove(value, &self.ctx()) {
            Some(raw) => self.derive(raw),
            None => self.clone(),
        }
    }

    /// In-place variant of [`Self::insert`]; returns whether the set grew.
    pub fn insert_mut(&mut self, value: T) -> bool {
        match self.raw.insert(value, &self.ctx()) {
            Some(raw) => {
                self.raw = raw;
                true
            }
            None => false,
        }
    }

    /// In-place variant of [`Self::remove`]; returns whether the set shrank.
    pub fn remove_mut(&mut self, value: &T) -> bool {
        match self.raw.remove(value, &self.ctx()) {
            Some(raw) => {
                self.raw = raw;
                true
            }
            None => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> + '_ {
        self.raw.iter()
    }

    /// Elements present in both sets.
    ///
    /// When the result equals one of the operands, that operand is returned
    /// and keeps sharing its nodes.
    pub fn intersection(&self, other: &Self) -> Self {
        if self.raw.root().ptr_eq_root(other.raw.root()) {
            return self.clone();
        }
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = small.clone();
        for v in small.iter() {
            if !large.contains(v) {
                out.remove_mut(v);
            }
        }
        out
    }

    /// True when both sets share the same root allocation.
    pub fn ptr_eq(&self, other: &Self) -> bool {
        self.raw.root().ptr_eq_root(other.raw.root())
    }

    pub fn footprint(&self) -> FootprintReport {
        self.footprint_with(FootprintModel::default())
    }

    pub fn footprint_with(&self, model: FootprintModel) -> FootprintReport {
        let mut acc = FootprintAcc::new(model);
        self.footprint_into(&mut acc);
        acc.finish()
    }

    /// Adds the trie nodes of this set to `acc`. The set handle itself is
    /// not counted.
    pub fn footprint_into(&self, acc: &mut FootprintAcc) {
        self.raw.root().footprint_into(acc);
    }

    /// Checks all structural invariants.
    pub fn validate(&self) -> Result<(), Violation> {
        let counts = self.raw.root().check(&self.ctx())?;
        if counts.keys != self.len() || counts.tuples != self.len() {
            return Err(Violation::new(format!(
                "set caches size {} but holds {}",
                self.len(),
                counts.keys
            )));
        }
        Ok(())
    }

    pub fn stats(&self) -> TrieStats {
        self.raw.root().stats()
    }
}

impl<T: Eq + Hash + Clone, S> PartialEq for PersistentSet<T, S> {
    /// Canonical tries make structural equality decide set equality.
    fn eq(&self, other: &Self) -> bool {
        self.raw == other.raw
    }
}

impl<T: Eq + Hash + Clone, S> Eq for PersistentSet<T, S> {}

impl<T: Eq + Hash + Clone + fmt::Debug, S> fmt::Debug for PersistentSet<T, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.raw.fmt(f)
    }
}

impl<T: Eq + Hash + Clone, S: BuildHasher + Clone + Default> FromIterator<T>
    for PersistentSet<T, S>
{
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut set = Self::with_hasher(S::default());
        set.extend(iter);
        set
    }
}

impl<T: Eq + Hash + Clone, S: BuildHasher + Clone> Extend<T> for PersistentSet<T, S> {
    fn extend<I: IntoIterator<Item = T>>(&mut self, iter: I) {
        for v in iter {
            self.insert_mut(v);
        }
    }
}
