//! Heterogeneous hash-array mapped tries.
//!
//! Trie nodes tag each of their 32 branches with a two-bit pattern (empty,
//! sub-node, inline payload, collection payload). On top of that encoding the
//! crate provides persistent sets, CHAMP-style maps and a multi-map that
//! stores single values inline and larger value sets as nested tries.
//!
//! The [`bench`] and [`dominators`] modules hold the measurement harness and
//! the dominator-tree case study used by the `hhamt` command-line tool.

pub mod bench;
pub mod bitmap;
mod collections;
pub mod dominators;
pub mod hash;
pub mod selftest;
pub mod storage;
mod trie;

pub use collections::{PersistentMap, PersistentMultiMap, PersistentSet, ValueSet};
pub use hash::DefaultHashBuilder;
pub use storage::{FootprintAcc, FootprintModel, FootprintReport, StorageClass, StoragePolicy};
pub use trie::{TrieStats, Violation};
