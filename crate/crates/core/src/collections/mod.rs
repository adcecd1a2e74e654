//! Public persistent collections built on the shared trie algorithms.

mod map;
mod multimap;
mod set;

pub use map::PersistentMap;
pub use multimap::{PersistentMultiMap, ValueSet};
pub use set::PersistentSet;
