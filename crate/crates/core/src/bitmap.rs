//! Bit-level routing for heterogeneous trie nodes.
//!
//! A node's routing table is a single `u64` holding 32 consecutive 2-bit
//! patterns, one per trie branch. Branch `b` occupies bits `[2b, 2b + 1]`.
//! Ranking within one category is done by first reducing every matching
//! 2-bit group to a single set bit ([`PatternBitmap::filter`]) and then
//! counting with the hardware popcount.

use std::fmt;
use std::ops::Index;

/// Number of hash bits consumed per trie level.
pub const BITS_PER_LEVEL: u32 = 5;

/// Branching factor of a trie node.
pub const BRANCH_FACTOR: u32 = 1 << BITS_PER_LEVEL;

/// Largest shift that still addresses hash bits (level 6, top 2 bits only).
pub const MAX_SHIFT: u32 = 30;

/// Bits per branch in the routing table.
pub const PATTERN_BITS: u32 = 2;

const LOW_BITS: u64 = 0x5555_5555_5555_5555;

/// State of one trie branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Pattern {
    /// No data at this branch.
    Empty = 0b00,
    /// Reference to a sub-node.
    Node = 0b01,
    /// Inline payload (a key with a single value).
    Inline = 0b10,
    /// Payload with a nested collection.
    Collection = 0b11,
}

impl Pattern {
    /// All patterns in code order.
    pub const ALL: [Pattern; 4] = [
        Pattern::Empty,
        Pattern::Node,
        Pattern::Inline,
        Pattern::Collection,
    ];

    #[inline]
    pub const fn code(self) -> u8 {
        self as u8
    }

    /// Decodes the low two bits of `code`.
    #[inline]
    pub const fn from_code(code: u8) -> Pattern {
        match code & 0b11 {
            0b00 => Pattern::Empty,
            0b01 => Pattern::Node,
            0b10 => Pattern::Inline,
            _ => Pattern::Collection,
        }
    }

    /// True for the two payload categories.
    #[inline]
    pub const fn is_payload(self) -> bool {
        matches!(self, Pattern::Inline | Pattern::Collection)
    }
}

/// Extracts the branch index of `hash` at the level addressed by `shift`.
///
/// At `shift == 30` only the top two hash bits remain, so the result is in
/// `[0, 3]`.
#[inline]
pub const fn mask(hash: u32, shift: u32) -> u32 {
    debug_assert!(shift <= MAX_SHIFT);
    (hash >> shift) & 0b11111
}

/// 32 two-bit branch patterns packed into one word.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PatternBitmap(u64);

impl PatternBitmap {
    /// All branches empty.
    pub const EMPTY: PatternBitmap = PatternBitmap(0);

    #[inline]
    pub const fn from_word(word: u64) -> Self {
        PatternBitmap(word)
    }

    #[inline]
    pub const fn word(self) -> u64 {
        self.0
    }

    #[inline]
    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Pattern stored at `branch`.
    #[inline]
    pub const fn get(self, branch: u32) -> Pattern {
        debug_assert!(branch < BRANCH_FACTOR);
        Pattern::from_code(((self.0 >> (branch * PATTERN_BITS)) & 0b11) as u8)
    }

    /// Copy of `self` with `branch` set to `pattern`; all other groups kept.
    #[inline]
    #[must_use]
    pub const fn set(self, branch: u32, pattern: Pattern) -> Self {
        debug_assert!(branch < BRANCH_FACTOR);
        let shift = branch * PATTERN_BITS;
        let cleared = self.0 & !(0b11 << shift);
        PatternBitmap(cleared | ((pattern.code() as u64) << shift))
    }

    /// Reduces every group equal to `pattern` to a single bit at its even
    /// position. All odd bits of the result are zero.
    #[inline]
    pub const fn filter(self, pattern: Pattern) -> u64 {
        let masked0 = LOW_BITS & self.0;
        let masked1 = LOW_BITS & (self.0 >> 1);
        match pattern {
            Pattern::Empty => (masked0 ^ LOW_BITS) & (masked1 ^ LOW_BITS),
            Pattern::Node => masked0 & (masked1 ^ LOW_BITS),
            Pattern::Inline => masked1 & (masked0 ^ LOW_BITS),
            Pattern::Collection => masked0 & masked1,
        }
    }

    /// Number of branches holding `pattern`.
    #[inline]
    pub const fn count(self, pattern: Pattern) -> usize {
        self.filter(pattern).count_ones() as usize
    }

    /// Rank of `branch` within `pattern`'s category: the number of lower
    /// branches that hold `pattern`. Defined whether or not `branch` itself
    /// holds `pattern`.
    #[inline]
    pub const fn index(self, pattern: Pattern, branch: u32) -> usize {
        debug_assert!(branch < BRANCH_FACTOR);
        let bitpos = 1u64 << (branch * PATTERN_BITS);
        (self.filter(pattern) & (bitpos - 1)).count_ones() as usize
    }

    /// Per-pattern branch counts, computed in one pass over the 32 groups.
    pub fn histogram(self) -> Histogram {
        let mut counts = [0u32; 4];
        let mut word = self.0;
        for _ in 0..BRANCH_FACTOR {
            counts[(word & 0b11) as usize] += 1;
            word >>= PATTERN_BITS;
        }
        Histogram(counts)
    }

    /// Branch and pattern of the only non-empty group.
    ///
    /// The caller guarantees exactly one non-empty branch; otherwise the
    /// result is the lowest non-empty branch (or branch 31 / `Empty` for an
    /// all-empty bitmap).
    #[inline]
    pub const fn recover_single(self) -> (u32, Pattern) {
        let shift = self.0.trailing_zeros() / PATTERN_BITS * PATTERN_BITS;
        let shift = if shift >= 64 { 62 } else { shift };
        (
            shift / PATTERN_BITS,
            Pattern::from_code(((self.0 >> shift) & 0b11) as u8),
        )
    }

    /// Non-empty branches in ascending order with their patterns.
    pub fn occupied(self) -> impl Iterator<Item = (u32, Pattern)> {
        let mut rest = !self.filter(Pattern::Empty) & LOW_BITS;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let shift = rest.trailing_zeros();
            rest &= rest - 1;
            Some((
                shift / PATTERN_BITS,
                Pattern::from_code(((self.0 >> shift) & 0b11) as u8),
            ))
        })
    }
}

impl fmt::Debug for PatternBitmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PatternBitmap({:#066b})", self.0)
    }
}

impl From<u64> for PatternBitmap {
    fn from(word: u64) -> Self {
        PatternBitmap(word)
    }
}

/// Branch counts per pattern. Always sums to 32.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Histogram([u32; 4]);

impl Histogram {
    pub const fn counts(&self) -> [u32; 4] {
        self.0
    }

    /// Number of payload branches, regardless of category.
    pub const fn payload_arity(&self) -> u32 {
        BRANCH_FACTOR - self.0[Pattern::Empty as usize] - self.0[Pattern::Node as usize]
    }
}

impl Index<Pattern> for Histogram {
    type Output = u32;

    fn index(&self, pattern: Pattern) -> &u32 {
        &self.0[pattern as usize]
    }
}

/// Three disjoint logical bitmaps recovered from two physical ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LogicalViews {
    pub data_map: u32,
    pub node_map: u32,
    pub xxxx_map: u32,
}

/// Retrofits three category bitmaps onto two raw 32-bit bitmaps: a bit set
/// in both raw maps marks the third category.
#[inline]
pub const fn derive_logical_views(raw1: u32, raw2: u32) -> LogicalViews {
    let xxxx_map = raw1 & raw2;
    LogicalViews {
        data_map: raw2 ^ xxxx_map,
        node_map: raw1 ^ xxxx_map,
        xxxx_map,
    }
}
