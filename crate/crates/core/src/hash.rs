//! 32-bit hashing for trie routing.

use std::collections::hash_map::DefaultHasher;
use std::hash::{BuildHasher, BuildHasherDefault, Hash, Hasher};

/// Deterministic default: SipHash with fixed zero keys, so trie shapes and
/// footprints are reproducible from run to run.
pub type DefaultHashBuilder = BuildHasherDefault<DefaultHasher>;

/// Folds the 64-bit output of `hasher` into the 32 bits the trie consumes.
#[inline]
pub fn hash32<T: Hash + ?Sized, S: BuildHasher>(hasher: &S, value: &T) -> u32 {
    let h = hasher.hash_one(value);
    (h ^ (h >> 32)) as u32
}

/// Hashes every value to the same code. Forces all entries into collision
/// nodes; meant for testing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConstantHashBuilder {
    pub code: u64,
}

impl ConstantHashBuilder {
    pub const fn new(code: u64) -> Self {
        ConstantHashBuilder { code }
    }
}

impl BuildHasher for ConstantHashBuilder {
    type Hasher = ConstantHasher;

    fn build_hasher(&self) -> ConstantHasher {
        ConstantHasher(self.code)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConstantHasher(u64);

impl Hasher for ConstantHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, _bytes: &[u8]) {}
}

/// Hashes integers to themselves, so `hash32(k) == k` for `u32` keys. Lets
/// tests place keys at chosen trie positions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IdentityHashBuilder;

impl BuildHasher for IdentityHashBuilder {
    type Hasher = IdentityHasher;

    fn build_hasher(&self) -> IdentityHasher {
        IdentityHasher(0)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IdentityHasher(u64);

impl Hasher for IdentityHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 << 8) | b as u64;
        }
    }

    fn write_u32(&mut self, i: u32) {
        self.0 = i as u64;
    }

    fn write_u64(&mut self, i: u64) {
        self.0 = i;
    }
}

/// Keeps only the low `bits` bits of an inner hash. Produces many partial
/// prefix collisions without making every key collide.
#[derive(Clone, Debug, Default)]
pub struct TruncatedHashBuilder<S = DefaultHashBuilder> {
    inner: S,
    bits: u32,
}

impl<S> TruncatedHashBuilder<S> {
    pub fn new(inner: S, bits: u32) -> Self {
        TruncatedHashBuilder { inner, bits }
    }
}

impl<S: BuildHasher> BuildHasher for TruncatedHashBuilder<S> {
    type Hasher = TruncatedHasher<S::Hasher>;

    fn build_hasher(&self) -> Self::Hasher {
        TruncatedHasher {
            inner: self.inner.build_hasher(),
            bits: self.bits,
        }
    }
}

pub struct TruncatedHasher<H> {
    inner: H,
    bits: u32,
}

impl<H: Hasher> Hasher for TruncatedHasher<H> {
    fn finish(&self) -> u64 {
        let h = self.inner.finish();
        let folded = (h ^ (h >> 32)) & 0xffff_ffff;
        if self.bits >= 32 {
            folded
        } else {
            folded & ((1u64 << self.bits) - 1)
        }
    }

    fn write(&mut self, bytes: &[u8]) {
        self.inner.write(bytes);
    }
}
