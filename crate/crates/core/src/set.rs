//! Dense-id sets backed by compressed bitmaps.
//!
//! [`ResourceSet`] and [`TagSet`] share one representation, a roaring bitmap
//! over `u32` ids, and differ only in the id type they accept. Both expose a
//! canonical byte form used as a cache key.

use std::fmt;
use std::marker::PhantomData;

use roaring::RoaringBitmap;

/// A dense, non-negative integer identifier.
pub trait DenseId: Copy + Eq + Ord + fmt::Debug {
    fn from_index(index: u32) -> Self;
    fn index(self) -> u32;
}

/// Identifier of a tag within a [`Collection`](crate::Collection).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TagId(pub u32);

/// Identifier of a resource within a [`Collection`](crate::Collection).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResourceId(pub u32);

impl DenseId for TagId {
    fn from_index(index: u32) -> Self {
        TagId(index)
    }
    fn index(self) -> u32 {
        self.0
    }
}

impl DenseId for ResourceId {
    fn from_index(index: u32) -> Self {
        ResourceId(index)
    }
    fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Display for TagId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// A set of dense ids.
pub struct IdSet<I> {
    bits: RoaringBitmap,
    _id: PhantomData<I>,
}

pub type ResourceSet = IdSet<ResourceId>;
pub type TagSet = IdSet<TagId>;

impl<I: DenseId> IdSet<I> {
    pub fn new() -> Self {
        Self::from_bitmap(RoaringBitmap::new())
    }

    fn from_bitmap(bits: RoaringBitmap) -> Self {
        IdSet {
            bits,
            _id: PhantomData,
        }
    }

    /// The set `{0, 1, .., n - 1}`.
    pub fn full(n: u32) -> Self {
        let mut bits = RoaringBitmap::new();
        bits.insert_range(0..n);
        Self::from_bitmap(bits)
    }

    /// Builds a set from ids already in strictly ascending order.
    ///
    /// Panics if the ids are not sorted.
    pub fn from_sorted(ids: impl IntoIterator<Item = I>) -> Self {
        let bits = RoaringBitmap::from_sorted_iter(ids.into_iter().map(DenseId::index))
            .expect("ids must be strictly ascending");
        Self::from_bitmap(bits)
    }

    pub fn insert(&mut self, id: I) -> bool {
        self.bits.insert(id.index())
    }

    pub fn remove(&mut self, id: I) -> bool {
        self.bits.remove(id.index())
    }

    pub fn contains(&self, id: I) -> bool {
        self.bits.contains(id.index())
    }

    pub fn len(&self) -> u64 {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Ids in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = I> + '_ {
        self.bits.iter().map(I::from_index)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self::from_bitmap(&self.bits & &other.bits)
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_bitmap(&self.bits | &other.bits)
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self::from_bitmap(&self.bits - &other.bits)
    }

    pub fn intersect_with(&mut self, other: &Self) {
        self.bits &= &other.bits;
    }

    /// `|self ∩ other|` without materializing the intersection.
    pub fn intersection_len(&self, other: &Self) -> u64 {
        self.bits.intersection_len(&other.bits)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.bits.is_subset(&other.bits)
    }

    /// Canonical byte form: the ids in ascending order, each as a 4-byte
    /// little-endian integer. The empty set encodes to the empty string.
    ///
    /// The encoding is decodable, hence injective: two sets share a canonical
    /// form exactly when they are equal.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.bits.len() as usize * 4);
        for id in &self.bits {
            out.extend_from_slice(&id.to_le_bytes());
        }
        out
    }

    /// Inverse of [`canonical_bytes`](Self::canonical_bytes).
    pub fn from_canonical_bytes(bytes: &[u8]) -> Option<Self> {
        if !bytes.len().is_multiple_of(4) {
            return None;
        }
        let ids = bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]));
        RoaringBitmap::from_sorted_iter(ids)
            .ok()
            .map(Self::from_bitmap)
    }

    pub fn key(&self) -> CanonicalKey {
        CanonicalKey(self.canonical_bytes().into_boxed_slice())
    }

    /// Hash of the set's size and of up to [`SKETCH_SAMPLES`] members at
    /// evenly spaced ranks. Equal sets always share a sketch; unequal sets
    /// may too, so it is only ever a hash, never an identity.
    pub fn sketch_hash(&self) -> u64 {
        let len = self.bits.len();
        let mut h = mix(len);
        if len == 0 {
            return h;
        }
        let samples = len.min(SKETCH_SAMPLES);
        for i in 0..samples {
            // ranks 0 and len-1 are always included
            let rank = if samples == 1 { 0 } else { i * (len - 1) / (samples - 1) };
            let id = self.bits.select(rank as u32).expect("rank below len");
            h = mix(h ^ u64::from(id));
        }
        h
    }
}

/// Number of members sampled by [`IdSet::sketch_hash`].
pub const SKETCH_SAMPLES: u64 = 8;

// splitmix64 finalizer
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl<I: DenseId> Default for IdSet<I> {
    fn default() -> Self {
        Self::new()
    }
}

impl<I> Clone for IdSet<I> {
    fn clone(&self) -> Self {
        IdSet {
            bits: self.bits.clone(),
            _id: PhantomData,
        }
    }
}

impl<I> PartialEq for IdSet<I> {
    fn eq(&self, other: &Self) -> bool {
        self.bits == other.bits
    }
}

impl<I> Eq for IdSet<I> {}

impl<I: DenseId> fmt::Debug for IdSet<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl<I: DenseId> FromIterator<I> for IdSet<I> {
    fn from_iter<T: IntoIterator<Item = I>>(iter: T) -> Self {
        Self::from_bitmap(iter.into_iter().map(DenseId::index).collect())
    }
}

impl<I: DenseId> Extend<I> for IdSet<I> {
    fn extend<T: IntoIterator<Item = I>>(&mut self, iter: T) {
        self.bits.extend(iter.into_iter().map(DenseId::index))
    }
}

/// Owned canonical form of a set, used as a hash-map key.
///
/// Equality is full byte equality, so a lookup can never return the entry of
/// a different set even when hashes collide.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Box<[u8]>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({} bytes)", self.0.len())
    }
}
