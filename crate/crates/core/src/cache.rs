//! Query-indexed and resource-indexed browsing caches.
//!
//! Both caches are in-memory hash maps keyed by a set. A key hashes a fixed
//! sample of its set ([`IdSet::sketch_hash`]) and compares equal only on full
//! set equality, so a hash collision can never return another set's entry.
//! Caches are unbounded unless a maximum entry count is configured, in which
//! case the least recently used entry is evicted.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::set::{DenseId, IdSet, ResourceId, ResourceSet, TagId, TagSet};

/// Counters shared by both caches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub lookups: u64,
    pub hits: u64,
    pub stores: u64,
    pub entries: u64,
}

impl CacheStats {
    pub fn misses(&self) -> u64 {
        self.lookups - self.hits
    }

    pub fn hit_rate(&self) -> f64 {
        if self.lookups == 0 {
            0.0
        } else {
            self.hits as f64 / self.lookups as f64
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheConfig {
    /// Upper bound on stored entries; `None` keeps every entry.
    pub max_entries: Option<usize>,
}

impl CacheConfig {
    pub const UNBOUNDED: CacheConfig = CacheConfig { max_entries: None };

    pub fn bounded(max_entries: usize) -> Self {
        CacheConfig {
            max_entries: Some(max_entries.max(1)),
        }
    }
}

/// A set used as a map key, with its hash computed once.
pub struct SetKey<I> {
    hash: u64,
    set: Arc<IdSet<I>>,
}

impl<I: DenseId> SetKey<I> {
    pub fn new(set: Arc<IdSet<I>>) -> Self {
        SetKey {
            hash: set.sketch_hash(),
            set,
        }
    }

    pub fn set(&self) -> &Arc<IdSet<I>> {
        &self.set
    }
}

impl<I> Clone for SetKey<I> {
    fn clone(&self) -> Self {
        SetKey {
            hash: self.hash,
            set: self.set.clone(),
        }
    }
}

impl<I> PartialEq for SetKey<I> {
    fn eq(&self, other: &Self) -> bool {
        self.hash == other.hash && self.set == other.set
    }
}

impl<I> Eq for SetKey<I> {}

impl<I> Hash for SetKey<I> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}

/// Passes a precomputed `u64` through unchanged.
#[derive(Default)]
struct PrehashedHasher(u64);

impl Hasher for PrehashedHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = self.0.rotate_left(8) ^ u64::from(b);
        }
    }

    fn write_u64(&mut self, n: u64) {
        self.0 = n;
    }
}

type Prehashed = BuildHasherDefault<PrehashedHasher>;

struct Slot<V> {
    value: V,
    last_used: u64,
}

/// Exact-key memo table with optional LRU eviction.
struct MemoMap<K, V> {
    map: HashMap<K, Slot<V>, Prehashed>,
    config: CacheConfig,
    clock: u64,
    stats: CacheStats,
}

impl<K: Hash + Eq + Clone, V: Clone> MemoMap<K, V> {
    fn new(config: CacheConfig) -> Self {
        MemoMap {
            map: HashMap::default(),
            config,
            clock: 0,
            stats: CacheStats::default(),
        }
    }

    fn get(&mut self, key: &K) -> Option<V> {
        self.stats.lookups += 1;
        self.clock += 1;
        let slot = self.map.get_mut(key)?;
        slot.last_used = self.clock;
        self.stats.hits += 1;
        Some(slot.value.clone())
    }

    fn put(&mut self, key: K, value: V) {
        self.stats.stores += 1;
        self.clock += 1;
        let slot = Slot {
            value,
            last_used: self.clock,
        };
        if self.map.insert(key, slot).is_none() {
            if let Some(max) = self.config.max_entries {
                if self.map.len() > max {
                    self.evict_oldest();
                }
            }
        }
    }

    // Linear scan; bounded caches are an opt-in diagnostic mode.
    fn evict_oldest(&mut self) {
        let oldest = self
            .map
            .iter()
            .min_by_key(|(_, s)| s.last_used)
            .map(|(k, _)| k.clone());
        if let Some(k) = oldest {
            self.map.remove(&k);
        }
    }

    fn stats(&self) -> CacheStats {
        CacheStats {
            entries: self.map.len() as u64,
            ..self.stats
        }
    }

    fn clear(&mut self) {
        self.map.clear();
        self.clock = 0;
        self.stats = CacheStats::default();
    }
}

/// Maps a set of active tags to its filtered resources and selectable tags.
pub struct QueryCache {
    inner: MemoMap<SetKey<TagId>, (Arc<ResourceSet>, Arc<TagSet>)>,
}

impl QueryCache {
    pub fn new() -> Self {
        Self::with_config(CacheConfig::UNBOUNDED)
    }

    pub fn with_config(config: CacheConfig) -> Self {
        QueryCache {
            inner: MemoMap::new(config),
        }
    }

    pub fn cache_by_query(&mut self, active: &TagSet, filtered: Arc<ResourceSet>, selectable: Arc<TagSet>) {
        self.store_key(SetKey::new(Arc::new(active.clone())), filtered, selectable);
    }

    /// `None` when `active` has not been stored.
    pub fn retrieve_by_query(&mut self, active: &TagSet) -> Option<(Arc<ResourceSet>, Arc<TagSet>)> {
        self.retrieve_key(&SetKey::new(Arc::new(active.clone())))
    }

    pub(crate) fn store_key(&mut self, key: SetKey<TagId>, filtered: Arc<ResourceSet>, selectable: Arc<TagSet>) {
        self.inner.put(key, (filtered, selectable));
    }

    pub(crate) fn retrieve_key(&mut self, key: &SetKey<TagId>) -> Option<(Arc<ResourceSet>, Arc<TagSet>)> {
        self.inner.get(key)
    }

    pub fn stats(&self) -> CacheStats {
        self.inner.stats()
    }

    pub fn clear(&mut self) {
        self.inner.clear();
    }
}

impl Default for QueryCache {
    fn default() -> Self {
        Self::new()
    }
}

/// Maps a set of filtered resources to its selectable tags.
pub struct ResourceCache {
    inner: MemoMap<SetKey<ResourceId>, Arc<TagSet>>,
}

impl ResourceCache {
    pub fn new() -> Self {
        Self::with_config(CacheConfig::UNBOUNDED)
    }

    pub fn with_config(config: CacheConfig) -> Self {
        ResourceCache {
            inner: MemoMap::new(config),
        }
    }

    pub fn cache_by_resources(&mut self, filtered: Arc<ResourceSet>, selectable: Arc<TagSet>) {
        self.store_key(SetKey::new(filtered), selectable);
    }

    /// `None` when `filtered` has not been stored.
    pub fn retrieve_by_resources(&mut self, filtered: &Arc<ResourceSet>) -> Option<Arc<TagSet>> {
        self.retrieve_key(&SetKey::new(filtered.clone()))
    }

    pub(crate) fn store_key(&mut self, key: SetKey<ResourceId>, selectable: Arc<TagSet>) {
        self.inner.put(key, selectable);
    }

    pub(crate) fn retrieve_key(&mut self, key: &SetKey<ResourceId>) -> Option<Arc<TagSet>> {
        self.inner.get(key)
    }

    pub fn stats(&self) -> CacheStats {
        self.inner.stats()
    }

    pub fn clear(&mut self) {
        self.inner.clear();
    }
}

impl Default for ResourceCache {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set::{ResourceId, TagId};

    fn ts(ids: &[u32]) -> TagSet {
        ids.iter().map(|&i| TagId(i)).collect()
    }

    fn rs(ids: &[u32]) -> ResourceSet {
        ids.iter().map(|&i| ResourceId(i)).collect()
    }

    #[test]
    fn query_cache_store_then_retrieve() {
        let mut cache = QueryCache::new();
        cache.cache_by_query(&ts(&[]), Arc::new(rs(&[0, 1, 2])), Arc::new(ts(&[1, 2])));
        let (r, s) = cache.retrieve_by_query(&ts(&[])).unwrap();
        assert_eq!(*r, rs(&[0, 1, 2]));
        assert_eq!(*s, ts(&[1, 2]));
        assert!(cache.retrieve_by_query(&ts(&[4])).is_none());
        assert_eq!(
            cache.stats(),
            CacheStats { lookups: 2, hits: 1, stores: 1, entries: 1 }
        );
    }

    #[test]
    fn query_keys_are_sets() {
        let mut cache = QueryCache::new();
        let levant_cave: TagSet = [TagId(2), TagId(1)].into_iter().collect();
        cache.cache_by_query(&levant_cave, Arc::new(rs(&[1])), Arc::new(ts(&[])));
        let cave_levant: TagSet = [TagId(1), TagId(2)].into_iter().collect();
        assert!(cache.retrieve_by_query(&cave_levant).is_some());
    }

    #[test]
    fn exact_key_semantics() {
        let mut cache = QueryCache::new();
        cache.cache_by_query(&ts(&[0]), Arc::new(rs(&[0, 1])), Arc::new(ts(&[1])));
        cache.cache_by_query(&ts(&[0, 1]), Arc::new(rs(&[1])), Arc::new(ts(&[])));
        let (r, _) = cache.retrieve_by_query(&ts(&[0])).unwrap();
        assert_eq!(*r, rs(&[0, 1]));
        assert!(cache.retrieve_by_query(&ts(&[1])).is_none());
        assert!(cache.retrieve_by_query(&ts(&[0, 1, 2])).is_none());
    }

    #[test]
    fn storing_same_entry_twice_is_idempotent() {
        let mut cache = QueryCache::new();
        for _ in 0..2 {
            cache.cache_by_query(&ts(&[3]), Arc::new(rs(&[5])), Arc::new(ts(&[])));
        }
        let stats = cache.stats();
        assert_eq!(stats.entries, 1);
        assert_eq!(stats.stores, 2);
    }

    #[test]
    fn resource_cache_empty_key_is_legal() {
        let mut cache = ResourceCache::new();
        assert!(cache.retrieve_by_resources(&Arc::new(rs(&[]))).is_none());
        cache.cache_by_resources(Arc::new(rs(&[])), Arc::new(ts(&[])));
        assert!(cache.retrieve_by_resources(&Arc::new(rs(&[]))).is_some());
        assert!(cache.retrieve_by_resources(&Arc::new(rs(&[0]))).is_none());
        let stats = cache.stats();
        assert!(stats.hits <= stats.lookups);
        assert_eq!(stats.misses(), 2);
    }

    #[test]
    fn lru_bound_evicts_least_recent() {
        let mut cache = ResourceCache::with_config(CacheConfig::bounded(2));
        cache.cache_by_resources(Arc::new(rs(&[1])), Arc::new(ts(&[1])));
        cache.cache_by_resources(Arc::new(rs(&[2])), Arc::new(ts(&[2])));
        // touch {1} so {2} becomes the eviction victim
        assert!(cache.retrieve_by_resources(&Arc::new(rs(&[1]))).is_some());
        cache.cache_by_resources(Arc::new(rs(&[3])), Arc::new(ts(&[3])));
        assert!(cache.retrieve_by_resources(&Arc::new(rs(&[2]))).is_none());
        assert!(cache.retrieve_by_resources(&Arc::new(rs(&[1]))).is_some());
        assert!(cache.retrieve_by_resources(&Arc::new(rs(&[3]))).is_some());
        let stats = cache.stats();
        assert_eq!(stats.entries, 2);
        assert!(stats.entries <= stats.stores);
    }

    #[test]
    fn clear_resets_everything() {
        let mut cache = QueryCache::new();
        cache.cache_by_query(&ts(&[1]), Arc::new(rs(&[1])), Arc::new(ts(&[])));
        cache.clear();
        assert_eq!(cache.stats(), CacheStats::default());
        assert!(cache.retrieve_by_query(&ts(&[1])).is_none());
    }
}
