//! Browsing-state update strategies.
//!
//! * [`Strategy::None`] recomputes every state.
//! * [`Strategy::Query`] memoizes `(filtered, selectable)` by the active tags.
//! * [`Strategy::Resource`] always recomputes the filtered resources and
//!   memoizes the selectable tags by them.
//!
//! All three produce the same sequence of states for the same actions; they
//! differ only in how much set work each step performs.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::browse::{self, BrowsingState, UserAction};
use crate::cache::{CacheConfig, CacheStats, QueryCache, ResourceCache, SetKey};
use crate::collection::Collection;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    None,
    Query,
    Resource,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::None, Strategy::Query, Strategy::Resource];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::Query => "query",
            Strategy::Resource => "resource",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "uncached" => Ok(Strategy::None),
            "query" | "q" => Ok(Strategy::Query),
            "resource" | "r" => Ok(Strategy::Resource),
            other => Err(Error::InvalidArgument(format!(
                "unknown strategy `{other}` (expected none, query or resource)"
            ))),
        }
    }
}

/// Result of one state update.
#[derive(Clone, Debug)]
pub struct Step {
    pub state: BrowsingState,
    /// Whether the cache supplied the step's result. Always false for the
    /// un-cached strategy and for [`UserAction::End`].
    pub hit: bool,
}

/// A per-session state update policy.
pub trait UpdateStrategy {
    fn strategy(&self) -> Strategy;

    /// Drops all cached entries and counters, then records the initial
    /// state the session starts from.
    fn start(&mut self, c: &Collection, initial: &BrowsingState);

    fn apply(&mut self, c: &Collection, state: &BrowsingState, action: UserAction) -> Result<Step>;

    fn stats(&self) -> CacheStats;
}

/// Query-cached update: consult the cache with the updated active tags; on a
/// miss compute both sets as the un-cached update does and store them.
pub fn apply_action_query_cached(
    c: &Collection,
    state: &BrowsingState,
    action: UserAction,
    cache: &mut QueryCache,
) -> Result<Step> {
    state.validate(c, action)?;
    if action == UserAction::End {
        return Ok(Step { state: state.clone(), hit: false });
    }
    let (active, order) = state.next_active(action);
    let key = SetKey::new(Arc::new(active.clone()));
    if let Some((filtered, selectable)) = cache.retrieve_key(&key) {
        return Ok(Step {
            state: BrowsingState::from_parts(active, order, filtered, selectable),
            hit: true,
        });
    }
    let filtered = browse::next_filtered(c, state, action, &active);
    let selectable = browse::next_selectable(c, state, action, &active, &filtered);
    let filtered = Arc::new(filtered);
    let selectable = Arc::new(selectable);
    cache.store_key(key, filtered.clone(), selectable.clone());
    Ok(Step {
        state: BrowsingState::from_parts(active, order, filtered, selectable),
        hit: false,
    })
}

/// Resource-cached update: always recompute the filtered resources (a
/// filter for an add, a full query for a remove), then consult the cache
/// with them for the selectable tags.
pub fn apply_action_resource_cached(
    c: &Collection,
    state: &BrowsingState,
    action: UserAction,
    cache: &mut ResourceCache,
) -> Result<Step> {
    state.validate(c, action)?;
    if action == UserAction::End {
        return Ok(Step { state: state.clone(), hit: false });
    }
    let (active, order) = state.next_active(action);
    let filtered = Arc::new(browse::next_filtered(c, state, action, &active));
    let key = SetKey::new(filtered.clone());
    if let Some(selectable) = cache.retrieve_key(&key) {
        return Ok(Step {
            state: BrowsingState::from_parts(active, order, filtered, selectable),
            hit: true,
        });
    }
    let selectable = Arc::new(browse::next_selectable(c, state, action, &active, &filtered));
    cache.store_key(key, selectable.clone());
    Ok(Step {
        state: BrowsingState::from_parts(active, order, filtered, selectable),
        hit: false,
    })
}

/// The built-in strategies together with their cache.
pub enum StrategyCache {
    None,
    Query(QueryCache),
    Resource(ResourceCache),
}

impl StrategyCache {
    pub fn new(strategy: Strategy) -> Self {
        Self::with_config(strategy, CacheConfig::UNBOUNDED)
    }

    pub fn with_config(strategy: Strategy, config: CacheConfig) -> Self {
        match strategy {
            Strategy::None => StrategyCache::None,
            Strategy::Query => StrategyCache::Query(QueryCache::with_config(config)),
            Strategy::Resource => StrategyCache::Resource(ResourceCache::with_config(config)),
        }
    }
}

impl UpdateStrategy for StrategyCache {
    fn strategy(&self) -> Strategy {
        match self {
            StrategyCache::None => Strategy::None,
            StrategyCache::Query(_) => Strategy::Query,
            StrategyCache::Resource(_) => Strategy::Resource,
        }
    }

    fn start(&mut self, _c: &Collection, initial: &BrowsingState) {
        match self {
            StrategyCache::None => {}
            StrategyCache::Query(cache) => {
                cache.clear();
                cache.cache_by_query(
                    initial.active(),
                    initial.filtered_arc().clone(),
                    initial.selectable_arc().clone(),
                );
            }
            StrategyCache::Resource(cache) => {
                cache.clear();
                cache.cache_by_resources(initial.filtered_arc().clone(), initial.selectable_arc().clone());
            }
        }
    }

    fn apply(&mut self, c: &Collection, state: &BrowsingState, action: UserAction) -> Result<Step> {
        match self {
            StrategyCache::None => Ok(Step {
                state: browse::apply_action_uncached(c, state, action)?,
                hit: false,
            }),
            StrategyCache::Query(cache) => apply_action_query_cached(c, state, action, cache),
            StrategyCache::Resource(cache) => apply_action_resource_cached(c, state, action, cache),
        }
    }

    fn stats(&self) -> CacheStats {
        match self {
            StrategyCache::None => CacheStats::default(),
            StrategyCache::Query(cache) => cache.stats(),
            StrategyCache::Resource(cache) => cache.stats(),
        }
    }
}

/// A browsing session over a borrowed collection.
pub struct Browser<'c, S = StrategyCache> {
    collection: &'c Collection,
    state: BrowsingState,
    strategy: S,
}

impl<'c> Browser<'c, StrategyCache> {
    pub fn new(collection: &'c Collection, strategy: Strategy) -> Self {
        Self::with_strategy(collection, StrategyCache::new(strategy))
    }
}

impl<'c, S: UpdateStrategy> Browser<'c, S> {
    pub fn with_strategy(collection: &'c Collection, mut strategy: S) -> Self {
        let state = browse::init_state(collection);
        strategy.start(collection, &state);
        Browser {
            collection,
            state,
            strategy,
        }
    }

    /// Applies `action`; returns whether the cache served it. The state is
    /// left untouched when the action is invalid.
    pub fn apply(&mut self, action: UserAction) -> Result<bool> {
        let step = self.strategy.apply(self.collection, &self.state, action)?;
        self.state = step.state;
        Ok(step.hit)
    }

    pub fn state(&self) -> &BrowsingState {
        &self.state
    }

    pub fn collection(&self) -> &'c Collection {
        self.collection
    }

    pub fn stats(&self) -> CacheStats {
        self.strategy.stats()
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy.strategy()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use crate::set::TagId;

    fn t(c: &Collection, label: &str) -> TagId {
        c.tag_id(label).unwrap()
    }

    fn run(c: &Collection, strategy: Strategy, actions: &[UserAction]) -> (Vec<bool>, Vec<BrowsingState>) {
        let mut b = Browser::new(c, strategy);
        let mut hits = Vec::new();
        let mut states = Vec::new();
        for &a in actions {
            hits.push(b.apply(a).unwrap());
            states.push(b.state().clone());
        }
        (hits, states)
    }

    fn permutation_session(c: &Collection) -> Vec<UserAction> {
        use UserAction::*;
        let (lev, cave) = (t(c, "Levant"), t(c, "Cave-Painting"));
        vec![Add(lev), Add(cave), Remove(cave), Remove(lev), Add(cave), Add(lev)]
    }

    #[test]
    fn query_cache_hand_trace() {
        let c = sample::spanish_art();
        let (hits, states) = run(&c, Strategy::Query, &permutation_session(&c));
        // ×Cave-Painting returns to {Levant}, ×Levant to the initial state,
        // +Cave-Painting is new, +Levant reaches {Levant, Cave-Painting} again
        assert_eq!(hits, [false, false, true, true, false, true]);
        assert_eq!(states[5].filtered().len(), 1);
        assert_eq!(states[5].active_order(), [t(&c, "Cave-Painting"), t(&c, "Levant")]);
    }

    #[test]
    fn resource_cache_hand_trace() {
        let c = sample::spanish_art();
        let (hits, _) = run(&c, Strategy::Resource, &permutation_session(&c));
        assert_eq!(hits, [false, false, true, true, false, true]);

        use UserAction::*;
        let session = [Add(t(&c, "Cave-Painting")), Add(t(&c, "Prehistoric"))];
        // Prehistoric is implied by Cave-Painting, so it is not selectable
        let mut b = Browser::new(&c, Strategy::Resource);
        assert!(!b.apply(session[0]).unwrap());
        assert!(matches!(b.apply(session[1]), Err(Error::NotSelectable(_))));
    }

    #[test]
    fn implied_tag_path_hits_resource_cache_only() {
        use UserAction::*;
        let c = sample::spanish_art();
        let (pre, cave) = (t(&c, "Prehistoric"), t(&c, "Cave-Painting"));
        let session = [Add(cave), Remove(cave), Add(pre), Add(cave)];
        let (qh, qs) = run(&c, Strategy::Query, &session);
        let (rh, rs) = run(&c, Strategy::Resource, &session);
        assert_eq!(qh, [false, true, false, false]);
        assert_eq!(rh, [false, true, false, true]);
        for (a, b) in qs.iter().zip(&rs) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn replaying_session_with_shared_cache_hits_everything() {
        let c = sample::spanish_art();
        let actions = permutation_session(&c);
        for strategy in [Strategy::Query, Strategy::Resource] {
            let mut cache = StrategyCache::new(strategy);
            let init = browse::init_state(&c);
            cache.start(&c, &init);
            for round in 0..2 {
                let mut s = init.clone();
                for &a in &actions {
                    let step = cache.apply(&c, &s, a).unwrap();
                    if round == 1 {
                        assert!(step.hit, "{strategy} round 2 missed on {a}");
                    }
                    s = step.state;
                }
            }
        }
    }

    #[test]
    fn invalid_action_leaves_browser_state() {
        let c = sample::spanish_art();
        for strategy in Strategy::ALL {
            let mut b = Browser::new(&c, strategy);
            let before = b.state().clone();
            assert!(b.apply(UserAction::Remove(t(&c, "Punic"))).is_err());
            assert_eq!(b.state(), &before);
            assert_eq!(b.stats().lookups, 0);
        }
    }

    #[test]
    fn first_action_is_a_miss_and_stores() {
        let c = sample::spanish_art();
        for strategy in [Strategy::Query, Strategy::Resource] {
            let mut b = Browser::new(&c, strategy);
            assert!(!b.apply(UserAction::Add(t(&c, "Megalithic"))).unwrap());
            let stats = b.stats();
            assert_eq!((stats.lookups, stats.hits, stats.stores, stats.entries), (1, 0, 2, 2));
        }
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.as_str().parse::<Strategy>().unwrap(), s);
        }
        assert!("lru".parse::<Strategy>().is_err());
    }
}
