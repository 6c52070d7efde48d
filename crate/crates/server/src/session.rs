//! In-memory browsing sessions and their JSON views.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use tagbrowse::browse::init_state;
use tagbrowse::simulator::rank_selectable;
use tagbrowse::{BrowsingState, CacheStats, Collection, Strategy, StrategyCache, UpdateStrategy, UserAction};

pub const DEFAULT_PAGE_SIZE: usize = 20;
pub const MAX_PAGE_SIZE: usize = 1000;

/// One user's browsing session. The strategy is fixed at creation.
pub struct Session {
    id: Uuid,
    collection: Arc<Collection>,
    strategy: StrategyCache,
    state: BrowsingState,
    timings_ns: Vec<u64>,
    last_hit: Option<bool>,
    last_used: Instant,
}

impl Session {
    pub fn new(collection: Arc<Collection>, strategy: Strategy) -> Self {
        let state = init_state(&collection);
        let mut cache = StrategyCache::new(strategy);
        cache.start(&collection, &state);
        Session {
            id: Uuid::new_v4(),
            collection,
            strategy: cache,
            state,
            timings_ns: Vec::new(),
            last_hit: None,
            last_used: Instant::now(),
        }
    }

    pub fn id(&self) -> Uuid {
        self.id
    }

    pub fn collection(&self) -> &Arc<Collection> {
        &self.collection
    }

    pub fn state(&self) -> &BrowsingState {
        &self.state
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy.strategy()
    }

    /// Update times in nanoseconds, one per applied action.
    pub fn timings_ns(&self) -> &[u64] {
        &self.timings_ns
    }

    pub fn touch(&mut self) {
        self.last_used = Instant::now();
    }

    pub fn idle_for(&self, now: Instant) -> Duration {
        now.saturating_duration_since(self.last_used)
    }

    /// Applies an action. On error the state is left as it was.
    pub fn apply(&mut self, action: UserAction) -> tagbrowse::Result<()> {
        self.touch();
        // timed exactly as in the benchmark: the strategy update alone
        let start = Instant::now();
        let step = self.strategy.apply(&self.collection, &self.state, action)?;
        let elapsed = start.elapsed().as_nanos() as u64;
        self.state = step.state;
        self.timings_ns.push(elapsed);
        self.last_hit = Some(step.hit);
        Ok(())
    }

    pub fn view(&self, page: PageRequest) -> SessionView {
        let c = &*self.collection;
        let total = self.state.filtered().len() as usize;
        let resources = self
            .state
            .filtered()
            .iter()
            .skip((page.page - 1).saturating_mul(page.page_size))
            .take(page.page_size)
            .filter_map(|id| c.resource(id))
            .map(|r| ResourceView {
                id: r.key.clone(),
                label: r.label.clone(),
                uri: r.payload_uri.clone(),
            })
            .collect();
        SessionView {
            id: self.id.to_string(),
            collection: c.name().to_owned(),
            strategy: self.strategy(),
            active_tags: self
                .state
                .active_order()
                .iter()
                .map(|&t| c.tag_label(t).to_owned())
                .collect(),
            selectable_tags: rank_selectable(c, &self.state)
                .into_iter()
                .map(|(t, count)| TagCount {
                    label: c.tag_label(t).to_owned(),
                    count,
                })
                .collect(),
            resources,
            total_resources: total,
            page: page.page,
            page_size: page.page_size,
            total_pages: total.div_ceil(page.page_size),
            actions: self.timings_ns.len(),
            last_action_micros: self.timings_ns.last().map(|&ns| ns as f64 / 1e3),
            last_action_hit: self.last_hit,
            cache_stats: self.strategy.stats(),
        }
    }
}

/// A 1-based page of the filtered resources.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PageRequest {
    pub page: usize,
    pub page_size: usize,
}

impl Default for PageRequest {
    fn default() -> Self {
        PageRequest {
            page: 1,
            page_size: DEFAULT_PAGE_SIZE,
        }
    }
}

impl PageRequest {
    pub fn new(page: Option<usize>, page_size: Option<usize>) -> Result<Self, String> {
        let page = page.unwrap_or(1);
        let page_size = page_size.unwrap_or(DEFAULT_PAGE_SIZE);
        if page == 0 {
            return Err("page numbers start at 1".into());
        }
        if page_size == 0 || page_size > MAX_PAGE_SIZE {
            return Err(format!("page_size must be between 1 and {MAX_PAGE_SIZE}"));
        }
        Ok(PageRequest { page, page_size })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionView {
    pub id: String,
    pub collection: String,
    pub strategy: Strategy,
    /// Labels in the order the tags were added.
    pub active_tags: Vec<String>,
    /// Ranked by descending count, ties by tag id.
    pub selectable_tags: Vec<TagCount>,
    pub resources: Vec<ResourceView>,
    pub total_resources: usize,
    pub page: usize,
    pub page_size: usize,
    pub total_pages: usize,
    pub actions: usize,
    pub last_action_micros: Option<f64>,
    pub last_action_hit: Option<bool>,
    pub cache_stats: CacheStats,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagCount {
    pub label: String,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceView {
    pub id: String,
    pub label: String,
    pub uri: Option<String>,
}

pub type SharedSession = Arc<Mutex<Session>>;

/// Live sessions, expired after a period without requests.
pub struct SessionStore {
    sessions: RwLock<HashMap<Uuid, SharedSession>>,
    idle_timeout: Duration,
}

impl SessionStore {
    pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);

    pub fn new(idle_timeout: Duration) -> Self {
        SessionStore {
            sessions: RwLock::new(HashMap::new()),
            idle_timeout,
        }
    }

    pub fn idle_timeout(&self) -> Duration {
        self.idle_timeout
    }

    pub fn insert(&self, session: Session) -> SharedSession {
        let id = session.id();
        let shared = Arc::new(Mutex::new(session));
        self.sessions.write().unwrap().insert(id, shared.clone());
        shared
    }

    /// The session, unless unknown or idle past the timeout.
    pub fn get(&self, id: Uuid) -> Option<SharedSession> {
        let shared = self.sessions.read().unwrap().get(&id).cloned()?;
        let expired = shared.lock().unwrap().idle_for(Instant::now()) > self.idle_timeout;
        if expired {
            self.sessions.write().unwrap().remove(&id);
            return None;
        }
        Some(shared)
    }

    pub fn remove(&self, id: Uuid) -> bool {
        self.sessions.write().unwrap().remove(&id).is_some()
    }

    pub fn len(&self) -> usize {
        self.sessions.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops sessions idle for longer than the timeout as of `now`;
    /// returns how many were dropped.
    pub fn expire_idle(&self, now: Instant) -> usize {
        let mut sessions = self.sessions.write().unwrap();
        let before = sessions.len();
        sessions.retain(|_, s| s.lock().unwrap().idle_for(now) <= self.idle_timeout);
        before - sessions.len()
    }
}

impl Default for SessionStore {
    fn default() -> Self {
        Self::new(Self::DEFAULT_IDLE_TIMEOUT)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tagbrowse::sample::spanish_art;

    #[test]
    fn view_of_fresh_session() {
        let s = Session::new(Arc::new(spanish_art()), Strategy::Resource);
        let v = s.view(PageRequest::default());
        assert_eq!(v.total_resources, 6);
        assert_eq!(v.selectable_tags.len(), 11);
        assert_eq!(v.selectable_tags[0].count, 3);
        assert_eq!(v.resources.len(), 6);
        assert_eq!(v.last_action_micros, None);
        assert!(v.active_tags.is_empty());
    }

    #[test]
    fn pages_partition_the_filtered_resources() {
        let s = Session::new(Arc::new(spanish_art()), Strategy::Query);
        let mut seen = Vec::new();
        for page in 1..=3 {
            let v = s.view(PageRequest::new(Some(page), Some(4)).unwrap());
            assert_eq!(v.total_pages, 2);
            seen.extend(v.resources.into_iter().map(|r| r.id));
        }
        assert_eq!(seen, ["r1", "r2", "r3", "r4", "r5", "r6"]);
    }

    #[test]
    fn rejects_bad_pages() {
        assert!(PageRequest::new(Some(0), None).is_err());
        assert!(PageRequest::new(None, Some(0)).is_err());
        assert!(PageRequest::new(None, Some(MAX_PAGE_SIZE + 1)).is_err());
    }

    #[test]
    fn idle_sessions_expire() {
        let store = SessionStore::new(Duration::from_secs(60));
        let id = store.insert(Session::new(Arc::new(spanish_art()), Strategy::None)).lock().unwrap().id();
        assert_eq!(store.expire_idle(Instant::now()), 0);
        assert!(store.get(id).is_some());
        assert_eq!(store.expire_idle(Instant::now() + Duration::from_secs(61)), 1);
        assert!(store.get(id).is_none());
        assert!(store.is_empty());
    }
}
