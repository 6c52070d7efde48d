//! Seeded random browsing sessions.
//!
//! The walk, at every state:
//!
//! 1. If both adding and removing are possible, adds with probability 0.5.
//! 2. An add picks among the 20 highest-ranked selectable tags with
//!    probability 0.8 and among the remaining ones otherwise, uniformly
//!    within the chosen segment.
//! 3. A remove picks the `k`-th most recently added active tag with
//!    probability proportional to `0.8^(k-1) · 0.2`, renormalized over the
//!    active tags.
//!
//! Selectable tags are ranked by how many filtered resources they annotate,
//! descending, ties broken by ascending tag id.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::browse::{self, BrowsingState, StateDigest, UserAction};
use crate::collection::Collection;
use crate::error::{Error, Result};
use crate::set::TagId;
use crate::strategy::{Strategy, StrategyCache, UpdateStrategy};

/// Probabilities of the random walk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkModel {
    pub add_probability: f64,
    pub top_segment_len: usize,
    pub top_segment_probability: f64,
    /// Success probability of the geometric removal-depth law.
    pub removal_success_probability: f64,
}

impl Default for WalkModel {
    fn default() -> Self {
        WalkModel {
            add_probability: 0.5,
            top_segment_len: 20,
            top_segment_probability: 0.8,
            removal_success_probability: 0.2,
        }
    }
}

/// The generator's random source: ChaCha8 seeded through `seed_from_u64`.
pub type SessionRng = ChaCha8Rng;

pub fn session_rng(seed: u64) -> SessionRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Selectable tags with their in-context resource counts, most frequent
/// first, ties by ascending id.
pub fn rank_selectable(c: &Collection, state: &BrowsingState) -> Vec<(TagId, u64)> {
    let mut ranked = browse::selectable_counts(c, state.filtered(), state.selectable());
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

/// `P(k)` for `k = 1..=n` of the geometric law truncated to `n` and
/// renormalized.
pub fn removal_depth_probabilities(n: usize, success: f64) -> Vec<f64> {
    let fail = 1.0 - success;
    let mass = 1.0 - fail.powi(n as i32);
    (0..n).map(|k| fail.powi(k as i32) * success / mass).collect()
}

/// Draws a removal depth in `1..=n` with a single uniform draw.
pub fn sample_removal_depth<R: Rng + ?Sized>(n: usize, success: f64, rng: &mut R) -> usize {
    assert!(n >= 1, "no active tag to remove");
    let u: f64 = rng.random();
    let fail = 1.0 - success;
    let mut target = u * (1.0 - fail.powi(n as i32));
    let mut p = success;
    for k in 1..n {
        if target < p {
            return k;
        }
        target -= p;
        p *= fail;
    }
    n
}

/// Draws the next action of the walk. Returns [`UserAction::End`] when no
/// tag can be added or removed.
pub fn sample_next_action<R: Rng + ?Sized>(
    c: &Collection,
    state: &BrowsingState,
    model: &WalkModel,
    rng: &mut R,
) -> UserAction {
    let can_add = !state.selectable().is_empty();
    let can_remove = !state.active().is_empty();
    let add = match (can_add, can_remove) {
        (false, false) => return UserAction::End,
        (true, false) => true,
        (false, true) => false,
        // the coin is only tossed when both kinds are legal
        (true, true) => rng.random::<f64>() < model.add_probability,
    };

    if add {
        let ranked = rank_selectable(c, state);
        let top = model.top_segment_len.min(ranked.len());
        let segment = if ranked.len() > top && rng.random::<f64>() >= model.top_segment_probability {
            &ranked[top..]
        } else {
            &ranked[..top]
        };
        UserAction::Add(segment[rng.random_range(0..segment.len())].0)
    } else {
        let order = state.active_order();
        let k = sample_removal_depth(order.len(), model.removal_success_probability, rng);
        UserAction::Remove(order[order.len() - k])
    }
}

/// A generated session.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionTrace {
    /// Fingerprint of the collection the trace was generated on.
    pub collection: String,
    pub seed: u64,
    pub requested_length: usize,
    pub actions: Vec<UserAction>,
    /// Set when the walk reached a state with no legal action before
    /// `requested_length` actions.
    pub ended_early: bool,
}

pub fn generate_session(c: &Collection, seed: u64, n_actions: usize) -> SessionTrace {
    generate_session_with(c, seed, n_actions, &WalkModel::default())
}

pub fn generate_session_with(
    c: &Collection,
    seed: u64,
    n_actions: usize,
    model: &WalkModel,
) -> SessionTrace {
    let mut rng = session_rng(seed);
    let mut state = browse::init_state(c);
    let mut actions = Vec::with_capacity(n_actions);
    let mut ended_early = false;
    while actions.len() < n_actions {
        let action = sample_next_action(c, &state, model, &mut rng);
        if action == UserAction::End {
            ended_early = true;
            break;
        }
        state = browse::apply_action_uncached(c, &state, action)
            .expect("sampled actions are valid");
        actions.push(action);
    }
    SessionTrace {
        collection: c.fingerprint().to_owned(),
        seed,
        requested_length: n_actions,
        actions,
        ended_early,
    }
}

#[derive(Serialize, Deserialize)]
struct TraceHeader {
    collection: String,
    seed: u64,
    n: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum TraceRecord {
    Add { tag: String },
    Remove { tag: String },
    End,
}

impl SessionTrace {
    /// Writes the JSON-lines form: a header, then one record per action
    /// with tags by label, then an `end` record if the walk dead-ended.
    pub fn write_jsonl<W: Write>(&self, c: &Collection, mut out: W) -> Result<()> {
        let header = TraceHeader {
            collection: self.collection.clone(),
            seed: self.seed,
            n: self.requested_length,
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for action in &self.actions {
            let record = match *action {
                UserAction::Add(t) => TraceRecord::Add { tag: c.tag_label(t).to_owned() },
                UserAction::Remove(t) => TraceRecord::Remove { tag: c.tag_label(t).to_owned() },
                UserAction::End => TraceRecord::End,
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        if self.ended_early {
            serde_json::to_writer(&mut out, &TraceRecord::End)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self, c: &Collection) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(c, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    /// Parses a JSON-lines trace, resolving labels against `c`. The trace
    /// must have been generated on a collection with the same fingerprint.
    pub fn read_jsonl<R: BufRead>(c: &Collection, input: R) -> Result<Self> {
        let mut lines = input.lines().filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()));
        let header: TraceHeader = match lines.next() {
            Some(line) => serde_json::from_str(&line?)?,
            None => return Err(Error::InvalidTrace("missing header".into())),
        };
        if header.collection != c.fingerprint() {
            return Err(Error::InvalidTrace(format!(
                "trace was generated for collection {}, not {}",
                header.collection,
                c.fingerprint()
            )));
        }
        let mut actions = Vec::new();
        let mut ended_early = false;
        for line in lines {
            if ended_early {
                return Err(Error::InvalidTrace("records after end marker".into()));
            }
            match serde_json::from_str(&line?)? {
                TraceRecord::Add { tag } => actions.push(UserAction::Add(c.require_tag(&tag)?)),
                TraceRecord::Remove { tag } => actions.push(UserAction::Remove(c.require_tag(&tag)?)),
                TraceRecord::End => ended_early = true,
            }
        }
        Ok(SessionTrace {
            collection: header.collection,
            seed: header.seed,
            requested_length: header.n,
            actions,
            ended_early,
        })
    }

    pub fn from_jsonl(c: &Collection, text: &str) -> Result<Self> {
        Self::read_jsonl(c, text.as_bytes())
    }
}

/// States visited by a replay.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replay {
    pub initial: StateDigest,
    /// Digest after each action, with whether the cache served it.
    pub steps: Vec<(StateDigest, bool)>,
}

impl Replay {
    pub fn digests(&self) -> impl Iterator<Item = &StateDigest> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|(d, _)| d))
    }

    pub fn hits(&self) -> Vec<bool> {
        self.steps.iter().map(|&(_, h)| h).collect()
    }
}

/// Replays `actions` under a fresh instance of `strategy`.
pub fn replay(c: &Collection, actions: &[UserAction], strategy: Strategy) -> Result<Replay> {
    replay_with(c, actions, &mut StrategyCache::new(strategy))
}

pub fn replay_with<S: UpdateStrategy + ?Sized>(
    c: &Collection,
    actions: &[UserAction],
    strategy: &mut S,
) -> Result<Replay> {
    let mut state = browse::init_state(c);
    strategy.start(c, &state);
    let initial = state.digest();
    let mut steps = Vec::with_capacity(actions.len());
    for (index, &action) in actions.iter().enumerate() {
        let step = strategy
            .apply(c, &state, action)
            .map_err(|e| Error::CorruptTrace { index, source: Box::new(e) })?;
        state = step.state;
        steps.push((state.digest(), step.hit));
    }
    Ok(Replay { initial, steps })
}
