//! Primitive browsing operations and the un-cached state update.
//!
//! A browsing state is determined by its active tags `F`. From `F` follow
//! the filtered resources (those annotated with every active tag) and the
//! selectable tags (those annotating some, but not all, filtered resources).

use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::collection::Collection;
use crate::error::{Error, Result};
use crate::set::{CanonicalKey, ResourceSet, TagId, TagSet};

/// A user interaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UserAction {
    Add(TagId),
    Remove(TagId),
    /// The user finished browsing.
    End,
}

impl fmt::Display for UserAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UserAction::Add(t) => write!(f, "+{t}"),
            UserAction::Remove(t) => write!(f, "×{t}"),
            UserAction::End => f.write_str("⊥"),
        }
    }
}

/// Active tags, filtered resources and selectable tags.
///
/// The two derived sets are shared snapshots: caches may hold the same
/// `Arc` without copying, and nothing mutates a set once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrowsingState {
    active: TagSet,
    active_order: Vec<TagId>,
    filtered: Arc<ResourceSet>,
    selectable: Arc<TagSet>,
}

/// Canonical keys of a state's filtered resources and selectable tags.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateDigest {
    pub filtered: CanonicalKey,
    pub selectable: CanonicalKey,
}

impl StateDigest {
    /// Hex SHA-256 over both keys, each prefixed by its byte length.
    pub fn hex(&self) -> String {
        let mut h = Sha256::new();
        for key in [&self.filtered, &self.selectable] {
            let bytes = key.as_bytes();
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(bytes);
        }
        hex::encode(h.finalize())
    }
}

impl BrowsingState {
    pub fn active(&self) -> &TagSet {
        &self.active
    }

    /// Active tags in the order they were added, most recent last.
    pub fn active_order(&self) -> &[TagId] {
        &self.active_order
    }

    pub fn filtered(&self) -> &ResourceSet {
        &self.filtered
    }

    pub fn selectable(&self) -> &TagSet {
        &self.selectable
    }

    pub(crate) fn filtered_arc(&self) -> &Arc<ResourceSet> {
        &self.filtered
    }

    pub(crate) fn selectable_arc(&self) -> &Arc<TagSet> {
        &self.selectable
    }

    pub fn digest(&self) -> StateDigest {
        StateDigest {
            filtered: self.filtered.key(),
            selectable: self.selectable.key(),
        }
    }

    /// Same active tags, filtered resources and selectable tags, ignoring
    /// the order in which the tags were added.
    pub fn same_sets(&self, other: &BrowsingState) -> bool {
        self.active == other.active
            && self.filtered == other.filtered
            && self.selectable == other.selectable
    }

    /// Whether any action other than ending the session is possible.
    pub fn has_legal_action(&self) -> bool {
        !self.active.is_empty() || !self.selectable.is_empty()
    }

    /// Checks `action` against this state.
    pub fn validate(&self, c: &Collection, action: UserAction) -> Result<()> {
        match action {
            UserAction::Add(t) => {
                if !c.is_valid_tag(t) {
                    Err(Error::UnknownTag(t))
                } else if !self.selectable.contains(t) {
                    Err(Error::NotSelectable(t))
                } else {
                    Ok(())
                }
            }
            UserAction::Remove(t) => {
                if !c.is_valid_tag(t) {
                    Err(Error::UnknownTag(t))
                } else if !self.active.contains(t) {
                    Err(Error::NotActive(t))
                } else {
                    Ok(())
                }
            }
            UserAction::End => Ok(()),
        }
    }

    /// Applies `action` to the active tags only. Callers validate first.
    pub(crate) fn next_active(&self, action: UserAction) -> (TagSet, Vec<TagId>) {
        let mut active = self.active.clone();
        let mut order = self.active_order.clone();
        match action {
            UserAction::Add(t) => {
                active.insert(t);
                order.push(t);
            }
            UserAction::Remove(t) => {
                active.remove(t);
                order.retain(|&x| x != t);
            }
            UserAction::End => {}
        }
        (active, order)
    }

    pub(crate) fn from_parts(
        active: TagSet,
        active_order: Vec<TagId>,
        filtered: Arc<ResourceSet>,
        selectable: Arc<TagSet>,
    ) -> Self {
        BrowsingState {
            active,
            active_order,
            filtered,
            selectable,
        }
    }
}

/// Resources in `resources` annotated with `tag`.
pub fn filter(c: &Collection, resources: &ResourceSet, tag: TagId) -> Result<ResourceSet> {
    Ok(resources.intersection(c.inverted(tag)?))
}

/// Resources annotated with every tag in `active`; the whole collection
/// when `active` is empty.
///
/// Posting lists are intersected shortest first.
pub fn query(c: &Collection, active: &TagSet) -> Result<ResourceSet> {
    let mut postings = active
        .iter()
        .map(|t| c.inverted(t))
        .collect::<Result<Vec<_>>>()?;
    postings.sort_by_key(|p| p.len());
    let mut iter = postings.into_iter();
    let Some(first) = iter.next() else {
        return Ok(c.resources().clone());
    };
    let mut out = first.clone();
    for p in iter {
        if out.is_empty() {
            break;
        }
        out.intersect_with(p);
    }
    Ok(out)
}

/// Tags of `candidates` annotating some, but not all, of `resources`.
/// Ids outside the collection are ignored.
pub fn selectable_tags(c: &Collection, resources: &ResourceSet, candidates: &TagSet) -> TagSet {
    selectable_from(c, resources, candidates.iter())
}

/// Like [`selectable_tags`], paired with `|resources ∩ inverted[t]|` for
/// every selectable tag, in ascending tag order.
pub fn selectable_counts(
    c: &Collection,
    resources: &ResourceSet,
    candidates: &TagSet,
) -> Vec<(TagId, u64)> {
    counts_from(c, resources, candidates.iter()).collect()
}

fn counts_from<'a>(
    c: &'a Collection,
    resources: &'a ResourceSet,
    candidates: impl Iterator<Item = TagId> + 'a,
) -> impl Iterator<Item = (TagId, u64)> + 'a {
    let total = resources.len();
    // with at most one resource nothing can be "some but not all"
    let live = total > 1;
    candidates
        .take_while(move |_| live)
        .filter(move |&t| c.is_valid_tag(t))
        .filter_map(move |t| {
            let n = resources.intersection_len(c.postings(t));
            (n > 0 && n < total).then_some((t, n))
        })
}

pub(crate) fn selectable_from(
    c: &Collection,
    resources: &ResourceSet,
    candidates: impl Iterator<Item = TagId>,
) -> TagSet {
    TagSet::from_sorted(counts_from(c, resources, candidates).map(|(t, _)| t))
}

/// Initial state: no active tags, every resource, every tag that can
/// narrow the collection.
pub fn init_state(c: &Collection) -> BrowsingState {
    let filtered = c.resources().clone();
    let selectable = selectable_tags(c, &filtered, c.tags());
    BrowsingState {
        active: TagSet::new(),
        active_order: Vec::new(),
        filtered: Arc::new(filtered),
        selectable: Arc::new(selectable),
    }
}

/// New filtered resources after `action`: a single filter step for an add,
/// a full query over the remaining active tags for a remove.
pub(crate) fn next_filtered(
    c: &Collection,
    state: &BrowsingState,
    action: UserAction,
    next_active: &TagSet,
) -> ResourceSet {
    match action {
        UserAction::Add(t) => state.filtered.intersection(c.postings(t)),
        UserAction::Remove(_) => query(c, next_active).expect("active tags are valid"),
        UserAction::End => (*state.filtered).clone(),
    }
}

/// New selectable tags after `action`. An add only re-examines the
/// previously selectable tags (minus the added one); a remove examines every
/// inactive tag.
pub(crate) fn next_selectable(
    c: &Collection,
    state: &BrowsingState,
    action: UserAction,
    next_active: &TagSet,
    next_filtered: &ResourceSet,
) -> TagSet {
    match action {
        UserAction::Add(t) => {
            selectable_from(c, next_filtered, state.selectable.iter().filter(|&x| x != t))
        }
        UserAction::Remove(_) => selectable_from(
            c,
            next_filtered,
            c.tags().iter().filter(|&x| !next_active.contains(x)),
        ),
        UserAction::End => (*state.selectable).clone(),
    }
}

/// Applies `action` without any cache.
pub fn apply_action_uncached(
    c: &Collection,
    state: &BrowsingState,
    action: UserAction,
) -> Result<BrowsingState> {
    state.validate(c, action)?;
    if action == UserAction::End {
        return Ok(state.clone());
    }
    let (active, order) = state.next_active(action);
    let filtered = next_filtered(c, state, action, &active);
    let selectable = next_selectable(c, state, action, &active, &filtered);
    Ok(BrowsingState::from_parts(
        active,
        order,
        Arc::new(filtered),
        Arc::new(selectable),
    ))
}

/// Recomputes the state for `active_order` from scratch, with no
/// incremental shortcuts.
pub fn state_from_scratch(c: &Collection, active_order: &[TagId]) -> Result<BrowsingState> {
    let active: TagSet = active_order.iter().copied().collect();
    let filtered = query(c, &active)?;
    let pool = c.tags().difference(&active);
    let selectable = selectable_tags(c, &filtered, &pool);
    Ok(BrowsingState::from_parts(
        active,
        active_order.to_vec(),
        Arc::new(filtered),
        Arc::new(selectable),
    ))
}
