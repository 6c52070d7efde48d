//! Tag-based browsing over annotated collections, with three ways of
//! updating the browsing state after each user action:
//!
//! * un-cached: recompute filtered resources and selectable tags every time;
//! * query-indexed cache: memoize both sets by the active tag set;
//! * resource-indexed cache: always recompute the filtered resources and
//!   memoize the selectable tags by them.
//!
//! The crate also ships a seeded session simulator and a timing harness
//! that replays identical traces under each strategy and compares their
//! cumulative update time.
//!
//! ```
//! use tagbrowse::{sample, Browser, Strategy, UserAction};
//!
//! let collection = sample::spanish_art();
//! let levant = collection.tag_id("Levant").unwrap();
//! let mut browser = Browser::new(&collection, Strategy::Resource);
//! browser.apply(UserAction::Add(levant)).unwrap();
//! assert_eq!(browser.state().filtered().len(), 2);
//! ```

pub mod bench;
pub mod browse;
pub mod cache;
pub mod collection;
mod error;
pub mod sample;
pub mod set;
pub mod simulator;
pub mod stats;
pub mod strategy;
pub mod synth;

pub use browse::{BrowsingState, StateDigest, UserAction};
pub use cache::{CacheConfig, CacheStats, QueryCache, ResourceCache};
pub use collection::{Collection, CollectionDocument, IngestReport, ResourceRecord};
pub use error::{Error, Result};
pub use set::{CanonicalKey, ResourceId, ResourceSet, TagId, TagSet};
pub use simulator::{SessionTrace, WalkModel};
pub use strategy::{Browser, Step, Strategy, StrategyCache, UpdateStrategy};
pub use synth::SynthParams;
