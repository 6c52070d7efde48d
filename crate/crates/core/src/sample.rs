//! A built-in six-resource collection of Spanish prehistoric and
//! protohistoric art, handy for tests, examples and demos.

use crate::collection::Collection;

/// Source document of [`spanish_art`].
pub const SPANISH_ART_JSON: &str = include_str!("../data/spanish-art.json");

pub fn spanish_art() -> Collection {
    Collection::from_json_str(SPANISH_ART_JSON).expect("bundled collection is valid")
}
