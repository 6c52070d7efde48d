//! Loads a collection from a JSON document and prints its inverted index.
//!
//! ```bash
//! cargo run -p tagbrowse --example load_collection -- path/to/collection.json
//! ```
//!
//! Without a path, a small inline document with one untagged resource and
//! one repeated tag is used, so the ingest warnings show up.

use tagbrowse::Collection;

const INLINE: &str = r#"{
  "name": "pottery",
  "resources": [
    {"id": "p1", "label": "Bell beaker", "tags": ["Beaker", "Copper-Age", "Beaker"]},
    {"id": "p2", "label": "Argaric cup", "tags": ["Argar", "Bronze-Age"]},
    {"id": "p3", "label": "Cogotas bowl", "tags": ["Cogotas", "Bronze-Age"]},
    {"id": "p4", "label": "Unsorted shard", "tags": []}
  ]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (c, report) = match std::env::args().nth(1) {
        Some(path) => Collection::load(path)?,
        None => Collection::from_reader(INLINE.as_bytes())?,
    };
    println!("{}: {} resources, {} tags", c.name(), c.n_resources(), c.n_tags());
    println!("fingerprint {}", c.fingerprint());
    if report.has_warnings() {
        println!("untagged: {:?}", report.untagged);
        println!("duplicate tags dropped: {}", report.duplicate_tags_dropped);
    }
    for tag in c.tag_list() {
        let keys: Vec<&str> = c.inverted(tag.id)?.iter().map(|r| c.resource(r).unwrap().key.as_str()).collect();
        println!("{:>12} -> {}", tag.label, keys.join(" "));
    }
    Ok(())
}
