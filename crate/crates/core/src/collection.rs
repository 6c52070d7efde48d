//! Tag-annotated collections: ingestion, indexing and export.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::set::{ResourceId, ResourceSet, TagId, TagSet};

/// On-disk form of a collection.
///
/// The tag vocabulary is implicit: it is the union of every resource's
/// `tags` array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollectionDocument {
    pub name: String,
    pub resources: Vec<ResourceRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceRecord {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub uri: Option<String>,
    pub tags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tag {
    pub id: TagId,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resource {
    pub id: ResourceId,
    /// Identifier from the source document.
    pub key: String,
    pub label: String,
    pub payload_uri: Option<String>,
    pub tags: TagSet,
}

/// An immutable, indexed collection.
///
/// Resource ids follow document order. Tag ids follow the byte order of
/// the tag labels, so an exported document (tags sorted within each
/// resource) re-ingests with the same ids.
#[derive(Debug)]
pub struct Collection {
    name: String,
    tags: Vec<Tag>,
    resources: Vec<Resource>,
    inverted: Vec<ResourceSet>,
    tag_by_label: HashMap<String, TagId>,
    all_resources: ResourceSet,
    all_tags: TagSet,
    fingerprint: String,
}

/// Outcome details of an ingestion that did not prevent it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    /// Resources carrying no tag. They are only reachable from the
    /// initial browsing state.
    pub untagged: Vec<ResourceId>,
    /// Number of duplicate tag occurrences dropped within resources.
    pub duplicate_tags_dropped: usize,
}

impl IngestReport {
    pub fn has_warnings(&self) -> bool {
        !self.untagged.is_empty() || self.duplicate_tags_dropped > 0
    }
}

impl Collection {
    pub fn from_json_str(json: &str) -> Result<Self> {
        let doc: CollectionDocument = serde_json::from_str(json)?;
        Self::ingest(&doc).map(|(c, _)| c)
    }

    pub fn from_reader(reader: impl Read) -> Result<(Self, IngestReport)> {
        let doc: CollectionDocument = serde_json::from_reader(reader)?;
        Self::ingest(&doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, IngestReport)> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn ingest(doc: &CollectionDocument) -> Result<(Self, IngestReport)> {
        if doc.resources.is_empty() {
            return Err(Error::EmptyCollection);
        }

        let mut seen = HashSet::with_capacity(doc.resources.len());
        let mut vocabulary = BTreeSet::new();
        for record in &doc.resources {
            if !seen.insert(record.id.as_str()) {
                return Err(Error::DuplicateResource(record.id.clone()));
            }
            for label in &record.tags {
                if label.is_empty() {
                    return Err(Error::EmptyTagLabel(record.id.clone()));
                }
                vocabulary.insert(label.as_str());
            }
        }

        let tags: Vec<Tag> = vocabulary
            .into_iter()
            .enumerate()
            .map(|(i, label)| Tag {
                id: TagId(i as u32),
                label: label.to_owned(),
            })
            .collect();
        let tag_by_label: HashMap<String, TagId> =
            tags.iter().map(|t| (t.label.clone(), t.id)).collect();

        let mut report = IngestReport::default();
        let mut postings: Vec<Vec<ResourceId>> = vec![Vec::new(); tags.len()];
        let mut resources = Vec::with_capacity(doc.resources.len());
        for (i, record) in doc.resources.iter().enumerate() {
            let id = ResourceId(i as u32);
            let mut ids: Vec<TagId> = record.tags.iter().map(|l| tag_by_label[l]).collect();
            ids.sort_unstable();
            let before = ids.len();
            ids.dedup();
            report.duplicate_tags_dropped += before - ids.len();
            if ids.is_empty() {
                report.untagged.push(id);
            }
            for t in &ids {
                postings[t.0 as usize].push(id);
            }
            resources.push(Resource {
                id,
                key: record.id.clone(),
                label: record.label.clone(),
                payload_uri: record.uri.clone(),
                tags: TagSet::from_sorted(ids),
            });
        }
        // resources are visited in id order, so each posting list is sorted
        let inverted = postings.into_iter().map(ResourceSet::from_sorted).collect();

        let mut collection = Collection {
            name: doc.name.clone(),
            all_resources: ResourceSet::full(resources.len() as u32),
            all_tags: TagSet::full(tags.len() as u32),
            tags,
            resources,
            inverted,
            tag_by_label,
            fingerprint: String::new(),
        };
        collection.fingerprint = collection.compute_fingerprint();
        Ok((collection, report))
    }

    /// Export in document form: resources by dense id, tags sorted within
    /// each resource.
    pub fn to_document(&self) -> CollectionDocument {
        CollectionDocument {
            name: self.name.clone(),
            resources: self
                .resources
                .iter()
                .map(|r| ResourceRecord {
                    id: r.key.clone(),
                    label: r.label.clone(),
                    uri: r.payload_uri.clone(),
                    tags: r.tags.iter().map(|t| self.tag_label(t).to_owned()).collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document serializes")
    }

    fn compute_fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(&self.to_document()).expect("document serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Hex SHA-256 of the compact exported document.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn n_resources(&self) -> usize {
        self.resources.len()
    }

    pub fn n_tags(&self) -> usize {
        self.tags.len()
    }

    /// Every resource in the collection.
    pub fn resources(&self) -> &ResourceSet {
        &self.all_resources
    }

    /// Every tag in the collection.
    pub fn tags(&self) -> &TagSet {
        &self.all_tags
    }

    pub fn tag_list(&self) -> &[Tag] {
        &self.tags
    }

    pub fn resource_list(&self) -> &[Resource] {
        &self.resources
    }

    pub fn resource(&self, id: ResourceId) -> Option<&Resource> {
        self.resources.get(id.0 as usize)
    }

    pub fn tag(&self, id: TagId) -> Option<&Tag> {
        self.tags.get(id.0 as usize)
    }

    /// Label of a tag id. Panics on an id outside this collection.
    pub fn tag_label(&self, id: TagId) -> &str {
        &self.tags[id.0 as usize].label
    }

    pub fn tag_id(&self, label: &str) -> Option<TagId> {
        self.tag_by_label.get(label).copied()
    }

    pub fn require_tag(&self, label: &str) -> Result<TagId> {
        self.tag_id(label)
            .ok_or_else(|| Error::UnknownTagLabel(label.to_owned()))
    }

    pub fn is_valid_tag(&self, id: TagId) -> bool {
        (id.0 as usize) < self.tags.len()
    }

    /// Resources annotated with `tag`.
    pub fn inverted(&self, tag: TagId) -> Result<&ResourceSet> {
        self.inverted.get(tag.0 as usize).ok_or(Error::UnknownTag(tag))
    }

    pub(crate) fn postings(&self, tag: TagId) -> &ResourceSet {
        &self.inverted[tag.0 as usize]
    }

    pub fn ingest_report(&self) -> IngestReport {
        IngestReport {
            untagged: self
                .resources
                .iter()
                .filter(|r| r.tags.is_empty())
                .map(|r| r.id)
                .collect(),
            duplicate_tags_dropped: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    fn record(id: &str, tags: &[&str]) -> ResourceRecord {
        ResourceRecord {
            id: id.into(),
            label: id.into(),
            uri: None,
            tags: tags.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn doc(resources: Vec<ResourceRecord>) -> CollectionDocument {
        CollectionDocument {
            name: "t".into(),
            resources,
        }
    }

    #[test]
    fn spanish_art_counts() {
        let c = sample::spanish_art();
        assert_eq!(c.n_resources(), 6);
        assert_eq!(c.n_tags(), 11);
        assert!(c.tag_id("Prehistoric").is_some());
        assert!(c.tag_id("Protohistoric").is_some());
        assert_eq!(c.resources().len(), 6);
        assert_eq!(c.tags().len(), 11);
    }

    #[test]
    fn levant_postings() {
        let c = sample::spanish_art();
        let levant = c.tag_id("Levant").unwrap();
        let keys: Vec<&str> = c
            .inverted(levant)
            .unwrap()
            .iter()
            .map(|r| c.resource(r).unwrap().key.as_str())
            .collect();
        assert_eq!(keys, ["r2", "r6"]);
    }

    #[test]
    fn empty_collection_rejected() {
        assert!(matches!(
            Collection::ingest(&doc(vec![])),
            Err(Error::EmptyCollection)
        ));
    }

    #[test]
    fn duplicate_resource_rejected() {
        let d = doc(vec![record("a", &["x"]), record("a", &["y"])]);
        assert!(matches!(
            Collection::ingest(&d),
            Err(Error::DuplicateResource(id)) if id == "a"
        ));
    }

    #[test]
    fn empty_label_rejected() {
        let d = doc(vec![record("a", &["x", ""])]);
        assert!(matches!(Collection::ingest(&d), Err(Error::EmptyTagLabel(_))));
    }

    #[test]
    fn untagged_resource_flagged() {
        let d = doc(vec![record("a", &["x"]), record("b", &[])]);
        let (c, report) = Collection::ingest(&d).unwrap();
        assert_eq!(report.untagged, vec![ResourceId(1)]);
        assert!(report.has_warnings());
        assert_eq!(c.ingest_report().untagged, vec![ResourceId(1)]);
        assert_eq!(c.n_resources(), 2);
    }

    #[test]
    fn duplicate_tags_within_resource_deduplicated() {
        let d = doc(vec![record("a", &["x", "x", "y"])]);
        let (c, report) = Collection::ingest(&d).unwrap();
        assert_eq!(report.duplicate_tags_dropped, 1);
        assert_eq!(c.resource(ResourceId(0)).unwrap().tags.len(), 2);
    }

    #[test]
    fn labels_are_case_sensitive() {
        let d = doc(vec![record("a", &["Levant", "levant"])]);
        let (c, _) = Collection::ingest(&d).unwrap();
        assert_eq!(c.n_tags(), 2);
    }

    #[test]
    fn single_resource_collection() {
        let (c, _) = Collection::ingest(&doc(vec![record("only", &["t"])])).unwrap();
        assert_eq!(c.resources().iter().collect::<Vec<_>>(), [ResourceId(0)]);
        assert_eq!(c.tags().iter().collect::<Vec<_>>(), [TagId(0)]);
    }

    #[test]
    fn export_sorts_tags_and_round_trips() {
        let d = doc(vec![record("b", &["zeta", "alpha"]), record("a", &["mid"])]);
        let (c, _) = Collection::ingest(&d).unwrap();
        let exported = c.to_document();
        assert_eq!(exported.resources[0].tags, ["alpha", "zeta"]);
        assert_eq!(exported.resources[0].id, "b");
        let (again, _) = Collection::ingest(&exported).unwrap();
        assert_eq!(again.to_document(), exported);
        assert_eq!(again.fingerprint(), c.fingerprint());
    }

    #[test]
    fn malformed_json_is_an_error() {
        assert!(matches!(
            Collection::from_json_str("{\"name\": 3}"),
            Err(Error::Json(_))
        ));
    }
}
