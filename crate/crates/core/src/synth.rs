//! Seeded synthetic collections with Zipf-like tag popularity.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::collection::{Collection, CollectionDocument, ResourceRecord};
use crate::error::{Error, Result};

/// Parameters of [`generate_synthetic_collection`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthParams {
    pub n_resources: usize,
    pub n_tags: usize,
    /// Target mean number of tags per resource (each resource gets at least one).
    pub mean_tags_per_resource: f64,
    /// Zipf exponent of tag popularity; 0 means uniform.
    pub skew: f64,
    pub seed: u64,
    /// Fan-out of an optional tag hierarchy; 0 keeps tags independent.
    ///
    /// With fan-out `b > 0`, tags `0..b` are roots and tag `i >= b` is a
    /// child of tag `i / b - 1`. A resource annotated with a tag is also
    /// annotated with all of that tag's ancestors, so every child tag
    /// implies its parent, as element-value pairs of a hierarchical
    /// cataloguing schema do.
    pub hierarchy_fanout: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_resources: 2060,
            n_tags: 300,
            mean_tags_per_resource: 6.0,
            skew: 1.0,
            seed: 42,
            hierarchy_fanout: 0,
        }
    }
}

impl SynthParams {
    /// Default shape with a tag hierarchy of fan-out 4.
    pub fn hierarchical() -> Self {
        SynthParams {
            hierarchy_fanout: 4,
            ..Self::default()
        }
    }

    fn parent(&self, tag: usize) -> Option<usize> {
        let b = self.hierarchy_fanout;
        (b > 0 && tag >= b).then(|| tag / b - 1)
    }
}

/// Builds the document of a synthetic collection.
///
/// Tag `i` in popularity order is labelled `tag0000i` (zero-padded) and has
/// weight `1 / (i + 1)^skew`. Resource tag counts are `1 + Poisson(mean - 1)`,
/// capped at the vocabulary size; tags are drawn by weight without
/// replacement. With a hierarchy, ancestors of the drawn tags are added on
/// top of that count.
pub fn synthetic_document(params: &SynthParams) -> Result<CollectionDocument> {
    if params.n_resources == 0 || params.n_tags == 0 {
        return Err(Error::InvalidArgument(
            "synthetic collections need at least one resource and one tag".into(),
        ));
    }
    if params.mean_tags_per_resource.is_nan() || params.mean_tags_per_resource <= 0.0 || params.skew.is_nan() || params.skew < 0.0 {
        return Err(Error::InvalidArgument(
            "mean tags per resource must be positive and skew non-negative".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let extra = if params.mean_tags_per_resource > 1.0 {
        Some(Poisson::new(params.mean_tags_per_resource - 1.0).map_err(|e| {
            Error::InvalidArgument(format!("tag count distribution: {e}"))
        })?)
    } else {
        None
    };
    let weights: Vec<f64> = (0..params.n_tags)
        .map(|i| ((i + 1) as f64).powf(-params.skew))
        .collect();
    let tag_width = digits(params.n_tags);
    let res_width = digits(params.n_resources);

    let mut resources = Vec::with_capacity(params.n_resources);
    for r in 0..params.n_resources {
        let k = 1 + extra.as_ref().map_or(0, |d| d.sample(&mut rng) as usize);
        let k = k.min(params.n_tags);
        let picked = index::sample_weighted(&mut rng, params.n_tags, |i| weights[i], k)
            .expect("weights are finite and positive");
        let mut picked = picked.into_vec();
        for i in 0..picked.len() {
            let mut t = picked[i];
            while let Some(p) = params.parent(t) {
                picked.push(p);
                t = p;
            }
        }
        picked.sort_unstable();
        picked.dedup();
        resources.push(ResourceRecord {
            id: format!("res{r:0res_width$}"),
            label: format!("Synthetic resource {r}"),
            uri: None,
            tags: picked
                .into_iter()
                .map(|t| format!("tag{t:0tag_width$}"))
                .collect(),
        });
    }

    Ok(CollectionDocument {
        name: if params.hierarchy_fanout == 0 {
            format!(
                "synthetic-n{}-t{}-m{}-s{}-seed{}",
                params.n_resources, params.n_tags, params.mean_tags_per_resource, params.skew, params.seed
            )
        } else {
            format!(
                "synthetic-n{}-t{}-m{}-s{}-b{}-seed{}",
                params.n_resources,
                params.n_tags,
                params.mean_tags_per_resource,
                params.skew,
                params.hierarchy_fanout,
                params.seed
            )
        },
        resources,
    })
}

/// Generates and ingests a synthetic collection. Tags that end up annotating
/// no resource never enter the vocabulary, so tag ids stay contiguous.
pub fn generate_synthetic_collection(params: &SynthParams) -> Result<Collection> {
    let doc = synthetic_document(params)?;
    Collection::ingest(&doc).map(|(c, _)| c)
}

fn digits(n: usize) -> usize {
    n.saturating_sub(1).max(1).to_string().len()
}
