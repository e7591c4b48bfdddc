//! The base extractor: a maximum-entropy token tagger whose per-tag votes are
//! reduced to one value per entity by taking the mode.

mod softmax;
mod values;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, EntitySchema, GoldAnnotation, ValueKind};
use crate::error::{Error, Result};
use crate::text::{
    document_features, is_number_word, is_ordinal_word, normalize_numeric, tokenize, Lexicons,
};
use crate::util::fnv1a;

pub use softmax::{argmax, softmax_in_place, SgdConfig, SoftmaxRegression, SparseInput};
pub use values::{EntityValue, EntityValues, Extraction};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Maps feature names to buckets of a fixed-size weight table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureHasher {
    pub dimension: usize,
    pub seed: u64,
}

impl FeatureHasher {
    pub fn index(&self, name: &str) -> usize {
        (fnv1a(self.seed, name.as_bytes()) % self.dimension as u64) as usize
    }

    /// Colliding names add up in the same bucket.
    pub fn hash_all<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> SparseInput {
        let mut buckets: BTreeMap<usize, f64> = BTreeMap::new();
        for n in names {
            *buckets.entry(self.index(n)).or_default() += 1.0;
        }
        buckets.into_iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaxentConfig {
    /// Hashed feature space size.
    pub dimension: usize,
    pub hash_seed: u64,
    /// Context window radius for neighbour features.
    pub window: usize,
    pub l2: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MaxentConfig {
    fn default() -> Self {
        Self {
            dimension: 1 << 18,
            hash_seed: 0,
            window: 4,
            l2: 1e-4,
            learning_rate: 0.5,
            epochs: 30,
            batch_size: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub epochs: usize,
    pub seed: u64,
    pub n_tokens: usize,
    pub losses: Vec<f64>,
}

/// Trained tagger. Immutable once built; tagging is reentrant.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxentModel {
    schema: EntitySchema,
    hasher: FeatureHasher,
    window: usize,
    lexicons: Lexicons,
    classifier: SoftmaxRegression,
    l2: f64,
    training: TrainingSummary,
}

/// Per-token tag labels from gold values: every occurrence of a gold span
/// (compared after numeric normalization) takes that entity's tag, and for
/// person names so does any single name token. Earlier schema entries win
/// overlaps; everything else is `Other` (index `schema.len()`).
pub fn label_tokens(tokens: &[String], gold: &GoldAnnotation, schema: &EntitySchema) -> Vec<usize> {
    let other = schema.len();
    let keys: Vec<String> = tokens.iter().map(|t| normalize_numeric(t)).collect();
    let mut labels = vec![other; tokens.len()];
    for j in 0..schema.len() {
        for value in gold.values(j) {
            let span: Vec<String> = tokenize(value)
                .iter()
                .map(|t| normalize_numeric(t))
                .collect();
            if span.is_empty() || span.len() > keys.len() {
                continue;
            }
            for start in 0..=keys.len() - span.len() {
                if keys[start..start + span.len()] == span[..] {
                    for l in &mut labels[start..start + span.len()] {
                        if *l == other {
                            *l = j;
                        }
                    }
                }
            }
            if schema.kind(j) == ValueKind::PersonName && span.len() > 1 {
                for (i, key) in keys.iter().enumerate() {
                    let capitalized = tokens[i].chars().next().is_some_and(char::is_uppercase);
                    if capitalized && span.contains(key) && labels[i] == other {
                        labels[i] = j;
                    }
                }
            }
        }
    }
    labels
}

/// Token surface with spelled-out numbers replaced by digits.
fn canonical_surface(token: &str) -> String {
    if is_number_word(token) || is_ordinal_word(token) {
        normalize_numeric(token)
    } else {
        token.to_string()
    }
}

/// Reduces per-token tag distributions to one value per entity.
///
/// Each token whose argmax tag is entity `j` votes for its normalized form.
/// The winner has the most votes, then the higher mean winning-tag
/// probability, then the lexicographically smaller key. The reported value is
/// the same-tag run around the winner's first vote, so multi-token names
/// survive; confidence is the mean probability over the winner's votes.
pub fn aggregate_votes(
    tokens: &[String],
    distributions: &[Vec<f64>],
    n_entities: usize,
) -> Extraction {
    debug_assert_eq!(tokens.len(), distributions.len());
    let tags: Vec<usize> = distributions.iter().map(|d| argmax(d)).collect();
    let mut values = EntityValues::empty(n_entities);
    let mut positions = vec![Vec::new(); n_entities];
    for j in 0..n_entities {
        // key -> (positions, probability sum)
        let mut votes: BTreeMap<String, (Vec<usize>, f64)> = BTreeMap::new();
        for (i, &t) in tags.iter().enumerate() {
            if t == j {
                let e = votes.entry(normalize_numeric(&tokens[i])).or_default();
                e.0.push(i);
                e.1 += distributions[i][j];
            }
        }
        let best = votes.iter().max_by(|(ka, (pa, sa)), (kb, (pb, sb))| {
            let (ma, mb) = (sa / pa.len() as f64, sb / pb.len() as f64);
            pa.len()
                .cmp(&pb.len())
                .then(ma.total_cmp(&mb))
                .then(kb.cmp(ka))
        });
        if let Some((_, (pos, sum))) = best {
            let first = pos[0];
            let mut lo = first;
            while lo > 0 && tags[lo - 1] == j {
                lo -= 1;
            }
            let mut hi = first + 1;
            while hi < tags.len() && tags[hi] == j {
                hi += 1;
            }
            let surface = tokens[lo..hi]
                .iter()
                .map(|t| canonical_surface(t))
                .collect::<Vec<_>>()
                .join(" ");
            let confidence = (sum / pos.len() as f64).clamp(0.0, 1.0);
            values.set(j, Some(EntityValue::new(surface, confidence)));
            positions[j] = pos.clone();
        }
    }
    Extraction { values, positions }
}

impl MaxentModel {
    pub fn schema(&self) -> &EntitySchema {
        &self.schema
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn lexicons(&self) -> &Lexicons {
        &self.lexicons
    }

    pub fn classifier(&self) -> &SoftmaxRegression {
        &self.classifier
    }

    pub fn training(&self) -> &TrainingSummary {
        &self.training
    }

    /// A model with all-zero weights; every token gets the uniform distribution.
    pub fn untrained(schema: EntitySchema, lexicons: Lexicons, config: &MaxentConfig) -> Self {
        let n_tags = schema.len() + 1;
        Self {
            schema,
            hasher: FeatureHasher {
                dimension: config.dimension,
                seed: config.hash_seed,
            },
            window: config.window,
            lexicons,
            classifier: SoftmaxRegression::zeros(config.dimension, n_tags),
            l2: config.l2,
            training: TrainingSummary {
                epochs: 0,
                seed: config.seed,
                n_tokens: 0,
                losses: Vec::new(),
            },
        }
    }

    fn encode(&self, tokens: &[String]) -> Vec<SparseInput> {
        document_features(tokens, self.window, &self.lexicons)
            .iter()
            .map(|f| self.hasher.hash_all(f.iter()))
            .collect()
    }

    /// Tag distribution per token of a raw token sequence.
    pub fn tag_sequence(&self, tokens: &[String]) -> Vec<Vec<f64>> {
        self.encode(tokens)
            .iter()
            .map(|x| self.classifier.probabilities(x))
            .collect()
    }

    /// Tag distribution for every token of the document (title, then body).
    pub fn tag_tokens(&self, doc: &Document) -> Vec<Vec<f64>> {
        self.tag_sequence(&doc.tokens())
    }

    pub fn extract_entities(&self, doc: &Document) -> Extraction {
        let tokens = doc.tokens();
        let dists = self.tag_sequence(&tokens);
        aggregate_votes(&tokens, &dists, self.schema.len())
    }
}

/// Trains the tagger on source documents labelled from their gold values.
pub fn train_maxent<'a, I>(
    examples: I,
    schema: &EntitySchema,
    lexicons: &Lexicons,
    config: &MaxentConfig,
) -> Result<MaxentModel>
where
    I: IntoIterator<Item = (&'a Document, &'a GoldAnnotation)>,
{
    if config.dimension == 0 {
        return Err(Error::Config("feature dimension must be positive".into()));
    }
    let mut model = MaxentModel::untrained(schema.clone(), lexicons.clone(), config);
    let mut data: Vec<(SparseInput, usize)> = Vec::new();
    for (doc, gold) in examples {
        let tokens = doc.tokens();
        let labels = label_tokens(&tokens, gold, schema);
        data.extend(model.encode(&tokens).into_iter().zip(labels));
    }
    if data.is_empty() {
        return Err(Error::Validation("maxent training corpus is empty".into()));
    }
    for j in 0..schema.len() {
        if !data.iter().any(|(_, y)| *y == j) {
            log::warn!("no training tokens labelled {}", schema.name(j));
        }
    }
    let sgd = SgdConfig {
        learning_rate: config.learning_rate,
        l2: config.l2,
        epochs: config.epochs,
        batch_size: config.batch_size,
        seed: config.seed,
    };
    let losses = model.classifier.fit(&data, &sgd)?;
    log::info!(
        "maxent trained on {} tokens, final loss {:.5}",
        data.len(),
        losses.last().copied().unwrap_or(f64::NAN)
    );
    model.training = TrainingSummary {
        epochs: config.epochs,
        seed: config.seed,
        n_tokens: data.len(),
        losses,
    };
    Ok(model)
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    schema: EntitySchema,
    hasher: FeatureHasher,
    window: usize,
    l2: f64,
    tags: Vec<String>,
    training: TrainingSummary,
    lexicons: Lexicons,
    bias: Vec<f64>,
    weights: Vec<f64>,
}

impl MaxentModel {
    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            schema: self.schema.clone(),
            hasher: self.hasher,
            window: self.window,
            l2: self.l2,
            tags: self.schema.tags(),
            training: self.training.clone(),
            lexicons: self.lexicons.clone(),
            bias: self.classifier.bias().to_vec(),
            weights: self.classifier.weights().to_vec(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let version = serde_json::from_str::<serde_json::Value>(text)?
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Validation("model file lacks format_version".into()))?;
        if version != u64::from(MODEL_FORMAT_VERSION) {
            return Err(Error::VersionMismatch {
                what: "maxent model",
                expected: MODEL_FORMAT_VERSION,
                found: version as u32,
            });
        }
        let file: ModelFile = serde_json::from_str(text)?;
        if file.tags != file.schema.tags() {
            return Err(Error::Validation(
                "model tag list disagrees with its schema".into(),
            ));
        }
        let classifier = SoftmaxRegression::from_parts(
            file.hasher.dimension,
            file.schema.len() + 1,
            file.weights,
            file.bias,
        )?;
        Ok(Self {
            schema: file.schema,
            hasher: file.hasher,
            window: file.window,
            lexicons: file.lexicons,
            classifier,
            l2: file.l2,
            training: file.training,
        })
    }
}
