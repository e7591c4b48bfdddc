use serde::{Deserialize, Serialize};

/// One extracted value and the extractor's confidence in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityValue {
    pub value: String,
    pub confidence: f64,
}

impl EntityValue {
    pub fn new(value: impl Into<String>, confidence: f64) -> Self {
        Self {
            value: value.into(),
            confidence,
        }
    }
}

/// Per-entity optional values, aligned with the run's schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityValues(pub Vec<Option<EntityValue>>);

impl EntityValues {
    pub fn empty(n_entities: usize) -> Self {
        Self(vec![None; n_entities])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> Option<&EntityValue> {
        self.0[j].as_ref()
    }

    pub fn set(&mut self, j: usize, value: Option<EntityValue>) {
        self.0[j] = value;
    }

    /// Confidence, or zero when absent.
    pub fn confidence(&self, j: usize) -> f64 {
        self.get(j).map_or(0.0, |v| v.confidence)
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<&EntityValue>> {
        self.0.iter().map(Option::as_ref)
    }
}

/// Extracted values plus, per entity, the token positions that voted for the
/// reported value.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub values: EntityValues,
    pub positions: Vec<Vec<usize>>,
}
