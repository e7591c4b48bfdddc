//! Scoring rules, evaluation reports and the non-learned baselines.

mod aggregate;
mod meta;
mod report;

pub use aggregate::{
    aggregate_confidence, aggregate_majority, oracle_values, ArticleExtraction, DEFAULT_TAU_GRID,
};
pub use meta::{meta_labels, MetaClassifier};
pub use report::{evaluate, EvalReport};

use crate::corpus::{EntitySchema, GoldAnnotation, ValueKind};
use crate::extractor::EntityValues;
use crate::text::normalize_value;

fn name_tokens(value: &str) -> impl Iterator<Item = String> + '_ {
    value.split_whitespace().map(str::to_lowercase)
}

/// Whether a predicted value counts as a correct extraction. Person names
/// need only share a token with some gold alternative; other kinds must
/// match exactly after normalization. Absent predictions and empty gold sets
/// are always wrong.
pub fn value_correct(kind: ValueKind, predicted: Option<&str>, gold: &[String]) -> bool {
    let Some(p) = predicted else { return false };
    gold.iter().any(|g| values_match(kind, Some(p), Some(g)))
}

/// Agreement between two extracted values, using the same rules as
/// [`value_correct`]. Absence on either side is a mismatch.
pub fn values_match(kind: ValueKind, a: Option<&str>, b: Option<&str>) -> bool {
    let (Some(a), Some(b)) = (a, b) else {
        return false;
    };
    match kind {
        ValueKind::PersonName => {
            let b: Vec<String> = name_tokens(b).collect();
            name_tokens(a).any(|t| b.contains(&t))
        }
        ValueKind::Numeric | ValueKind::Categorical => {
            let na = normalize_value(a);
            !na.is_empty() && na == normalize_value(b)
        }
    }
}

/// Per-entity correctness of a set of values against gold.
pub fn correctness(
    schema: &EntitySchema,
    values: &EntityValues,
    gold: &GoldAnnotation,
) -> Vec<bool> {
    (0..schema.len())
        .map(|j| {
            value_correct(
                schema.kind(j),
                values.get(j).map(|v| v.value.as_str()),
                gold.values(j),
            )
        })
        .collect()
}

/// Number of correct entities, as a real for reward arithmetic.
pub fn accuracy_sum(schema: &EntitySchema, values: &EntityValues, gold: &GoldAnnotation) -> f64 {
    correctness(schema, values, gold)
        .into_iter()
        .filter(|&c| c)
        .count() as f64
}
