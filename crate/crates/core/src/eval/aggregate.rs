use std::collections::HashMap;

use super::value_correct;
use crate::corpus::{EntitySchema, GoldAnnotation};
use crate::extractor::{EntityValue, EntityValues};
use crate::text::normalize_value;

/// Threshold values tried when tuning the similarity filter.
pub const DEFAULT_TAU_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95];

/// Values extracted from one retrieved article, with the article's tf-idf
/// similarity to the source.
#[derive(Debug, Clone, PartialEq)]
pub struct ArticleExtraction {
    pub values: EntityValues,
    pub similarity: f64,
}

fn survivors<'a>(
    source: &'a EntityValues,
    articles: &'a [ArticleExtraction],
    tau: f64,
) -> impl Iterator<Item = &'a EntityValues> {
    std::iter::once(source).chain(
        articles
            .iter()
            .filter(move |a| a.similarity >= tau)
            .map(|a| &a.values),
    )
}

/// Per entity, the most confident value among the source and the articles
/// whose similarity reaches `tau`. Ties keep the earlier article, the source
/// first.
pub fn aggregate_confidence(
    source: &EntityValues,
    articles: &[ArticleExtraction],
    tau: f64,
) -> EntityValues {
    let mut out = source.clone();
    for values in survivors(source, articles, tau).skip(1) {
        for j in 0..out.len() {
            if let Some(v) = values.get(j) {
                if out.get(j).is_none_or(|cur| v.confidence > cur.confidence) {
                    out.set(j, Some(v.clone()));
                }
            }
        }
    }
    out
}

struct Tally {
    key: String,
    first_value: String,
    count: usize,
    total_confidence: f64,
}

/// Per entity, the most frequent normalized value among surviving articles.
/// Ties go to the higher summed confidence, then the smaller normalized
/// form. The reported string is the first one seen for the winning value;
/// its confidence is the winner's share of the votes.
pub fn aggregate_majority(
    source: &EntityValues,
    articles: &[ArticleExtraction],
    tau: f64,
) -> EntityValues {
    let n = source.len();
    let mut out = EntityValues::empty(n);
    for j in 0..n {
        let mut tallies: Vec<Tally> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut votes = 0usize;
        for values in survivors(source, articles, tau) {
            let Some(v) = values.get(j) else { continue };
            let key = normalize_value(&v.value);
            if key.is_empty() {
                continue;
            }
            votes += 1;
            let slot = *index.entry(key.clone()).or_insert_with(|| {
                tallies.push(Tally {
                    key,
                    first_value: v.value.clone(),
                    count: 0,
                    total_confidence: 0.0,
                });
                tallies.len() - 1
            });
            tallies[slot].count += 1;
            tallies[slot].total_confidence += v.confidence;
        }
        let best = tallies.iter().min_by(|a, b| {
            b.count
                .cmp(&a.count)
                .then_with(|| b.total_confidence.total_cmp(&a.total_confidence))
                .then_with(|| a.key.cmp(&b.key))
        });
        if let Some(t) = best {
            out.set(
                j,
                Some(EntityValue::new(
                    t.first_value.clone(),
                    t.count as f64 / votes as f64,
                )),
            );
        }
    }
    out
}

/// Perfect reconciliation: per entity, the first correct value found in the
/// source or any article; the source value when none is correct.
pub fn oracle_values(
    schema: &EntitySchema,
    source: &EntityValues,
    articles: &[ArticleExtraction],
    gold: &GoldAnnotation,
) -> EntityValues {
    let mut out = source.clone();
    for j in 0..schema.len() {
        let found = std::iter::once(source)
            .chain(articles.iter().map(|a| &a.values))
            .filter_map(|v| v.get(j))
            .find(|v| value_correct(schema.kind(j), Some(&v.value), gold.values(j)));
        if let Some(v) = found {
            out.set(j, Some(v.clone()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::shootings_schema;

    fn one(v: Option<(&str, f64)>) -> EntityValues {
        EntityValues(vec![v.map(|(s, c)| EntityValue::new(s, c))])
    }

    fn art(v: Option<(&str, f64)>, sim: f64) -> ArticleExtraction {
        ArticleExtraction {
            values: one(v),
            similarity: sim,
        }
    }

    #[test]
    fn tau_one_returns_source() {
        let src = one(Some(("3", 0.2)));
        let arts = [art(Some(("4", 0.9)), 0.99), art(Some(("4", 0.8)), 0.5)];
        assert_eq!(aggregate_confidence(&src, &arts, 1.0), src);
        assert_eq!(
            aggregate_majority(&src, &arts, 1.0).get(0).unwrap().value,
            "3"
        );
    }

    #[test]
    fn max_confidence_wins() {
        let src = one(Some(("a", 0.4)));
        let arts = [art(Some(("b", 0.9)), 0.3), art(Some(("c", 0.6)), 0.3)];
        assert_eq!(
            aggregate_confidence(&src, &arts, 0.0).get(0).unwrap().value,
            "b"
        );
    }

    #[test]
    fn majority_mode_and_ties() {
        let src = one(Some(("A", 0.1)));
        let arts = [art(Some(("a", 0.1)), 0.5), art(Some(("B", 0.9)), 0.5)];
        let m = aggregate_majority(&src, &arts, 0.0);
        assert_eq!(m.get(0).unwrap().value, "A");
        assert!((m.get(0).unwrap().confidence - 2.0 / 3.0).abs() < 1e-15);
        // 1-1 tie broken by summed confidence.
        let arts = [art(Some(("B", 0.9)), 0.5)];
        assert_eq!(
            aggregate_majority(&src, &arts, 0.0).get(0).unwrap().value,
            "B"
        );
        // Full tie broken by normalized form.
        let arts = [art(Some(("0", 0.1)), 0.5)];
        assert_eq!(
            aggregate_majority(&src, &arts, 0.0).get(0).unwrap().value,
            "0"
        );
    }

    #[test]
    fn absent_source_value_is_filled() {
        let src = one(None);
        let arts = [art(Some(("x", 0.1)), 0.0)];
        assert_eq!(
            aggregate_confidence(&src, &arts, 0.0).get(0).unwrap().value,
            "x"
        );
        assert!(aggregate_confidence(&src, &arts, 0.5).get(0).is_none());
    }

    #[test]
    fn oracle_finds_single_correct_article() {
        let schema = shootings_schema();
        let gold = GoldAnnotation {
            event_id: "e".into(),
            values: vec![
                vec!["Ann Lee".into()],
                vec!["6".into()],
                vec!["2".into()],
                vec!["Omaha".into()],
            ],
        };
        let v = |k: &str| EntityValues(vec![None, Some(EntityValue::new(k, 0.5)), None, None]);
        let arts = [
            ArticleExtraction {
                values: v("4"),
                similarity: 0.1,
            },
            ArticleExtraction {
                values: v("six"),
                similarity: 0.0,
            },
        ];
        let o = oracle_values(&schema, &v("5"), &arts, &gold);
        assert_eq!(o.get(1).unwrap().value, "six");
        let o = oracle_values(&schema, &v("5"), &arts[..1], &gold);
        assert_eq!(o.get(1).unwrap().value, "5");
    }
}
