use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate_confidence, ArticleExtraction};
use super::correctness;
use crate::corpus::{EntitySchema, EventRecord, GoldAnnotation};
use crate::error::Result;
use crate::extractor::{EntityValues, SgdConfig, SoftmaxRegression, SparseInput};
use crate::mdp::{assemble_state, match_flags, Decision, FeatureCache};
use crate::retrieval::EpisodePool;

/// Training labels for one (source, article) pair: accept each entity the
/// article gets right and the source gets wrong, or reject everything when
/// there is no such entity.
pub fn meta_labels(
    schema: &EntitySchema,
    source: &EntityValues,
    article: &EntityValues,
    gold: &GoldAnnotation,
) -> Vec<Decision> {
    let src = correctness(schema, source, gold);
    let art = correctness(schema, article, gold);
    let labels: Vec<Decision> = (0..schema.len())
        .filter(|&j| art[j] && !src[j])
        .map(Decision::AcceptEntity)
        .collect();
    if labels.is_empty() {
        vec![Decision::RejectAll]
    } else {
        labels
    }
}

fn dense(state: &[f64]) -> SparseInput {
    state
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, &v)| (i, v))
        .collect()
}

/// Per-article decision classifier over the agent's state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaClassifier {
    pub n_entities: usize,
    pub classifier: SoftmaxRegression,
}

impl MetaClassifier {
    fn state(
        schema: &EntitySchema,
        cache: &FeatureCache,
        source_id: &str,
        article_id: &str,
    ) -> Vec<f64> {
        let n = schema.len();
        let src = &cache.get(source_id).values;
        let art = cache.get(article_id);
        let cur: Vec<f64> = (0..n).map(|j| src.confidence(j)).collect();
        let new: Vec<f64> = (0..n).map(|j| art.values.confidence(j)).collect();
        let m = match_flags(schema, src, &art.values);
        assemble_state(
            &cur,
            &new,
            &m,
            &art.context,
            cache.similarity(source_id, article_id),
        )
    }

    pub fn train(
        schema: &EntitySchema,
        events: &[&EventRecord],
        pools: &EpisodePool,
        cache: &FeatureCache,
        config: &SgdConfig,
    ) -> Result<Self> {
        let n = schema.len();
        let mut data: Vec<(SparseInput, usize)> = Vec::new();
        for e in events {
            let src = &cache.get(&e.source.id).values;
            for id in pools.distinct_ids(&e.event_id) {
                let x = dense(&Self::state(schema, cache, &e.source.id, id));
                for label in meta_labels(schema, src, &cache.get(id).values, &e.gold) {
                    data.push((x.clone(), label.index(n)));
                }
            }
        }
        let dim = 4 * n + cache.context_dim() + 1;
        let mut classifier = SoftmaxRegression::zeros(dim, Decision::count(n));
        if !data.is_empty() {
            classifier.fit(&data, config)?;
        }
        Ok(Self {
            n_entities: n,
            classifier,
        })
    }

    pub fn decide(&self, state: &[f64]) -> Decision {
        Decision::from_index(self.classifier.predict(&dense(state)), self.n_entities)
    }

    /// Classifies every pooled article independently, then keeps the most
    /// confident value among the source's and the accepted ones.
    pub fn run(
        &self,
        schema: &EntitySchema,
        event: &EventRecord,
        pools: &EpisodePool,
        cache: &FeatureCache,
    ) -> EntityValues {
        let src = &cache.get(&event.source.id).values;
        let accepted: Vec<ArticleExtraction> = pools
            .distinct_ids(&event.event_id)
            .into_iter()
            .map(|id| {
                let d = self.decide(&Self::state(schema, cache, &event.source.id, id));
                let art = &cache.get(id).values;
                let values = EntityValues(
                    (0..schema.len())
                        .map(|j| art.get(j).filter(|_| d.accepts(j)).cloned())
                        .collect(),
                );
                ArticleExtraction {
                    values,
                    similarity: 1.0,
                }
            })
            .collect();
        aggregate_confidence(src, &accepted, 0.0)
    }
}
