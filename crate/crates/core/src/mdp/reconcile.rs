use serde::{Deserialize, Serialize};

use super::{Decision, Scheme};
use crate::corpus::{EntitySchema, GoldAnnotation};
use crate::eval::accuracy_sum;
use crate::extractor::{EntityValue, EntityValues};
use crate::text::normalize_value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tally {
    key: String,
    value: String,
    count: usize,
}

/// Vote counts per entity for majority reconciliation, in insertion order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Tallies(Vec<Vec<Tally>>);

impl Tallies {
    /// Tallies holding one vote for each present initial value.
    pub fn seeded(initial: &EntityValues) -> Self {
        let mut t = Tallies(vec![Vec::new(); initial.len()]);
        for j in 0..initial.len() {
            if let Some(v) = initial.get(j) {
                t.add(j, &v.value);
            }
        }
        t
    }

    fn add(&mut self, j: usize, value: &str) {
        let key = normalize_value(value);
        let entity = &mut self.0[j];
        match entity.iter_mut().find(|t| t.key == key) {
            Some(t) => t.count += 1,
            None => entity.push(Tally {
                key,
                value: value.to_string(),
                count: 1,
            }),
        }
    }

    /// Modal value (earliest inserted among equals) and its vote share.
    pub fn mode(&self, j: usize) -> Option<(&str, f64)> {
        let entity = &self.0[j];
        let total: usize = entity.iter().map(|t| t.count).sum();
        let mut best: Option<&Tally> = None;
        for t in entity {
            if best.is_none_or(|b| t.count > b.count) {
                best = Some(t);
            }
        }
        best.map(|t| (t.value.as_str(), t.count as f64 / total as f64))
    }

    pub fn count(&self, j: usize, value: &str) -> usize {
        let key = normalize_value(value);
        self.0[j]
            .iter()
            .find(|t| t.key == key)
            .map_or(0, |t| t.count)
    }
}

/// Merges newly extracted values into the current ones for the entities the
/// decision accepts. Panics on [`Decision::Stop`].
pub fn reconcile(
    cur: &EntityValues,
    new: &EntityValues,
    decision: Decision,
    scheme: Scheme,
    tallies: &mut Tallies,
) -> EntityValues {
    assert!(decision != Decision::Stop, "reconcile called with Stop");
    let mut out = cur.clone();
    for j in 0..cur.len() {
        if !decision.accepts(j) {
            continue;
        }
        let Some(nv) = new.get(j) else { continue };
        match scheme {
            Scheme::Replace => out.set(j, Some(nv.clone())),
            Scheme::Confidence => {
                if nv.confidence > cur.confidence(j) {
                    out.set(j, Some(nv.clone()));
                }
            }
            Scheme::Majority => {
                tallies.add(j, &nv.value);
                let (value, share) = tallies.mode(j).expect("tally just added");
                out.set(j, Some(EntityValue::new(value, share)));
            }
        }
    }
    out
}

/// Accuracy change between consecutive value sets plus the step penalty.
pub fn step_reward(
    schema: &EntitySchema,
    cur: &EntityValues,
    prev: &EntityValues,
    gold: &GoldAnnotation,
    penalty: f64,
) -> f64 {
    accuracy_sum(schema, cur, gold) - accuracy_sum(schema, prev, gold) + penalty
}
