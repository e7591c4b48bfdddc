use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::correctness;
use crate::corpus::{EntitySchema, EventRecord};
use crate::extractor::EntityValues;

/// Corpus-level accuracy per entity type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub system: String,
    pub entities: Vec<String>,
    pub accuracy: Vec<f64>,
    pub macro_accuracy: f64,
    pub n_events: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_steps: Option<f64>,
}

impl EvalReport {
    pub fn with_steps(mut self, mean_steps: f64) -> Self {
        self.mean_steps = Some(mean_steps);
        self
    }

    pub fn json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn table_header(&self) -> String {
        let mut s = format!("{:<24}", "system");
        for e in &self.entities {
            let _ = write!(s, " {e:>11}");
        }
        s.push_str("     macro  steps");
        s
    }

    pub fn table_row(&self) -> String {
        let mut s = format!("{:<24}", self.system);
        for a in &self.accuracy {
            let _ = write!(s, " {:>11.1}", 100.0 * a);
        }
        let _ = write!(s, " {:>9.1}", 100.0 * self.macro_accuracy);
        match self.mean_steps {
            Some(m) => {
                let _ = write!(s, " {m:>6.2}");
            }
            None => s.push_str("      -"),
        }
        s
    }

    pub fn table(&self) -> String {
        format!("{}\n{}", self.table_header(), self.table_row())
    }
}

/// Scores final values for every event. Panics when an event has no
/// prediction.
pub fn evaluate(
    system: &str,
    schema: &EntitySchema,
    events: &[&EventRecord],
    predictions: &BTreeMap<String, EntityValues>,
) -> EvalReport {
    let mut correct = vec![0usize; schema.len()];
    for e in events {
        let values = predictions
            .get(&e.event_id)
            .unwrap_or_else(|| panic!("no prediction for event {}", e.event_id));
        for (j, ok) in correctness(schema, values, &e.gold).into_iter().enumerate() {
            correct[j] += usize::from(ok);
        }
    }
    let n = events.len();
    let accuracy: Vec<f64> = correct
        .iter()
        .map(|&c| if n == 0 { 0.0 } else { c as f64 / n as f64 })
        .collect();
    let macro_accuracy = if accuracy.is_empty() {
        0.0
    } else {
        accuracy.iter().sum::<f64>() / accuracy.len() as f64
    };
    EvalReport {
        system: system.to_string(),
        entities: schema.entities().iter().map(|e| e.name.clone()).collect(),
        accuracy,
        macro_accuracy,
        n_events: n,
        mean_steps: None,
    }
}
