use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::search::SearchEngine;
use super::templates::QueryTemplate;
use crate::corpus::io::{parse_line, DocumentLine, Line};
use crate::corpus::{Document, EventRecord, Role};
use crate::error::{Error, Result};
use crate::util::StableHasher;

/// Retrieved article queues, one per (event, template), as document ids in
/// rank order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodePool {
    pub k: usize,
    pub n_templates: usize,
    pub queues: BTreeMap<String, Vec<Vec<String>>>,
}

impl EpisodePool {
    pub fn queues(&self, event_id: &str) -> Option<&[Vec<String>]> {
        self.queues.get(event_id).map(Vec::as_slice)
    }

    pub fn n_events(&self) -> usize {
        self.queues.len()
    }

    pub fn n_queues(&self) -> usize {
        self.queues.values().map(Vec::len).sum()
    }

    /// Distinct ids across every queue of one event, in first-seen order
    /// (template-major).
    pub fn distinct_ids(&self, event_id: &str) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for q in self.queues(event_id).unwrap_or(&[]) {
            for id in q {
                if seen.insert(id.as_str()) {
                    out.push(id.as_str());
                }
            }
        }
        out
    }

    pub fn content_hash(&self) -> u64 {
        let mut h = StableHasher::new(self.k as u64 ^ ((self.n_templates as u64) << 32));
        for (event, queues) in &self.queues {
            h.write(event.as_bytes());
            for q in queues {
                h.write(&(q.len() as u64).to_le_bytes());
                for id in q {
                    h.write(id.as_bytes());
                }
            }
        }
        h.finish()
    }
}

/// Runs every template for every event against the engine, in parallel over
/// events.
pub fn build_pools(
    engine: &SearchEngine<'_>,
    events: &[EventRecord],
    templates: &[QueryTemplate],
    k: usize,
) -> EpisodePool {
    let docs = engine.documents();
    let queues = events
        .par_iter()
        .map(|e| {
            let per_template = templates
                .iter()
                .map(|t| {
                    engine
                        .search(t, &e.source, k)
                        .into_iter()
                        .map(|p| docs[p].id.clone())
                        .collect()
                })
                .collect();
            (e.event_id.clone(), per_template)
        })
        .collect();
    EpisodePool {
        k,
        n_templates: templates.len(),
        queues,
    }
}

/// Writes each queued document as a corpus line tagged with its event and
/// template index, queue by queue in rank order.
pub fn write_pools<W: Write>(
    pool: &EpisodePool,
    docs: &BTreeMap<&str, &Document>,
    mut out: W,
) -> Result<()> {
    for (event, queues) in &pool.queues {
        for (qi, q) in queues.iter().enumerate() {
            for id in q {
                let d = docs.get(id.as_str()).ok_or_else(|| {
                    Error::Validation(format!("pooled document {id} not in corpus"))
                })?;
                let mut line = DocumentLine::from(*d);
                line.role = Role::Downloaded;
                line.event_id = Some(event.clone());
                line.query_index = Some(qi);
                serde_json::to_writer(&mut out, &line)?;
                out.write_all(b"\n")
                    .map_err(|e| Error::Validation(e.to_string()))?;
            }
        }
    }
    Ok(())
}

/// Reads a pool file back. Events and template count come from the caller
/// since empty queues leave no lines behind.
pub fn read_pools<R: BufRead>(
    reader: R,
    event_ids: &[String],
    n_templates: usize,
    k: usize,
) -> Result<EpisodePool> {
    let mut queues: BTreeMap<String, Vec<Vec<String>>> = event_ids
        .iter()
        .map(|e| (e.clone(), vec![Vec::new(); n_templates]))
        .collect();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        let doc = match parse_line(&line, i + 1)? {
            Some(Line::Document(d)) => d,
            Some(Line::Annotation(..)) => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "annotation line in pool file".into(),
                })
            }
            None => continue,
        };
        let bad = |message: &str| Error::Parse {
            line: i + 1,
            message: message.to_string(),
        };
        let event = doc
            .event_id
            .ok_or_else(|| bad("pooled document without event_id"))?;
        let qi = doc
            .query_index
            .ok_or_else(|| bad("pooled document without query_index"))?;
        let slot = queues
            .get_mut(&event)
            .ok_or_else(|| bad("pooled document for unknown event"))?;
        let q = slot
            .get_mut(qi)
            .ok_or_else(|| bad("query_index out of range"))?;
        if q.len() >= k {
            return Err(bad("queue longer than k"));
        }
        q.push(doc.id);
    }
    Ok(EpisodePool {
        k,
        n_templates,
        queues,
    })
}
