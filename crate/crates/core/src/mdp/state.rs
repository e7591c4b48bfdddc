use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::ContextMode;
use crate::corpus::{Document, EntitySchema, EventRecord};
use crate::eval::values_match;
use crate::extractor::{label_tokens, EntityValues, Extraction};
use crate::text::{cosine, is_word, TfIdfVectorizer};

/// Fixed word list whose counts near extracted values form the context
/// block of the state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextVocabulary {
    pub words: Vec<String>,
    pub window: usize,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl ContextVocabulary {
    pub fn new(words: Vec<String>, window: usize) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Self {
            words,
            window,
            index,
        }
    }

    /// The `size` most frequent words within `window` tokens of gold values
    /// in training documents; ties go to the alphabetically first word.
    pub fn from_training(
        events: &[&EventRecord],
        schema: &EntitySchema,
        window: usize,
        size: usize,
    ) -> Self {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for e in events {
            let tokens = e.source.tokens();
            let labels = label_tokens(&tokens, &e.gold, schema);
            let other = schema.len();
            for (i, t) in tokens.iter().enumerate() {
                if labels[i] != other || !is_word(t) {
                    continue;
                }
                let lo = i.saturating_sub(window);
                let hi = (i + window).min(tokens.len() - 1);
                if (lo..=hi).any(|p| labels[p] != other) {
                    *counts.entry(t.to_lowercase()).or_default() += 1;
                }
            }
        }
        let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self::new(
            ranked.into_iter().take(size).map(|(w, _)| w).collect(),
            window,
        )
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        if self.index.len() != self.words.len() {
            // Deserialized without the lookup table.
            return self.words.iter().position(|w| w == word);
        }
        self.index.get(word).copied()
    }

    /// Rebuilds the lookup table after deserialization.
    pub fn reindex(&mut self) {
        self.index = self
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
    }
}

/// Offsets of the state blocks: current confidences, new confidences, match
/// pairs, context, similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateLayout {
    pub n_entities: usize,
    pub context_dim: usize,
}

impl StateLayout {
    pub fn dim(&self) -> usize {
        4 * self.n_entities + self.context_dim + 1
    }

    pub fn current_conf(&self) -> std::ops::Range<usize> {
        0..self.n_entities
    }

    pub fn new_conf(&self) -> std::ops::Range<usize> {
        self.n_entities..2 * self.n_entities
    }

    pub fn matches(&self) -> std::ops::Range<usize> {
        2 * self.n_entities..4 * self.n_entities
    }

    pub fn context(&self) -> std::ops::Range<usize> {
        4 * self.n_entities..4 * self.n_entities + self.context_dim
    }

    pub fn similarity(&self) -> usize {
        self.dim() - 1
    }
}

/// Per-entity agreement between current and new values.
pub fn match_flags(schema: &EntitySchema, cur: &EntityValues, new: &EntityValues) -> Vec<bool> {
    (0..schema.len())
        .map(|j| {
            values_match(
                schema.kind(j),
                cur.get(j).map(|v| v.value.as_str()),
                new.get(j).map(|v| v.value.as_str()),
            )
        })
        .collect()
}

/// Lays out a state from already computed parts.
pub fn assemble_state(
    cur_conf: &[f64],
    new_conf: &[f64],
    matches: &[bool],
    context: &[f64],
    similarity: f64,
) -> Vec<f64> {
    assert_eq!(cur_conf.len(), new_conf.len());
    assert_eq!(cur_conf.len(), matches.len());
    let mut s = Vec::with_capacity(4 * matches.len() + context.len() + 1);
    s.extend_from_slice(cur_conf);
    s.extend_from_slice(new_conf);
    for &m in matches {
        if m {
            s.extend_from_slice(&[1.0, 0.0]);
        } else {
            s.extend_from_slice(&[0.0, 1.0]);
        }
    }
    s.extend_from_slice(context);
    s.push(similarity.clamp(0.0, 1.0));
    s
}

/// Context block for one document: counts of vocabulary words within the
/// window of each extracted value position (value tokens excluded),
/// optionally idf-weighted, scaled to unit length.
pub fn context_vector(
    tokens: &[String],
    positions: &[Vec<usize>],
    vocab: &ContextVocabulary,
    mode: ContextMode,
    vectorizer: &TfIdfVectorizer,
) -> Vec<f64> {
    let mut out = vec![0.0; vocab.len()];
    if mode == ContextMode::None || tokens.is_empty() {
        return out;
    }
    let is_value: std::collections::HashSet<usize> = positions.iter().flatten().copied().collect();
    for &p in positions.iter().flatten() {
        let lo = p.saturating_sub(vocab.window);
        let hi = (p + vocab.window).min(tokens.len() - 1);
        for (i, token) in tokens.iter().enumerate().take(hi + 1).skip(lo) {
            if is_value.contains(&i) {
                continue;
            }
            let word = token.to_lowercase();
            if let Some(k) = vocab.index_of(&word) {
                out[k] += match mode {
                    ContextMode::TfIdf => vectorizer.idf(&word),
                    _ => 1.0,
                };
            }
        }
    }
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        out.iter_mut().for_each(|x| *x /= norm);
    }
    out
}

/// Full state for one candidate article.
#[allow(clippy::too_many_arguments)]
pub fn build_state(
    schema: &EntitySchema,
    vocab: &ContextVocabulary,
    vectorizer: &TfIdfVectorizer,
    mode: ContextMode,
    cur: &EntityValues,
    new: &Extraction,
    new_doc: &Document,
    source_doc: &Document,
) -> Vec<f64> {
    let n = schema.len();
    let cur_conf: Vec<f64> = (0..n).map(|j| cur.confidence(j)).collect();
    let new_conf: Vec<f64> = (0..n).map(|j| new.values.confidence(j)).collect();
    let matches = match_flags(schema, cur, &new.values);
    let context = context_vector(&new_doc.tokens(), &new.positions, vocab, mode, vectorizer);
    let similarity = cosine(
        &vectorizer.vectorize(source_doc.token_iter()),
        &vectorizer.vectorize(new_doc.token_iter()),
    );
    assemble_state(&cur_conf, &new_conf, &matches, &context, similarity)
}
