use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{EntitySchema, EventRecord};
use crate::extractor::label_tokens;
use crate::text::{is_number_word, is_ordinal_word, is_word, StopWords};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateKind {
    TitleOnly,
    TitlePlusOrGroup,
}

/// `<title>` optionally broadened with a disjunction of context words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryTemplate {
    pub kind: TemplateKind,
    pub or_group: Vec<String>,
    pub bound_entity: Option<usize>,
}

impl QueryTemplate {
    pub fn title_only(bound_entity: Option<usize>) -> Self {
        Self {
            kind: TemplateKind::TitleOnly,
            or_group: Vec::new(),
            bound_entity,
        }
    }

    /// Query terms for a source title: title tokens plus the OR-group.
    pub fn terms(&self, title: &[String]) -> Vec<String> {
        title.iter().chain(&self.or_group).cloned().collect()
    }

    pub fn describe(&self) -> String {
        match self.kind {
            TemplateKind::TitleOnly => "<title>".to_string(),
            TemplateKind::TitlePlusOrGroup => format!("<title> + ({})", self.or_group.join(" | ")),
        }
    }
}

fn is_sentence_start(tokens: &[String], i: usize) -> bool {
    i == 0 || matches!(tokens[i - 1].as_str(), "." | "!" | "?" | ":" | ";")
}

/// Lowercased words seen capitalized away from a sentence start; a stand-in
/// for proper-noun detection without a part-of-speech tagger.
pub fn proper_noun_set<'a>(events: impl IntoIterator<Item = &'a EventRecord>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for e in events {
        for part in [&e.source.title, &e.source.body] {
            for (i, t) in part.iter().enumerate() {
                let capital = t.chars().next().is_some_and(char::is_uppercase);
                if capital && !is_sentence_start(part, i) {
                    out.insert(t.to_lowercase());
                }
            }
        }
    }
    out
}

fn is_numeric_term(word: &str) -> bool {
    word.chars().all(|c| c.is_ascii_digit()) || is_number_word(word) || is_ordinal_word(word)
}

/// One title-only template followed by one template per entity, whose
/// OR-group holds the `words_per_entity` words most often found within
/// `window` tokens of that entity's gold values. Stop words, numbers and
/// proper nouns never enter an OR-group. An entity without candidates gets a
/// title-only template.
pub fn induce_templates(
    events: &[&EventRecord],
    schema: &EntitySchema,
    window: usize,
    words_per_entity: usize,
    stopwords: &StopWords,
) -> Vec<QueryTemplate> {
    let proper = proper_noun_set(events.iter().copied());
    let mut counts: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new(); schema.len()];
    for e in events {
        let tokens = e.source.tokens();
        let labels = label_tokens(&tokens, &e.gold, schema);
        for (j, count) in counts.iter_mut().enumerate() {
            let gold_at: Vec<usize> = (0..tokens.len()).filter(|&i| labels[i] == j).collect();
            if gold_at.is_empty() {
                continue;
            }
            for (i, t) in tokens.iter().enumerate() {
                if labels[i] == j {
                    continue;
                }
                if gold_at.iter().any(|&p| p.abs_diff(i) <= window) {
                    *count.entry(t.to_lowercase()).or_default() += 1;
                }
            }
        }
    }

    let mut templates = vec![QueryTemplate::title_only(None)];
    for (j, count) in counts.into_iter().enumerate() {
        let mut ranked: Vec<(String, usize)> = count
            .into_iter()
            .filter(|(w, _)| {
                is_word(w) && !is_numeric_term(w) && !stopwords.contains(w) && !proper.contains(w)
            })
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let or_group: Vec<String> = ranked
            .into_iter()
            .take(words_per_entity)
            .map(|(w, _)| w)
            .collect();
        if or_group.is_empty() {
            if words_per_entity > 0 {
                log::warn!(
                    "no context words for {}; falling back to the title query",
                    schema.name(j)
                );
            }
            templates.push(QueryTemplate::title_only(Some(j)));
        } else {
            templates.push(QueryTemplate {
                kind: TemplateKind::TitlePlusOrGroup,
                or_group,
                bound_entity: Some(j),
            });
        }
    }
    templates
}
