use serde::{Deserialize, Serialize};

use super::templates::QueryTemplate;
use crate::corpus::Document;
use crate::text::{SparseVector, TfIdfVectorizer};

/// Articles more than this many days older than the source are dropped.
pub const DATE_WINDOW_DAYS: i64 = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DateFilter {
    /// Drop only articles older than the source by more than the window.
    #[default]
    OlderOnly,
    /// Also drop articles newer than the source by more than the window.
    Symmetric,
}

impl DateFilter {
    pub fn admits(self, source_date: i64, date: i64) -> bool {
        let older_ok = date >= source_date - DATE_WINDOW_DAYS;
        match self {
            DateFilter::OlderOnly => older_ok,
            DateFilter::Symmetric => older_ok && date <= source_date + DATE_WINDOW_DAYS,
        }
    }
}

/// Tf-idf cosine retrieval over a fixed document pool, backed by an inverted
/// index.
#[derive(Debug)]
pub struct SearchEngine<'a> {
    docs: &'a [Document],
    vectorizer: &'a TfIdfVectorizer,
    vectors: Vec<SparseVector>,
    norms: Vec<f64>,
    /// term index -> (doc position, weight)
    postings: Vec<Vec<(usize, f64)>>,
    filter: DateFilter,
}

impl<'a> SearchEngine<'a> {
    pub fn new(docs: &'a [Document], vectorizer: &'a TfIdfVectorizer, filter: DateFilter) -> Self {
        let vectors: Vec<SparseVector> = docs
            .iter()
            .map(|d| vectorizer.vectorize(d.token_iter()))
            .collect();
        let norms = vectors.iter().map(SparseVector::norm).collect();
        let mut postings = vec![Vec::new(); vectorizer.vocabulary_len()];
        for (pos, v) in vectors.iter().enumerate() {
            for &(term, w) in v.entries() {
                postings[term].push((pos, w));
            }
        }
        Self {
            docs,
            vectorizer,
            vectors,
            norms,
            postings,
            filter,
        }
    }

    pub fn documents(&self) -> &'a [Document] {
        self.docs
    }

    pub fn vector(&self, pos: usize) -> &SparseVector {
        &self.vectors[pos]
    }

    /// Scores every pooled document against the query terms; zero-score
    /// documents are not returned.
    pub fn score_all(&self, terms: &[String]) -> Vec<(usize, f64)> {
        let query = self.vectorizer.vectorize_set(terms);
        let qn = query.norm();
        if qn == 0.0 {
            return Vec::new();
        }
        let mut dots = vec![0.0; self.docs.len()];
        let mut hit = vec![false; self.docs.len()];
        for &(term, qw) in query.entries() {
            for &(pos, dw) in &self.postings[term] {
                dots[pos] += qw * dw;
                hit[pos] = true;
            }
        }
        (0..self.docs.len())
            .filter(|&p| hit[p] && dots[p] > 0.0)
            .map(|p| (p, (dots[p] / (qn * self.norms[p])).clamp(0.0, 1.0)))
            .collect()
    }

    /// Top `k` pool positions for `template` issued on behalf of `source`:
    /// the source itself and date-filtered articles are excluded; ties break
    /// on document id.
    pub fn search(&self, template: &QueryTemplate, source: &Document, k: usize) -> Vec<usize> {
        let terms = template.terms(&source.title);
        let mut scored: Vec<(usize, f64)> = self
            .score_all(&terms)
            .into_iter()
            .filter(|&(p, _)| {
                let d = &self.docs[p];
                d.id != source.id && self.filter.admits(source.date, d.date)
            })
            .collect();
        scored.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.docs[a.0].id.cmp(&self.docs[b.0].id))
        });
        scored.truncate(k);
        scored.into_iter().map(|(p, _)| p).collect()
    }
}
