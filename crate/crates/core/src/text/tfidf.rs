use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::tokenize::is_word;
use crate::util::StableHasher;

/// Document-frequency statistics fitted once on a training collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfIdfVectorizer {
    vocabulary: BTreeMap<String, usize>,
    document_frequency: Vec<usize>,
    n_docs: usize,
    fingerprint: u64,
}

/// Sparse non-negative weight vector tied to the vectorizer that built it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
    fingerprint: u64,
}

impl SparseVector {
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }
}

fn term(token: &str) -> Option<String> {
    is_word(token).then(|| token.to_lowercase())
}

impl TfIdfVectorizer {
    /// Fits document frequencies. Panics on an empty collection.
    pub fn fit<'a, I, D>(docs: I) -> Self
    where
        I: IntoIterator<Item = D>,
        D: IntoIterator<Item = &'a String>,
    {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut n_docs = 0;
        for doc in docs {
            n_docs += 1;
            let mut seen: Vec<String> = doc.into_iter().filter_map(|t| term(t)).collect();
            seen.sort();
            seen.dedup();
            for t in seen {
                *df.entry(t).or_default() += 1;
            }
        }
        assert!(n_docs > 0, "tf-idf must be fitted on at least one document");
        let mut hasher = StableHasher::new(n_docs as u64);
        let mut vocabulary = BTreeMap::new();
        let mut document_frequency = Vec::with_capacity(df.len());
        for (i, (t, count)) in df.into_iter().enumerate() {
            hasher.write(t.as_bytes()).write(&count.to_le_bytes());
            vocabulary.insert(t, i);
            document_frequency.push(count);
        }
        Self {
            vocabulary,
            document_frequency,
            n_docs,
            fingerprint: hasher.finish(),
        }
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn vocabulary_len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.vocabulary.get(term).copied()
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.index_of(term)
            .map_or(0, |i| self.document_frequency[i])
    }

    /// `ln(n_docs / (1 + df))`, clamped at zero. Unknown terms weigh zero.
    pub fn idf(&self, term: &str) -> f64 {
        self.index_of(term).map_or(0.0, |i| self.idf_at(i))
    }

    fn idf_at(&self, index: usize) -> f64 {
        let df = self.document_frequency[index] as f64;
        (self.n_docs as f64 / (1.0 + df)).ln().max(0.0)
    }

    /// Raw term counts times idf over the known vocabulary.
    pub fn vectorize<'a, I>(&self, tokens: I) -> SparseVector
    where
        I: IntoIterator<Item = &'a String>,
    {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for t in tokens {
            if let Some(idx) = term(t).and_then(|t| self.index_of(&t)) {
                *counts.entry(idx).or_default() += 1.0;
            }
        }
        self.weigh(counts)
    }

    /// Like [`vectorize`](Self::vectorize) but every distinct term counts once.
    pub fn vectorize_set<'a, I>(&self, tokens: I) -> SparseVector
    where
        I: IntoIterator<Item = &'a String>,
    {
        let counts: BTreeMap<usize, f64> = tokens
            .into_iter()
            .filter_map(|t| term(t).and_then(|t| self.index_of(&t)))
            .map(|idx| (idx, 1.0))
            .collect();
        self.weigh(counts)
    }

    fn weigh(&self, counts: BTreeMap<usize, f64>) -> SparseVector {
        let entries = counts
            .into_iter()
            .map(|(idx, tf)| (idx, tf * self.idf_at(idx)))
            .filter(|&(_, w)| w > 0.0)
            .collect();
        SparseVector {
            entries,
            fingerprint: self.fingerprint,
        }
    }
}

/// Cosine similarity of two vectors from the same vectorizer; zero when
/// either is the zero vector.
///
/// Panics when the vectors come from different vectorizers.
pub fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    assert_eq!(
        a.fingerprint, b.fingerprint,
        "cosine over vectors from different vectorizers"
    );
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < a.entries.len() && j < b.entries.len() {
        let (ia, wa) = a.entries[i];
        let (ib, wb) = b.entries[j];
        match ia.cmp(&ib) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += wa * wb;
                i += 1;
                j += 1;
            }
        }
    }
    (dot / (na * nb)).clamp(0.0, 1.0)
}
