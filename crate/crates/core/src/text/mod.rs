//! Tokenization, lexicon-driven token features, numeric normalization and
//! tf-idf weighting.

mod features;
mod lexicon;
mod numeric;
mod tfidf;
mod tokenize;

pub use features::{document_features, token_features, TokenFeatures, FEATURE_FAMILIES};
pub use lexicon::{load_word_list, parse_word_list, Lexicons, StopWords};
pub use numeric::{is_number_word, is_ordinal_word, normalize_numeric, normalize_value};
pub use tfidf::{cosine, SparseVector, TfIdfVectorizer};
pub use tokenize::{is_word, tokenize};
