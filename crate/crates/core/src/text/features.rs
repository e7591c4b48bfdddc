use std::collections::BTreeSet;

use super::lexicon::Lexicons;
use super::numeric::{is_number_word, is_ordinal_word};
use crate::error::{Error, Result};

/// Feature families a token may emit. Every emitted feature name is one of
/// these, suffixed with `@<offset>`; `word` additionally carries the
/// lowercased token (`word=killed@1`).
pub const FEATURE_FAMILIES: &[&str] = &[
    "isMaleName",
    "isFemaleName",
    "isCapital",
    "isLongWord",
    "isShortWord",
    "isDigit",
    "containsDigit",
    "isNumberWord",
    "isOrdinalWord",
    "isFullCity",
    "isPartialCity",
    "word",
    "boundary",
];

const LONG_WORD: usize = 8;
const SHORT_WORD: usize = 3;

/// Binary features of one token position. Absent names have value 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenFeatures {
    active: BTreeSet<String>,
}

impl TokenFeatures {
    pub fn get(&self, name: &str) -> f64 {
        if self.active.contains(name) {
            1.0
        } else {
            0.0
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.active.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }
}

fn unigram_features(token: &str, lex: &Lexicons) -> Vec<String> {
    let lower = token.to_lowercase();
    let len = token.chars().count();
    let mut out = Vec::with_capacity(6);
    let mut flag = |on: bool, name: &str| {
        if on {
            out.push(name.to_string());
        }
    };
    flag(lex.male_names.contains(&lower), "isMaleName");
    flag(lex.female_names.contains(&lower), "isFemaleName");
    flag(
        token.chars().next().is_some_and(char::is_uppercase),
        "isCapital",
    );
    flag(len >= LONG_WORD, "isLongWord");
    flag(len <= SHORT_WORD, "isShortWord");
    flag(
        !token.is_empty() && token.chars().all(|c| c.is_ascii_digit()),
        "isDigit",
    );
    flag(token.chars().any(|c| c.is_ascii_digit()), "containsDigit");
    flag(is_number_word(&lower), "isNumberWord");
    flag(is_ordinal_word(&lower), "isOrdinalWord");
    flag(lex.full_cities.contains(&lower), "isFullCity");
    flag(lex.partial_city_tokens.contains(&lower), "isPartialCity");
    out.push(format!("word={lower}"));
    out
}

fn window(base: &[Vec<String>], i: usize, radius: usize) -> TokenFeatures {
    let mut active = BTreeSet::new();
    let r = radius as isize;
    for offset in -r..=r {
        let j = i as isize + offset;
        if j < 0 || j >= base.len() as isize {
            active.insert(format!("boundary@{offset}"));
            continue;
        }
        for name in &base[j as usize] {
            active.insert(format!("{name}@{offset}"));
        }
    }
    TokenFeatures { active }
}

/// Features of token `i` plus its neighbours within `radius`.
pub fn token_features(
    tokens: &[String],
    i: usize,
    radius: usize,
    lex: &Lexicons,
) -> Result<TokenFeatures> {
    if i >= tokens.len() {
        return Err(Error::Validation(format!(
            "token index {i} out of range for {} tokens",
            tokens.len()
        )));
    }
    let lo = i.saturating_sub(radius);
    let hi = (i + radius + 1).min(tokens.len());
    // Only the window is featurized; positions are rebased into it.
    let base: Vec<Vec<String>> = tokens[lo..hi]
        .iter()
        .map(|t| unigram_features(t, lex))
        .collect();
    // The slice spans exactly the in-document part of the window, so offsets
    // that fall outside it are genuine document boundaries.
    Ok(window(&base, i - lo, radius))
}

/// Featurizes every position of a token sequence at once.
pub fn document_features(tokens: &[String], radius: usize, lex: &Lexicons) -> Vec<TokenFeatures> {
    let base: Vec<Vec<String>> = tokens.iter().map(|t| unigram_features(t, lex)).collect();
    (0..tokens.len())
        .map(|i| window(&base, i, radius))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;
    use proptest::prelude::*;

    fn lex() -> Lexicons {
        let mut lex = Lexicons::bundled();
        lex.male_names.insert("scott".into());
        lex
    }

    #[test]
    fn male_name_and_capital() {
        let tokens = tokenize("Scott shot");
        let f = token_features(&tokens, 0, 4, &lex()).unwrap();
        assert_eq!(f.get("isMaleName@0"), 1.0);
        assert_eq!(f.get("isCapital@0"), 1.0);
        assert_eq!(f.get("isFemaleName@0"), 0.0);
        assert_eq!(f.get("boundary@-1"), 1.0);
        assert_eq!(f.get("word=shot@1"), 1.0);
    }

    #[test]
    fn digits_and_number_words() {
        let tokens = tokenize("6 six sixth");
        let l = lex();
        let six = token_features(&tokens, 0, 0, &l).unwrap();
        assert_eq!(six.get("isDigit@0"), 1.0);
        assert_eq!(six.get("containsDigit@0"), 1.0);
        let word = token_features(&tokens, 1, 0, &l).unwrap();
        assert_eq!(word.get("isNumberWord@0"), 1.0);
        assert_eq!(word.get("isDigit@0"), 0.0);
        let ord = token_features(&tokens, 2, 0, &l).unwrap();
        assert_eq!(ord.get("isOrdinalWord@0"), 1.0);
        assert_eq!(ord.get("isNumberWord@0"), 0.0);
    }

    #[test]
    fn word_length_thresholds() {
        let tokens = tokenize("the shooting suspect");
        let l = lex();
        assert_eq!(
            token_features(&tokens, 0, 0, &l)
                .unwrap()
                .get("isShortWord@0"),
            1.0
        );
        assert_eq!(
            token_features(&tokens, 1, 0, &l)
                .unwrap()
                .get("isLongWord@0"),
            1.0
        );
        let mid = token_features(&tokens, 2, 0, &l).unwrap();
        assert_eq!(mid.get("isLongWord@0") + mid.get("isShortWord@0"), 0.0);
    }

    #[test]
    fn city_features() {
        let tokens = tokenize("Platte Sioux Falls");
        let l = lex();
        assert_eq!(
            token_features(&tokens, 0, 0, &l)
                .unwrap()
                .get("isFullCity@0"),
            1.0
        );
        let sioux = token_features(&tokens, 1, 0, &l).unwrap();
        assert_eq!(sioux.get("isPartialCity@0"), 1.0);
        assert_eq!(sioux.get("isFullCity@0"), 0.0);
    }

    #[test]
    fn out_of_range_index() {
        let tokens = tokenize("a b");
        assert!(token_features(&tokens, 2, 1, &lex()).is_err());
    }

    #[test]
    fn names_come_from_registry() {
        let tokens = tokenize("Officers said Scott Westerhuis, 49, shot six people in Platte.");
        for f in document_features(&tokens, 4, &lex()) {
            for name in f.iter() {
                let family = name.split(['@', '=']).next().unwrap();
                assert!(FEATURE_FAMILIES.contains(&family), "{name}");
            }
        }
    }

    proptest! {
        #[test]
        fn single_and_batch_agree(words in prop::collection::vec("[A-Za-z0-9]{1,9}", 1..20), radius in 0usize..5) {
            let l = lex();
            let batch = document_features(&words, radius, &l);
            for (i, expected) in batch.iter().enumerate() {
                prop_assert_eq!(&token_features(&words, i, radius, &l).unwrap(), expected);
            }
        }

        #[test]
        fn locality(
            words in prop::collection::vec("[A-Za-z0-9]{1,9}", 12..24),
            replacement in "[A-Za-z0-9]{1,9}",
            radius in 0usize..4,
            pick in 0usize..1000,
        ) {
            let l = lex();
            let i = pick % words.len();
            let far: Vec<usize> = (0..words.len()).filter(|j| j.abs_diff(i) > radius).collect();
            prop_assume!(!far.is_empty());
            let mut mutated = words.clone();
            mutated[far[pick % far.len()]] = replacement;
            prop_assert_eq!(
                token_features(&words, i, radius, &l).unwrap(),
                token_features(&mutated, i, radius, &l).unwrap()
            );
        }
    }
}
