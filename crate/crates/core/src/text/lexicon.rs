use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MALE_NAMES: &str = include_str!("../../data/male_names.txt");
const FEMALE_NAMES: &str = include_str!("../../data/female_names.txt");
const CITIES: &str = include_str!("../../data/cities.txt");
const STOP_WORDS: &str = include_str!("../../data/stopwords.txt");

/// Parses a word list: one entry per line, `#` starts a comment, entries are
/// lowercased and whitespace-collapsed.
pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|line| line.split('#').next().unwrap_or(""))
        .map(|line| {
            line.split_whitespace()
                .map(str::to_lowercase)
                .collect::<Vec<_>>()
                .join(" ")
        })
        .filter(|entry| !entry.is_empty())
        .collect()
}

pub fn load_word_list(path: &Path) -> Result<BTreeSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_word_list(&text))
}

/// Name and place gazetteers backing the lexical token features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicons {
    pub male_names: BTreeSet<String>,
    pub female_names: BTreeSet<String>,
    /// Complete single-token city names.
    pub full_cities: BTreeSet<String>,
    /// Tokens of multi-token city names.
    pub partial_city_tokens: BTreeSet<String>,
}

impl Lexicons {
    /// Builds the lexicons from raw lists; `cities` may hold multi-token names.
    pub fn new(
        male_names: BTreeSet<String>,
        female_names: BTreeSet<String>,
        cities: &BTreeSet<String>,
    ) -> Self {
        let mut full_cities = BTreeSet::new();
        let mut partial_city_tokens = BTreeSet::new();
        for city in cities {
            let parts: Vec<&str> = city.split_whitespace().collect();
            if parts.len() == 1 {
                full_cities.insert(parts[0].to_string());
            } else {
                partial_city_tokens.extend(parts.iter().map(|p| p.to_string()));
            }
        }
        Self {
            male_names,
            female_names,
            full_cities,
            partial_city_tokens,
        }
    }

    pub fn bundled() -> Self {
        Self::new(
            parse_word_list(MALE_NAMES),
            parse_word_list(FEMALE_NAMES),
            &parse_word_list(CITIES),
        )
    }

    /// Loads lexicons from files, falling back to the bundled list for any
    /// path that is `None`.
    pub fn load(
        male_names: Option<&Path>,
        female_names: Option<&Path>,
        cities: Option<&Path>,
    ) -> Result<Self> {
        let read = |path: Option<&Path>, bundled: &str| match path {
            Some(p) => load_word_list(p),
            None => Ok(parse_word_list(bundled)),
        };
        Ok(Self::new(
            read(male_names, MALE_NAMES)?,
            read(female_names, FEMALE_NAMES)?,
            &read(cities, CITIES)?,
        ))
    }

    /// Every city name, multi-token ones included.
    pub fn bundled_cities() -> BTreeSet<String> {
        parse_word_list(CITIES)
    }
}

impl Default for Lexicons {
    fn default() -> Self {
        Self::bundled()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopWords(BTreeSet<String>);

impl StopWords {
    pub fn new(words: BTreeSet<String>) -> Self {
        Self(words)
    }

    pub fn bundled() -> Self {
        Self(parse_word_list(STOP_WORDS))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for StopWords {
    fn default() -> Self {
        Self::bundled()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blank_lines() {
        let words = parse_word_list("# header\nScott\n\n  Sioux   Falls  # trailing\n");
        assert_eq!(
            words.into_iter().collect::<Vec<_>>(),
            ["scott", "sioux falls"]
        );
    }

    #[test]
    fn multi_token_cities_become_partials() {
        let cities = parse_word_list("platte\nsioux falls\n");
        let lex = Lexicons::new(BTreeSet::new(), BTreeSet::new(), &cities);
        assert!(lex.full_cities.contains("platte"));
        assert!(!lex.full_cities.contains("sioux"));
        assert!(lex.partial_city_tokens.contains("sioux"));
        assert!(lex.partial_city_tokens.contains("falls"));
    }

    #[test]
    fn bundled_lists_are_populated() {
        let lex = Lexicons::bundled();
        assert!(lex.male_names.contains("scott"));
        assert!(lex.female_names.contains("christie"));
        assert!(lex.full_cities.contains("platte"));
        assert!(StopWords::bundled().len() >= 100);
    }
}
