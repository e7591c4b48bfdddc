const CARDINALS: &[(&str, u32)] = &[
    ("zero", 0),
    ("one", 1),
    ("two", 2),
    ("three", 3),
    ("four", 4),
    ("five", 5),
    ("six", 6),
    ("seven", 7),
    ("eight", 8),
    ("nine", 9),
    ("ten", 10),
    ("eleven", 11),
    ("twelve", 12),
    ("thirteen", 13),
    ("fourteen", 14),
    ("fifteen", 15),
    ("sixteen", 16),
    ("seventeen", 17),
    ("eighteen", 18),
    ("nineteen", 19),
    ("twenty", 20),
    ("thirty", 30),
    ("forty", 40),
    ("fifty", 50),
    ("sixty", 60),
    ("seventy", 70),
    ("eighty", 80),
    ("ninety", 90),
    ("hundred", 100),
];

const ORDINALS: &[(&str, u32)] = &[
    ("first", 1),
    ("second", 2),
    ("third", 3),
    ("fourth", 4),
    ("fifth", 5),
    ("sixth", 6),
    ("seventh", 7),
    ("eighth", 8),
    ("ninth", 9),
    ("tenth", 10),
    ("eleventh", 11),
    ("twelfth", 12),
    ("thirteenth", 13),
    ("fourteenth", 14),
    ("fifteenth", 15),
    ("sixteenth", 16),
    ("seventeenth", 17),
    ("eighteenth", 18),
    ("nineteenth", 19),
    ("twentieth", 20),
    ("thirtieth", 30),
    ("fortieth", 40),
    ("fiftieth", 50),
    ("sixtieth", 60),
    ("seventieth", 70),
    ("eightieth", 80),
    ("ninetieth", 90),
    ("hundredth", 100),
];

fn lookup(table: &[(&str, u32)], word: &str) -> Option<u32> {
    table.iter().find(|(w, _)| *w == word).map(|&(_, n)| n)
}

pub fn is_number_word(token: &str) -> bool {
    lookup(CARDINALS, &token.to_lowercase()).is_some()
}

pub fn is_ordinal_word(token: &str) -> bool {
    lookup(ORDINALS, &token.to_lowercase()).is_some()
}

/// Maps spelled-out cardinals and ordinals to digit strings; everything else
/// comes back lowercased.
pub fn normalize_numeric(token: &str) -> String {
    let lower = token.to_lowercase();
    match lookup(CARDINALS, &lower).or_else(|| lookup(ORDINALS, &lower)) {
        Some(n) => n.to_string(),
        None => lower,
    }
}

/// Comparison key for a (possibly multi-token) entity value.
pub fn normalize_value(value: &str) -> String {
    value
        .split_whitespace()
        .map(normalize_numeric)
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn number_words() {
        assert_eq!(normalize_numeric("one"), "1");
        assert_eq!(normalize_numeric("Six"), "6");
        assert_eq!(normalize_numeric("twenty"), "20");
        assert_eq!(normalize_numeric("6"), "6");
        assert_eq!(normalize_numeric("fourth"), "4");
        assert_eq!(normalize_numeric("Platte"), "platte");
    }

    #[test]
    fn classification() {
        assert!(is_number_word("six"));
        assert!(!is_number_word("sixth"));
        assert!(is_ordinal_word("Sixth"));
        assert!(!is_ordinal_word("6"));
    }

    #[test]
    fn multi_token_values() {
        assert_eq!(normalize_value("Scott  Westerhuis"), "scott westerhuis");
        assert_eq!(normalize_value("four"), "4");
    }

    proptest! {
        #[test]
        fn idempotent(token in "[a-zA-Z0-9]{0,12}") {
            let once = normalize_numeric(&token);
            prop_assert_eq!(normalize_numeric(&once), once.clone());
        }

        #[test]
        fn idempotent_on_table_words(idx in 0usize..CARDINALS.len() + ORDINALS.len()) {
            let word = CARDINALS.iter().chain(ORDINALS).nth(idx).unwrap().0;
            let once = normalize_numeric(word);
            prop_assert_eq!(normalize_numeric(&once), once);
        }
    }
}
