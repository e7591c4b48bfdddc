/// Splits on whitespace and breaks every non-alphanumeric character out into
/// its own token. Runs of alphanumerics stay together.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.push(ch);
            continue;
        }
        if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
        if !ch.is_whitespace() {
            tokens.push(ch.to_string());
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// True when the token carries at least one alphanumeric character.
pub fn is_word(token: &str) -> bool {
    token.chars().any(char::is_alphanumeric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_input() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t\n").is_empty());
    }

    #[test]
    fn splits_trailing_punctuation() {
        assert_eq!(
            tokenize("5 people wounded."),
            ["5", "people", "wounded", "."]
        );
    }

    #[test]
    fn splits_possessive_and_hyphens() {
        assert_eq!(
            tokenize("Westerhuis's 25-year-old"),
            ["Westerhuis", "'", "s", "25", "-", "year", "-", "old"]
        );
    }

    proptest! {
        #[test]
        fn rejoin_is_a_fixpoint(text in "[a-zA-Z0-9 .,;:'!?-]{0,80}") {
            let tokens = tokenize(&text);
            let again = tokenize(&tokens.join(" "));
            prop_assert_eq!(tokens, again);
        }
    }
}
