//! Language tags and the small closed word classes the parser and the
//! lexical lookup need (determiners, prepositions, number words).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LanguageId(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid language tag `{0}`: tags are non-empty lowercase identifiers")]
pub struct InvalidLanguageTag(pub String);

impl LanguageId {
    pub fn new(tag: impl Into<String>) -> Result<Self, InvalidLanguageTag> {
        let tag = tag.into();
        let ok = !tag.is_empty()
            && tag
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' || c == '_');
        if ok {
            Ok(Self(tag))
        } else {
            Err(InvalidLanguageTag(tag))
        }
    }

    /// English, the only language with shipped word-class tables.
    pub fn en() -> Self {
        Self("en".to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for LanguageId {
    type Error = InvalidLanguageTag;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<LanguageId> for String {
    fn from(value: LanguageId) -> Self {
        value.0
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

struct WordClasses {
    determiners: &'static [&'static str],
    prepositions: &'static [&'static str],
    numbers: &'static [&'static str],
}

const ENGLISH: WordClasses = WordClasses {
    determiners: &["the", "a", "an"],
    prepositions: &[
        "in", "on", "at", "to", "with", "from", "into", "onto", "under", "near", "for", "of",
        "behind", "over", "through",
    ],
    numbers: &[
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
        "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
        "eighteen", "nineteen", "twenty", "thirty", "forty", "fifty", "sixty", "seventy",
        "eighty", "ninety", "hundred",
    ],
};

const NONE: WordClasses = WordClasses {
    determiners: &[],
    prepositions: &[],
    numbers: &[],
};

fn classes(language: &LanguageId) -> &'static WordClasses {
    match language.as_str() {
        "en" => &ENGLISH,
        _ => &NONE,
    }
}

pub fn is_determiner(token: &str, language: &LanguageId) -> bool {
    let t = token.to_lowercase();
    classes(language).determiners.contains(&t.as_str())
}

pub fn is_preposition(token: &str, language: &LanguageId) -> bool {
    let t = token.to_lowercase();
    classes(language).prepositions.contains(&t.as_str())
}

pub fn is_number_word(token: &str, language: &LanguageId) -> bool {
    if !token.is_empty() && token.chars().all(|c| c.is_ascii_digit()) {
        return true;
    }
    let t = token.to_lowercase();
    classes(language).numbers.contains(&t.as_str())
}

/// Content tokens of a noun phrase: the tokens minus determiners.
pub fn content_tokens<S: AsRef<str>>(tokens: &[S], language: &LanguageId) -> Vec<String> {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !is_determiner(t, language))
        .map(str::to_owned)
        .collect()
}

/// Index of the head among content tokens: the last token that is not a
/// number word, or the last token when every token is a number.
pub fn head_index<S: AsRef<str>>(content: &[S], language: &LanguageId) -> Option<usize> {
    if content.is_empty() {
        return None;
    }
    content
        .iter()
        .rposition(|t| !is_number_word(t.as_ref(), language))
        .or(Some(content.len() - 1))
}

/// Canonical lookup key for a lemma or phrase: lowercase, single spaces.
pub fn normalize_lemma(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_must_be_lowercase_and_non_empty() {
        assert!(LanguageId::new("en").is_ok());
        assert!(LanguageId::new("pt-br").is_ok());
        assert!(LanguageId::new("").is_err());
        assert!(LanguageId::new("EN").is_err());
    }

    #[test]
    fn head_skips_trailing_numbers() {
        let en = LanguageId::en();
        assert_eq!(head_index(&["motor", "nine"], &en), Some(0));
        assert_eq!(head_index(&["blue", "ball"], &en), Some(1));
        assert_eq!(head_index(&["nine"], &en), Some(0));
        assert_eq!(head_index::<&str>(&[], &en), None);
    }

    #[test]
    fn lemma_normalization() {
        assert_eq!(normalize_lemma("  Blue   Ball "), "blue ball");
    }
}
