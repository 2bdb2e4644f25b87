//! Closed-pattern parser for imperatives of the shape
//! `[NP] V NP* (PP NP)*`, where the verb is the first token found in the
//! verb lexicon and a pre-verbal NP is the vocative/agent. After the verb,
//! a determiner that follows a content word opens a new NP, so
//! "give Jacob the ball" has two objects.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::Category;
use crate::language::{is_determiner, is_number_word, is_preposition, normalize_lemma, LanguageId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constituent {
    pub category: Category,
    /// Surface tokens, determiners included.
    pub tokens: Vec<String>,
    pub head: String,
    pub modifiers: Vec<String>,
    /// Half-open token span into the tokenized utterance.
    pub span: (usize, usize),
}

impl Constituent {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtteranceTree {
    pub constituents: Vec<Constituent>,
    /// Index of the V constituent.
    pub verb_position: usize,
    pub language: LanguageId,
    pub source_text: String,
}

impl UtteranceTree {
    pub fn verb(&self) -> &Constituent {
        &self.constituents[self.verb_position]
    }

    pub fn categories(&self) -> Vec<Category> {
        self.constituents.iter().map(|c| c.category).collect()
    }
}

/// The verb token of a tree.
pub fn verb_of(tree: &UtteranceTree) -> &str {
    &tree.verb().head
}

/// Every non-V constituent with its position, in surface order.
pub fn args_of(tree: &UtteranceTree) -> Vec<(usize, &Constituent)> {
    tree.constituents
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != tree.verb_position)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty utterance")]
    Empty,
    #[error("no verb found in \"{0}\"")]
    NoVerbFound(String),
    #[error("unrecognized utterance shape: \"{0}\"")]
    UnrecognizedShape(String),
}

/// Split on whitespace and punctuation; punctuation is dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| c.is_whitespace() || (c.is_ascii_punctuation() && c != '\'' && c != '-'))
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct Parser {
    verbs: BTreeSet<String>,
}

impl Parser {
    pub fn new<I, S>(verbs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            verbs: verbs.into_iter().map(|v| normalize_lemma(v.as_ref())).collect(),
        }
    }

    pub fn is_verb(&self, token: &str) -> bool {
        self.verbs.contains(&token.to_lowercase())
    }

    pub fn parse(&self, text: &str, language: &LanguageId) -> Result<UtteranceTree, ParseError> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(ParseError::Empty);
        }
        let shape_err = || ParseError::UnrecognizedShape(text.to_owned());
        let verb_at = tokens
            .iter()
            .position(|t| self.is_verb(t))
            .ok_or_else(|| ParseError::NoVerbFound(text.to_owned()))?;

        let mut constituents = Vec::new();
        if verb_at > 0 {
            if tokens[..verb_at].iter().any(|t| is_preposition(t, language)) {
                return Err(shape_err());
            }
            constituents.push(noun_phrase(&tokens, 0, verb_at, language).ok_or_else(shape_err)?);
        }
        let verb_position = constituents.len();
        constituents.push(Constituent {
            category: Category::V,
            tokens: vec![tokens[verb_at].clone()],
            head: tokens[verb_at].to_lowercase(),
            modifiers: Vec::new(),
            span: (verb_at, verb_at + 1),
        });

        let mut i = verb_at + 1;
        let np_end = |from: usize| {
            (from..tokens.len())
                .find(|&j| is_preposition(&tokens[j], language))
                .unwrap_or(tokens.len())
        };
        let end = np_end(i);
        let mut start = i;
        for j in i + 1..end {
            if is_determiner(&tokens[j], language) && !is_determiner(&tokens[j - 1], language) {
                constituents.push(noun_phrase(&tokens, start, j, language).ok_or_else(shape_err)?);
                start = j;
            }
        }
        if end > start {
            constituents.push(noun_phrase(&tokens, start, end, language).ok_or_else(shape_err)?);
        }
        i = end;
        while i < tokens.len() {
            constituents.push(Constituent {
                category: Category::PP,
                tokens: vec![tokens[i].clone()],
                head: tokens[i].to_lowercase(),
                modifiers: Vec::new(),
                span: (i, i + 1),
            });
            let start = i + 1;
            let end = np_end(start);
            if end == start {
                return Err(shape_err());
            }
            constituents.push(noun_phrase(&tokens, start, end, language).ok_or_else(shape_err)?);
            i = end;
        }

        Ok(UtteranceTree {
            constituents,
            verb_position,
            language: language.clone(),
            source_text: text.to_owned(),
        })
    }
}

fn noun_phrase(tokens: &[String], start: usize, end: usize, language: &LanguageId) -> Option<Constituent> {
    let slice = &tokens[start..end];
    let content: Vec<&String> = slice.iter().filter(|t| !is_determiner(t, language)).collect();
    let head_at = content
        .iter()
        .rposition(|t| !is_number_word(t, language))
        .or_else(|| content.len().checked_sub(1))?;
    Some(Constituent {
        category: Category::NP,
        tokens: slice.to_vec(),
        head: content[head_at].clone(),
        modifiers: content
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != head_at)
            .map(|(_, t)| (*t).clone())
            .collect(),
        span: (start, end),
    })
}

/// Parse with an explicit set of verb lemmas.
pub fn parse_utterance<I, S>(text: &str, language: &LanguageId, verbs: I) -> Result<UtteranceTree, ParseError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    Parser::new(verbs).parse(text, language)
}
