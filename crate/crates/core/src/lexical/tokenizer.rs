//! Domain-aware tokenization.
//!
//! Text is first split into lowercase alphanumeric runs. A greedy longest-match
//! scan over those runs then folds dictionary entries (multi-word technical
//! terms and preserved literals such as part numbers) back into single tokens.
//! Matching happens on the word sequence, so `MBN 9666-1`, `mbn 9666-1` and
//! `MBN 9666 1` all resolve to the same literal.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DictionaryError {
    #[error("dictionary entry is empty")]
    EmptyEntry,
    #[error("multi-word term {0:?} must contain at least two words")]
    SingleWordTerm(String),
}

/// Multi-word terms and preserved literals recognised by the tokenizer.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainDictionary {
    /// Emitted lowercased with single spaces, e.g. `emergency stop`.
    pub multiword_terms: Vec<String>,
    /// Emitted verbatim in the registered spelling, e.g. `MBN 9666-1`.
    pub preserved_literals: Vec<String>,
}

impl DomainDictionary {
    pub fn new<I, J, S, T>(multiword_terms: I, preserved_literals: J) -> Result<Self, DictionaryError>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        let dict = Self {
            multiword_terms: multiword_terms.into_iter().map(Into::into).collect(),
            preserved_literals: preserved_literals.into_iter().map(Into::into).collect(),
        };
        dict.validate()?;
        Ok(dict)
    }

    pub fn validate(&self) -> Result<(), DictionaryError> {
        for term in &self.multiword_terms {
            match split_words(term).len() {
                0 => return Err(DictionaryError::EmptyEntry),
                1 => return Err(DictionaryError::SingleWordTerm(term.clone())),
                _ => {}
            }
        }
        for literal in &self.preserved_literals {
            if split_words(literal).is_empty() {
                return Err(DictionaryError::EmptyEntry);
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.multiword_terms.is_empty() && self.preserved_literals.is_empty()
    }
}

/// Tokenizer toggles. Both are off by default so that precise technical
/// vocabulary survives untouched.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenizerOptions {
    pub remove_stop_words: bool,
    pub stemming: bool,
}

#[derive(Debug, Clone)]
struct Entry {
    words: Vec<String>,
    emit: String,
}

/// A compiled dictionary plus options. Cheap to share across threads.
#[derive(Debug, Clone, Default)]
pub struct Analyzer {
    // first word -> entries starting with it, longest first
    entries: HashMap<String, Vec<Entry>>,
    options: TokenizerOptions,
}

impl Analyzer {
    pub fn new(dict: &DomainDictionary, options: TokenizerOptions) -> Self {
        let mut entries: HashMap<String, Vec<Entry>> = HashMap::new();
        let mut seen = HashSet::new();
        // Literals are registered first so that on an exact word-sequence
        // collision the literal spelling wins.
        let literals = dict.preserved_literals.iter().map(|l| (l, l.trim().to_string()));
        let terms = dict
            .multiword_terms
            .iter()
            .map(|t| (t, split_words(t).join(" ")));
        for (source, emit) in literals.chain(terms) {
            let words = split_words(source);
            if words.is_empty() || !seen.insert(words.clone()) {
                continue;
            }
            entries
                .entry(words[0].clone())
                .or_default()
                .push(Entry { words, emit });
        }
        for list in entries.values_mut() {
            list.sort_by_key(|t| std::cmp::Reverse(t.words.len()));
        }
        Self { entries, options }
    }

    pub fn options(&self) -> TokenizerOptions {
        self.options
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let words = split_words(text);
        let mut out = Vec::with_capacity(words.len());
        let mut i = 0;
        while i < words.len() {
            if let Some(entry) = self.longest_match(&words[i..]) {
                out.push(entry.emit.clone());
                i += entry.words.len();
                continue;
            }
            let word = &words[i];
            i += 1;
            if self.options.remove_stop_words && STOP_WORDS.contains(&word.as_str()) {
                continue;
            }
            if self.options.stemming {
                out.push(s_stem(word));
            } else {
                out.push(word.clone());
            }
        }
        out
    }

    /// Token count under this analyzer; the chunker measures sizes with it.
    pub fn count_tokens(&self, text: &str) -> usize {
        self.tokenize(text).len()
    }

    /// Dictionary-matched tokens in `text` (used as the entity count).
    pub fn dictionary_matches(&self, text: &str) -> Vec<String> {
        let words = split_words(text);
        let mut out = Vec::new();
        let mut i = 0;
        while i < words.len() {
            if let Some(entry) = self.longest_match(&words[i..]) {
                out.push(entry.emit.clone());
                i += entry.words.len();
            } else {
                i += 1;
            }
        }
        out
    }

    fn longest_match(&self, words: &[String]) -> Option<&Entry> {
        self.entries.get(&words[0])?.iter().find(|e| {
            e.words.len() <= words.len() && e.words.iter().zip(words).all(|(a, b)| a == b)
        })
    }
}

/// Tokenize with a dictionary and default options.
pub fn tokenize(text: &str, dict: &DomainDictionary) -> Vec<String> {
    Analyzer::new(dict, TokenizerOptions::default()).tokenize(text)
}

fn split_words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

const STOP_WORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "by", "for", "from", "has", "in", "is", "it",
    "its", "of", "on", "or", "that", "the", "to", "was", "were", "will", "with",
];

// Harman's S-stemmer: only plural endings are touched.
fn s_stem(word: &str) -> String {
    let n = word.len();
    if n > 3 && word.ends_with("ies") && !word.ends_with("eies") && !word.ends_with("aies") {
        return format!("{}y", &word[..n - 3]);
    }
    if n > 3 && word.ends_with("es") && !word.ends_with("aes") && !word.ends_with("ees") && !word.ends_with("oes") {
        return word[..n - 1].to_string();
    }
    if n > 2 && word.ends_with('s') && !word.ends_with("us") && !word.ends_with("ss") {
        return word[..n - 1].to_string();
    }
    word.to_string()
}
