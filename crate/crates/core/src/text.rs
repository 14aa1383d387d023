//! Text normalization: whitespace tokenization, lower-casing, punctuation
//! stripping and stop-word removal.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

/// Immutable tokenizer settings. Stop-words are matched after lower-casing
/// when `lowercase` is enabled, so the set must hold lowercase entries.
#[derive(Debug, Clone)]
pub struct TokenizerConfig {
    lowercase: bool,
    strip_punctuation: bool,
    stopwords: HashSet<String>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            strip_punctuation: true,
            stopwords: HashSet::new(),
        }
    }
}

impl TokenizerConfig {
    pub fn new(lowercase: bool, strip_punctuation: bool, stopwords: HashSet<String>) -> Self {
        Self {
            lowercase,
            strip_punctuation,
            stopwords,
        }
    }

    pub fn with_stopwords(stopwords: HashSet<String>) -> Self {
        Self {
            stopwords,
            ..Self::default()
        }
    }

    pub fn stopwords(&self) -> &HashSet<String> {
        &self.stopwords
    }
}

/// The in-order word sequence of one document after normalization.
/// Duplicates are preserved; term frequency is read off this sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenSeq {
    tokens: Vec<String>,
}

impl TokenSeq {
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        Self { tokens }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    /// Space-joined form; tokenizing it again yields the same sequence.
    pub fn join(&self) -> String {
        self.tokens.join(" ")
    }
}

fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

/// Split on Unicode whitespace, lower-case, strip punctuation characters
/// (edges and interior), drop tokens that become empty, drop stop-words.
/// Degenerate inputs yield an empty sequence; never fails.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> TokenSeq {
    let mut tokens = Vec::new();
    for raw in text.split_whitespace() {
        let mut word = if config.lowercase {
            raw.to_lowercase()
        } else {
            raw.to_string()
        };
        if config.strip_punctuation {
            word.retain(|c| !is_punctuation(c));
        }
        if word.is_empty() || config.stopwords.contains(&word) {
            continue;
        }
        tokens.push(word);
    }
    TokenSeq { tokens }
}

/// Load a stop-word file: UTF-8, one word per line, `#` lines are comments.
/// Entries are lower-cased on load.
pub fn load_stopwords(path: &Path) -> io::Result<HashSet<String>> {
    let reader = BufReader::new(File::open(path)?);
    let mut words = HashSet::new();
    for line in reader.lines() {
        let line = line?;
        let entry = line.trim();
        if entry.is_empty() || entry.starts_with('#') {
            continue;
        }
        words.insert(entry.to_lowercase());
    }
    Ok(words)
}
