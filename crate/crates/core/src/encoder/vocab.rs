use std::collections::HashMap;

use super::MAX_TOKENS;
use crate::error::{Error, Result};

/// Out-of-vocabulary marker. It cannot collide with real tokens because the
/// tokenizer only emits alphanumeric strings.
pub const UNK_TOKEN: &str = "[UNK]";

/// Dense token index. The UNK token always occupies the last slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Keeps tokens seen at least `min_frequency` times, most frequent first
    /// (ties lexicographic), truncated to `max_size`, then appends UNK.
    pub fn build(corpus: &[Vec<String>], min_frequency: usize, max_size: usize) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::Empty("vocabulary corpus is empty".into()));
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for doc in corpus {
            for t in doc {
                *counts.entry(t.as_str()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_frequency)
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(max_size);
        let tokens = ranked
            .into_iter()
            .map(|(t, _)| t.to_string())
            .chain(std::iter::once(UNK_TOKEN.to_string()))
            .collect();
        Vocabulary::from_tokens(tokens)
    }

    /// Rebuilds a vocabulary from its ordered token list (UNK last).
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.last().map(String::as_str) != Some(UNK_TOKEN) {
            return Err(Error::Checkpoint(
                "vocabulary must end with the UNK token".into(),
            ));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Checkpoint(format!(
                    "duplicate vocabulary token `{t}`"
                )));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn unk(&self) -> usize {
        self.tokens.len() - 1
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn index_of(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or_else(|| self.unk())
    }

    /// Ids of the first [`MAX_TOKENS`] tokens, OOV mapped to UNK.
    pub fn ids(&self, tokens: &[String]) -> Vec<usize> {
        tokens
            .iter()
            .take(MAX_TOKENS)
            .map(|t| self.index_of(t))
            .collect()
    }
}
