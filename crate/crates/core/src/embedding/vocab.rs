use std::collections::HashMap;

use crate::corpus::CultureCorpus;
use crate::error::{Error, Result};

/// Words kept for training, indexed by descending frequency.
///
/// Ties in frequency are broken by the word itself so indices are a pure
/// function of the corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    total_tokens: u64,
    min_count: u64,
}

impl Vocabulary {
    /// Assembles a vocabulary from `(word, count)` pairs in index order.
    pub fn from_parts(entries: Vec<(String, u64)>, total_tokens: u64, min_count: u64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary("no words".into()));
        }
        let mut index = HashMap::with_capacity(entries.len());
        let mut words = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for (i, (word, count)) in entries.into_iter().enumerate() {
            if index.insert(word.clone(), i).is_some() {
                return Err(Error::Format(format!("duplicate vocabulary word `{word}`")));
            }
            words.push(word);
            counts.push(count);
        }
        Ok(Vocabulary {
            words,
            counts,
            index,
            total_tokens,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word(&self, index: usize) -> &str {
        &self.words[index]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts[index]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Token count of the whole corpus, including words below the threshold.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Tokens of the corpus belonging to kept words.
    pub fn kept_tokens(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }
}

pub fn build_vocab(corpus: &CultureCorpus, min_count: u64) -> Result<Vocabulary> {
    if min_count == 0 {
        return Err(Error::Argument("min_count must be at least 1".into()));
    }
    if corpus.is_empty() {
        return Err(Error::EmptyVocabulary(format!("corpus `{}` is empty", corpus.region)));
    }
    let mut freq: HashMap<&str, u64> = HashMap::new();
    let mut total = 0u64;
    for sentence in &corpus.sentences {
        for token in &sentence.tokens {
            *freq.entry(token.as_str()).or_default() += 1;
            total += 1;
        }
    }
    let mut kept: Vec<(String, u64)> = freq
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(w, c)| (w.to_string(), c))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary(format!(
            "no word in `{}` occurs at least {min_count} times",
            corpus.region
        )));
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Vocabulary::from_parts(kept, total, min_count)
}
