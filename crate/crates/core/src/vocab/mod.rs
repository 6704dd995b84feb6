//! Vocabulary construction, frequency subsampling, the negative-sampling
//! distribution and the subword n-gram index.

mod negative;
mod subword;

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use thiserror::Error;

pub use self::negative::{NegativeTable, NEGATIVE_EXPONENT};
pub use self::subword::{fnv1a_32, SubwordIndexer, BOW, EOW};

pub const DEFAULT_MIN_COUNT: u64 = 5;
pub const DEFAULT_SUBSAMPLE: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("no token occurs at least {min_count} times")]
    EmptyVocabulary { min_count: u64 },
    #[error("min_count must be at least 1")]
    InvalidMinCount,
    #[error("invalid n-gram range {min_n}..={max_n}")]
    InvalidNgramRange { min_n: usize, max_n: usize },
    #[error("bucket count must be positive")]
    InvalidBucketCount,
    #[error("vocabulary line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Token → (dense index, count), indices assigned by descending count with
/// lexicographic tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    min_count: u64,
    total_count: u64,
}

/// Count tokens of a sharded corpus; shards are merged by summing.
pub fn count_tokens<S>(sentences: &[Vec<S>]) -> HashMap<String, u64>
where
    S: AsRef<str> + Sync,
{
    sentences
        .par_iter()
        .fold(HashMap::new, |mut counts: HashMap<String, u64>, sentence| {
            for token in sentence {
                *counts.entry(token.as_ref().to_owned()).or_default() += 1;
            }
            counts
        })
        .reduce(HashMap::new, merge_counts)
}

fn merge_counts(a: HashMap<String, u64>, b: HashMap<String, u64>) -> HashMap<String, u64> {
    let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    for (token, count) in small {
        *big.entry(token).or_default() += count;
    }
    big
}

impl Vocabulary {
    pub fn build<I, S>(tokens: I, min_count: u64) -> Result<Self, VocabError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for token in tokens {
            let token = token.as_ref();
            match counts.get_mut(token) {
                Some(count) => *count += 1,
                None => {
                    counts.insert(token.to_owned(), 1);
                }
            }
        }
        Self::from_counts(counts, min_count)
    }

    pub fn from_counts(counts: HashMap<String, u64>, min_count: u64) -> Result<Self, VocabError> {
        if min_count == 0 {
            return Err(VocabError::InvalidMinCount);
        }
        let mut entries: Vec<(String, u64)> = counts.into_iter().filter(|(_, c)| *c >= min_count).collect();
        if entries.is_empty() {
            return Err(VocabError::EmptyVocabulary { min_count });
        }
        entries.sort_unstable_by(|(wa, ca), (wb, cb)| cb.cmp(ca).then_with(|| wa.cmp(wb)));
        Ok(Self::from_ordered(entries, min_count))
    }

    fn from_ordered(entries: Vec<(String, u64)>, min_count: u64) -> Self {
        let (words, counts): (Vec<String>, Vec<u64>) = entries.into_iter().unzip();
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let total_count = counts.iter().sum();
        Vocabulary {
            words,
            counts,
            index,
            min_count,
            total_count,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    /// Keep probability of every entry under subsampling threshold `t`.
    pub fn keep_probabilities(&self, t: f64) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| keep_probability(c, self.total_count, t))
            .collect()
    }

    /// Write `token<TAB>count` lines in index order.
    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (word, count) in self.words.iter().zip(&self.counts) {
            writeln!(out, "{word}\t{count}")?;
        }
        out.flush()
    }

    /// Read the format produced by [`Vocabulary::write_to`]; file order is
    /// kept as index order.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self, VocabError> {
        let mut entries = Vec::new();
        let mut seen = HashMap::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: &str| VocabError::Parse {
                line: lineno + 1,
                message: message.to_owned(),
            };
            let (word, count) = line.split_once('\t').ok_or_else(|| parse_err("expected token<TAB>count"))?;
            let count: u64 = count.trim().parse().map_err(|_| parse_err("count is not an integer"))?;
            if word.is_empty() || count == 0 {
                return Err(parse_err("empty token or zero count"));
            }
            if seen.insert(word.to_owned(), ()).is_some() {
                return Err(parse_err("duplicate token"));
            }
            entries.push((word.to_owned(), count));
        }
        let min_count = entries.iter().map(|(_, c)| *c).min().ok_or(VocabError::EmptyVocabulary { min_count: 1 })?;
        Ok(Self::from_ordered(entries, min_count))
    }
}

/// Probability of keeping one occurrence of a token seen `count` times out of
/// `total_count`, for subsampling threshold `t`:
/// `min(1, sqrt(t/f) + t/f)` with `f = count / total_count`.
pub fn keep_probability(count: u64, total_count: u64, t: f64) -> f64 {
    debug_assert!(t > 0.0 && count >= 1);
    let f = count as f64 / total_count as f64;
    let ratio = t / f;
    (ratio.sqrt() + ratio).min(1.0)
}
