//! Word-pair similarity sets (`word1<TAB>word2<TAB>score`) and their
//! correlation with model cosines.

use std::collections::HashSet;
use std::path::Path;

use super::analogy::read_utf8;
use super::stats::{pearson, spearman};
use super::{cosine, EvalError, Resolver};
use crate::embeddings::WordEmbeddings;
use crate::textnorm::{normalize_str, NormalizationPolicy};

pub const MAX_SCORE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct WordPair {
    pub first: String,
    pub second: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordPairSet {
    pub pairs: Vec<WordPair>,
}

impl WordPairSet {
    /// Parse tab-separated triples. A first line whose score field is not a
    /// number is taken as a header.
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut pairs = Vec::new();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| EvalError::Parse { line: i + 1, message };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 tab-separated fields, found {}", fields.len())));
            }
            let score: f64 = match fields[2].trim().parse() {
                Ok(s) => s,
                Err(_) if i == 0 => continue,
                Err(_) => return Err(err(format!("score {:?} is not a number", fields[2]))),
            };
            if !(0.0..=MAX_SCORE).contains(&score) {
                return Err(err(format!("score {score} outside [0, {MAX_SCORE}]")));
            }
            let (first, second) = (fields[0].trim(), fields[1].trim());
            if first.is_empty() || second.is_empty() {
                return Err(err("empty word".into()));
            }
            let key = if first <= second { (first, second) } else { (second, first) };
            if !seen.insert((key.0.to_owned(), key.1.to_owned())) {
                return Err(err(format!("duplicate pair {first} / {second}")));
            }
            pairs.push(WordPair {
                first: first.to_owned(),
                second: second.to_owned(),
                score,
            });
        }
        if pairs.is_empty() {
            return Err(EvalError::EmptySet);
        }
        Ok(WordPairSet { pairs })
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        Self::parse(&read_utf8(path)?)
    }

    /// Normalize both words of every pair; pairs whose words collapse into
    /// one, or that repeat an earlier pair, are dropped. Returns the count
    /// dropped.
    pub fn normalized(&self, policy: &NormalizationPolicy) -> (WordPairSet, usize) {
        let mut seen = HashSet::new();
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for p in &self.pairs {
            let first = normalize_str(&p.first, policy);
            let second = normalize_str(&p.second, policy);
            let key = if first <= second { (first.clone(), second.clone()) } else { (second.clone(), first.clone()) };
            if first == second || !seen.insert(key) {
                continue;
            }
            pairs.push(WordPair { first, second, score: p.score });
        }
        let dropped = self.pairs.len() - pairs.len();
        (WordPairSet { pairs }, dropped)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordPairResult {
    /// Pearson correlation between cosines and human scores, in [-1, 1].
    pub pearson: f64,
    pub spearman: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

impl WordPairResult {
    pub fn oov_ratio(&self) -> f64 {
        let total = self.evaluated + self.skipped;
        if total == 0 {
            0.0
        } else {
            self.skipped as f64 / total as f64
        }
    }
}

/// Correlate model cosines with human judgments. Pairs with an
/// unrepresentable word (or a zero vector) are skipped; with n-gram buckets
/// present, out-of-vocabulary words are composed instead.
pub fn wordpair_eval(emb: &WordEmbeddings, set: &WordPairSet, case_insensitive: bool) -> Result<WordPairResult, EvalError> {
    let resolver = Resolver::new(emb, None, case_insensitive);
    let vector = |w: &str| -> Option<Vec<f32>> {
        match resolver.resolve(w) {
            Some(i) => Some(emb.vector(i).to_vec()),
            None => emb.lookup(w).ok().map(|v| v.into_owned()),
        }
    };
    let mut cosines = Vec::with_capacity(set.len());
    let mut human = Vec::with_capacity(set.len());
    for pair in &set.pairs {
        let (Some(u), Some(v)) = (vector(&pair.first), vector(&pair.second)) else {
            continue;
        };
        let Ok(c) = cosine(&u, &v) else {
            continue;
        };
        cosines.push(c);
        human.push(pair.score);
    }
    let evaluated = cosines.len();
    if evaluated < 2 {
        return Err(EvalError::TooFewPairs { found: evaluated });
    }
    Ok(WordPairResult {
        pearson: pearson(&cosines, &human)?,
        spearman: spearman(&cosines, &human)?,
        evaluated,
        skipped: set.len() - evaluated,
    })
}
