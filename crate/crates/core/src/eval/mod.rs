//! Intrinsic evaluation: analogies, word-pair similarity and nearest
//! neighbors.

mod analogy;
mod neighbors;
mod report;
mod stats;
mod wordpairs;

use std::collections::HashMap;
use std::io;

use thiserror::Error;

pub use self::analogy::{
    analogy_accuracy, derive_undiacritized_set, validate_set, validate_text, AnalogyOptions, AnalogyResult,
    AnalogySection, AnalogySet, DerivedSet, SectionScore, Violation, ViolationKind,
};
pub use self::neighbors::nearest_neighbors;
pub use self::report::{evaluate, format_table, EvalReport};
pub use self::stats::{average_ranks, pearson, spearman};
pub use self::wordpairs::{wordpair_eval, WordPair, WordPairResult, WordPairSet, MAX_SCORE};

use crate::embeddings::{ModelError, WordEmbeddings};
use crate::matrix::{dot64, norm64};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cosine of a zero vector is undefined")]
    ZeroVector,
    #[error("length mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("no analogy quadruple was evaluable ({skipped} skipped as out of vocabulary)")]
    NoEvaluableQuadruples { skipped: usize },
    #[error("need at least 2 evaluable pairs, found {found}")]
    TooFewPairs { found: usize },
    #[error("correlation undefined: one input is constant")]
    DegenerateInput,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("test set is empty")]
    EmptySet,
    #[error("cannot average reports: {0}")]
    MismatchedReports(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Cosine similarity, accumulated in `f64`.
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64, EvalError> {
    if u.len() != v.len() {
        return Err(EvalError::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let (nu, nv) = (norm64(u), norm64(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(EvalError::ZeroVector);
    }
    Ok((dot64(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Maps test-set words onto embedding rows. With case folding, a word
/// resolves to its exact spelling if present, otherwise to the lowest-index
/// word with the same lowercase form.
pub(crate) struct Resolver<'a> {
    emb: &'a WordEmbeddings,
    limit: usize,
    case_insensitive: bool,
    keys: Vec<String>,
    folded: HashMap<String, usize>,
}

impl<'a> Resolver<'a> {
    pub fn new(emb: &'a WordEmbeddings, restrict: Option<usize>, case_insensitive: bool) -> Self {
        let limit = restrict.map_or(emb.len(), |n| n.min(emb.len()));
        let keys: Vec<String> = emb.words()[..limit]
            .iter()
            .map(|w| if case_insensitive { w.to_lowercase() } else { w.clone() })
            .collect();
        let mut folded = HashMap::with_capacity(limit);
        for (i, k) in keys.iter().enumerate() {
            folded.entry(k.clone()).or_insert(i);
        }
        Resolver {
            emb,
            limit,
            case_insensitive,
            keys,
            folded,
        }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn key(&self, word: &str) -> String {
        if self.case_insensitive {
            word.to_lowercase()
        } else {
            word.to_owned()
        }
    }

    pub fn key_of(&self, idx: usize) -> &str {
        &self.keys[idx]
    }

    pub fn resolve(&self, word: &str) -> Option<usize> {
        match self.emb.index_of(word) {
            Some(i) if i < self.limit => Some(i),
            _ => self.folded.get(&self.key(word)).copied(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(EvalError::ZeroVector)));
        assert!(matches!(cosine(&[1.0], &[1.0, 0.0]), Err(EvalError::DimensionMismatch { .. })));
        assert_eq!(cosine(&[0.3, -2.0], &[1.5, 0.25]).unwrap(), cosine(&[1.5, 0.25], &[0.3, -2.0]).unwrap());
    }
}
