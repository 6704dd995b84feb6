use rand::Rng;

use super::Vocabulary;

/// Unigram exponent of the noise distribution.
pub const NEGATIVE_EXPONENT: f64 = 0.75;

/// Cumulative noise distribution over vocabulary indices, proportional to
/// `count^alpha`. Sampling draws a uniform number and inverts the CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeTable {
    cumulative: Vec<f64>,
}

impl NegativeTable {
    pub fn new(vocab: &Vocabulary, alpha: f64) -> Self {
        Self::from_counts(vocab.counts(), alpha)
    }

    /// Panics on an empty slice.
    pub fn from_counts(counts: &[u64], alpha: f64) -> Self {
        assert!(!counts.is_empty(), "negative table needs a nonempty vocabulary");
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(alpha)).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        NegativeTable { cumulative }
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn probability(&self, idx: usize) -> f64 {
        let lower = if idx == 0 { 0.0 } else { self.cumulative[idx - 1] };
        self.cumulative[idx] - lower
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}
