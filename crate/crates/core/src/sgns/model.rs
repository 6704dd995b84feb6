use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Mode, TrainConfig, TrainError};
use crate::embeddings::{mean_rows, ModelError, NgramBuckets, WordEmbeddings};
use crate::matrix::Matrix;
use crate::vocab::{SubwordIndexer, Vocabulary};

/// Input and output matrices of a skipgram model.
///
/// Input rows `0..vocab.len()` belong to words; in subword mode rows
/// `vocab.len()..vocab.len() + bucket_count` are hashed n-gram buckets.
/// Output rows are indexed by vocabulary id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    mode: Mode,
    vocab: Vocabulary,
    indexer: Option<SubwordIndexer>,
    input: Matrix,
    output: Matrix,
}

impl EmbeddingModel {
    /// Input rows uniform in `[-1/dim, 1/dim]`, output rows zero, drawn from
    /// `config.seed`.
    pub fn initialize(vocab: &Vocabulary, config: &TrainConfig) -> Result<Self, TrainError> {
        config.validate()?;
        let indexer = match config.mode {
            Mode::Word => None,
            Mode::Subword => Some(SubwordIndexer::new(config.min_n, config.max_n, config.bucket_count, vocab.len())?),
        };
        let rows = indexer.map_or(vocab.len(), |ix| ix.rows());
        let bound = 1.0 / config.dim as f32;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let data = (0..rows * config.dim).map(|_| rng.gen_range(-bound..=bound)).collect();
        Ok(EmbeddingModel {
            mode: config.mode,
            vocab: vocab.clone(),
            indexer,
            input: Matrix::from_vec(rows, config.dim, data),
            output: Matrix::zeros(vocab.len(), config.dim),
        })
    }

    pub(crate) fn from_parts(mode: Mode, vocab: Vocabulary, indexer: Option<SubwordIndexer>, input: Matrix, output: Matrix) -> Self {
        EmbeddingModel {
            mode,
            vocab,
            indexer,
            input,
            output,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.input.cols()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn indexer(&self) -> Option<&SubwordIndexer> {
        self.indexer.as_ref()
    }

    pub fn input(&self) -> &Matrix {
        &self.input
    }

    pub fn input_mut(&mut self) -> &mut Matrix {
        &mut self.input
    }

    pub fn output(&self) -> &Matrix {
        &self.output
    }

    /// Input rows whose mean represents `word`: the word's own row (when in
    /// vocabulary) followed by its n-gram rows in subword mode.
    pub fn input_rows(&self, word: &str) -> Result<Vec<usize>, ModelError> {
        let own = self.vocab.index_of(word);
        match (&self.indexer, own) {
            (None, Some(idx)) => Ok(vec![idx]),
            (None, None) => Err(ModelError::OutOfVocabulary(word.to_owned())),
            (Some(ix), own) => {
                let mut rows: Vec<usize> = own.into_iter().collect();
                if !word.is_empty() {
                    rows.extend(ix.extract_ngrams(word));
                }
                if rows.is_empty() {
                    return Err(ModelError::NoRepresentableNgrams(word.to_owned()));
                }
                Ok(rows)
            }
        }
    }

    pub fn word_vector(&self, word: &str) -> Result<Vec<f64>, ModelError> {
        Ok(mean_rows(&self.input, &self.input_rows(word)?))
    }

    /// Composed vector for every vocabulary word, plus the bucket rows in
    /// subword mode.
    pub fn to_embeddings(&self) -> WordEmbeddings {
        let dim = self.dim();
        let mut data = Vec::with_capacity(self.vocab.len() * dim);
        for word in self.vocab.words() {
            let v = self.word_vector(word).expect("vocabulary words are representable");
            data.extend(v.into_iter().map(|x| x as f32));
        }
        let emb = WordEmbeddings::new(self.vocab.words().to_vec(), Matrix::from_vec(self.vocab.len(), dim, data));
        match &self.indexer {
            None => emb,
            Some(ix) => {
                let start = ix.vocab_size() * dim;
                let rows = Matrix::from_vec(ix.bucket_count(), dim, self.input.as_slice()[start..].to_vec());
                let buckets = NgramBuckets::new(ix.min_n(), ix.max_n(), rows).expect("indexer already validated");
                emb.with_buckets(buckets).expect("bucket dimension matches")
            }
        }
    }
}
