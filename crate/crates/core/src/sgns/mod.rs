//! Skipgram with negative sampling, in word and subword mode, trained with
//! lock-free asynchronous SGD.

mod model;
mod shared;
mod step;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use self::model::EmbeddingModel;
pub use self::step::{sigmoid, train_step, update_target, Sigmoid, SigmoidMode};

use self::shared::SharedMatrix;
use crate::vocab::{NegativeTable, SubwordIndexer, VocabError, Vocabulary, NEGATIVE_EXPONENT};

/// Redraws allowed when a negative sample hits the positive context.
pub const NEGATIVE_RETRIES: usize = 16;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("corpus has no in-vocabulary tokens")]
    EmptyCorpus,
    #[error("non-finite value during epoch {epoch}: {detail}")]
    NonFiniteLoss { epoch: usize, detail: String },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Vocab(#[from] VocabError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// One vector per vocabulary word.
    #[default]
    Word,
    /// Word vector plus hashed character n-gram vectors, averaged.
    Subword,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Word => "word",
            Mode::Subword => "subword",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "word" | "word2vec" => Ok(Mode::Word),
            "subword" => Ok(Mode::Subword),
            other => Err(format!("unknown mode {other:?} (expected word or subword)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    /// Maximum context offset; the effective window is drawn per position
    /// from `1..=window`.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    /// Subsampling threshold `t`.
    pub subsample: f64,
    pub mode: Mode,
    pub seed: u64,
    pub workers: usize,
    pub min_count: u64,
    pub bucket_count: usize,
    pub min_n: usize,
    pub max_n: usize,
    pub sigmoid: SigmoidMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 300,
            window: 4,
            negatives: 5,
            epochs: 5,
            lr_start: 0.05,
            lr_end: 0.0001,
            subsample: crate::vocab::DEFAULT_SUBSAMPLE,
            mode: Mode::Word,
            seed: 1,
            workers: 1,
            min_count: crate::vocab::DEFAULT_MIN_COUNT,
            bucket_count: SubwordIndexer::DEFAULT_BUCKETS,
            min_n: SubwordIndexer::DEFAULT_MIN_N,
            max_n: SubwordIndexer::DEFAULT_MAX_N,
            sigmoid: SigmoidMode::Table,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let fail = |msg: &str| Err(TrainError::InvalidConfig(msg.to_owned()));
        if self.dim == 0 {
            return fail("dim must be at least 1");
        }
        if self.window == 0 {
            return fail("window must be at least 1");
        }
        if self.negatives == 0 {
            return fail("negatives must be at least 1");
        }
        if !(self.lr_end > 0.0 && self.lr_start >= self.lr_end && self.lr_start.is_finite()) {
            return fail("learning rates must satisfy lr_start >= lr_end > 0");
        }
        if self.subsample.is_nan() || self.subsample <= 0.0 {
            return fail("subsample threshold must be positive");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        if self.min_count == 0 {
            return fail("min_count must be at least 1");
        }
        Ok(())
    }

    /// Learning rate after `progress` (in [0, 1]) of all expected work.
    pub fn learning_rate(&self, progress: f64) -> f64 {
        let p = progress.clamp(0.0, 1.0);
        (self.lr_start * (1.0 - p) + self.lr_end * p).max(self.lr_end)
    }
}

/// Sentences mapped to vocabulary ids; out-of-vocabulary tokens are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedCorpus {
    sentences: Vec<Vec<u32>>,
    tokens: u64,
}

impl IndexedCorpus {
    pub fn new<S: AsRef<str>>(sentences: &[Vec<S>], vocab: &Vocabulary) -> Self {
        let sentences: Vec<Vec<u32>> = sentences
            .iter()
            .map(|s| {
                s.iter()
                    .filter_map(|t| vocab.index_of(t.as_ref()).map(|i| i as u32))
                    .collect::<Vec<u32>>()
            })
            .filter(|s| !s.is_empty())
            .collect();
        let tokens = sentences.iter().map(|s| s.len() as u64).sum();
        IndexedCorpus { sentences, tokens }
    }

    pub fn sentences(&self) -> &[Vec<u32>] {
        &self.sentences
    }

    pub fn tokens(&self) -> u64 {
        self.tokens
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: EmbeddingModel,
    /// Mean per-pair loss of each epoch.
    pub epoch_losses: Vec<f64>,
}

struct Context<'a> {
    config: &'a TrainConfig,
    input: SharedMatrix,
    output: SharedMatrix,
    /// Input rows composing each vocabulary word.
    rows: Vec<Vec<usize>>,
    keep: Vec<f64>,
    negatives: NegativeTable,
    sigmoid: Sigmoid,
    progress: AtomicU64,
    total_work: f64,
    abort: AtomicBool,
}

#[derive(Default, Clone, Copy)]
struct EpochLoss {
    sum: f64,
    pairs: u64,
}

/// Train a model on `corpus`, whose ids must come from `vocab`.
pub fn train(corpus: &IndexedCorpus, vocab: &Vocabulary, config: &TrainConfig) -> Result<TrainOutput, TrainError> {
    config.validate()?;
    if corpus.tokens() == 0 {
        return Err(TrainError::EmptyCorpus);
    }
    let init = EmbeddingModel::initialize(vocab, config)?;
    if config.epochs == 0 {
        return Ok(TrainOutput {
            model: init,
            epoch_losses: Vec::new(),
        });
    }
    let rows = vocab
        .words()
        .iter()
        .map(|w| init.input_rows(w).expect("vocabulary words are representable"))
        .collect();
    let ctx = Context {
        config,
        input: SharedMatrix::from_matrix(init.input()),
        output: SharedMatrix::from_matrix(init.output()),
        rows,
        keep: vocab.keep_probabilities(config.subsample),
        negatives: NegativeTable::new(vocab, NEGATIVE_EXPONENT),
        sigmoid: Sigmoid::new(config.sigmoid),
        progress: AtomicU64::new(0),
        total_work: (config.epochs as u64 * corpus.tokens()) as f64,
        abort: AtomicBool::new(false),
    };

    let shard_len = corpus.sentences().len().div_ceil(config.workers).max(1);
    let shards: Vec<&[Vec<u32>]> = corpus.sentences().chunks(shard_len).collect();
    let results: Vec<Result<Vec<EpochLoss>, TrainError>> = if shards.len() == 1 {
        vec![run_worker(&ctx, shards[0], worker_seed(config.seed, 0))]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = shards
                .iter()
                .enumerate()
                .map(|(i, shard)| {
                    let ctx = &ctx;
                    scope.spawn(move || run_worker(ctx, shard, worker_seed(config.seed, i)))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("training worker panicked")).collect()
        })
    };

    let mut totals = vec![EpochLoss::default(); config.epochs];
    for result in results {
        for (total, epoch) in totals.iter_mut().zip(result?) {
            total.sum += epoch.sum;
            total.pairs += epoch.pairs;
        }
    }
    let epoch_losses = totals
        .iter()
        .map(|e| if e.pairs == 0 { 0.0 } else { e.sum / e.pairs as f64 })
        .collect();

    let input = ctx.input.into_matrix();
    let output = ctx.output.into_matrix();
    if !input.is_finite() || !output.is_finite() {
        return Err(TrainError::NonFiniteLoss {
            epoch: config.epochs,
            detail: "parameters contain non-finite values after training".into(),
        });
    }
    let model = EmbeddingModel::from_parts(config.mode, vocab.clone(), init.indexer().copied(), input, output);
    Ok(TrainOutput { model, epoch_losses })
}

fn worker_seed(seed: u64, worker: usize) -> u64 {
    // distinct stream from the initialization RNG, which uses `seed` itself
    seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(worker as u64 + 1))
}

fn run_worker(ctx: &Context<'_>, shard: &[Vec<u32>], seed: u64) -> Result<Vec<EpochLoss>, TrainError> {
    let config = ctx.config;
    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hidden = vec![0.0f32; dim];
    let mut grad = vec![0.0f32; dim];
    let mut row = vec![0.0f32; dim];
    let mut target = vec![0.0f32; dim];
    let mut kept: Vec<u32> = Vec::new();
    let mut losses = Vec::with_capacity(config.epochs);
    let sigmoid = |x: f32| ctx.sigmoid.eval(x);

    for epoch in 0..config.epochs {
        let mut epoch_loss = EpochLoss::default();
        for sentence in shard {
            if ctx.abort.load(Ordering::Relaxed) {
                return Ok(losses);
            }
            let done = ctx.progress.fetch_add(sentence.len() as u64, Ordering::Relaxed);
            let lr = config.learning_rate(done as f64 / ctx.total_work) as f32;

            kept.clear();
            for &w in sentence {
                let p = ctx.keep[w as usize];
                if p >= 1.0 || rng.gen::<f64>() < p {
                    kept.push(w);
                }
            }

            for (pos, &center) in kept.iter().enumerate() {
                let span = rng.gen_range(1..=config.window);
                let lo = pos.saturating_sub(span);
                let hi = (pos + span).min(kept.len() - 1);
                let input_rows = &ctx.rows[center as usize];
                for (offset, &context) in kept[lo..=hi].iter().enumerate() {
                    if lo + offset == pos {
                        continue;
                    }
                    // hidden = mean of the center's input rows
                    hidden.fill(0.0);
                    for &r in input_rows {
                        ctx.input.load_row(r, &mut row);
                        hidden.iter_mut().zip(&row).for_each(|(h, v)| *h += v);
                    }
                    let scale = 1.0 / input_rows.len() as f32;
                    hidden.iter_mut().for_each(|h| *h *= scale);
                    grad.fill(0.0);

                    ctx.output.load_row(context as usize, &mut target);
                    let mut loss = update_target(&hidden, &mut target, &mut grad, true, lr, sigmoid);
                    ctx.output.store_row(context as usize, &target);

                    for _ in 0..config.negatives {
                        let Some(negative) = draw_negative(&ctx.negatives, context, &mut rng) else {
                            continue;
                        };
                        ctx.output.load_row(negative, &mut target);
                        loss += update_target(&hidden, &mut target, &mut grad, false, lr, sigmoid);
                        ctx.output.store_row(negative, &target);
                    }

                    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                        ctx.abort.store(true, Ordering::Relaxed);
                        return Err(TrainError::NonFiniteLoss {
                            epoch,
                            detail: format!(
                                "center id {center}, context id {context}, lr {lr}, loss {loss}"
                            ),
                        });
                    }
                    for &r in input_rows {
                        ctx.input.add_to_row(r, &grad);
                    }
                    epoch_loss.sum += f64::from(loss);
                    epoch_loss.pairs += 1;
                }
            }
        }
        log::debug!(
            "epoch {} worker loss {:.5}",
            epoch + 1,
            epoch_loss.sum / epoch_loss.pairs.max(1) as f64
        );
        losses.push(epoch_loss);
    }
    Ok(losses)
}

fn draw_negative<R: Rng>(table: &NegativeTable, positive: u32, rng: &mut R) -> Option<usize> {
    (0..NEGATIVE_RETRIES)
        .map(|_| table.sample(rng))
        .find(|&n| n != positive as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(tokens: &str) -> Vocabulary {
        Vocabulary::build(tokens.split_whitespace(), 1).unwrap()
    }

    fn small_config() -> TrainConfig {
        TrainConfig {
            dim: 10,
            epochs: 5,
            subsample: 1.0,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig { dim: 0, ..TrainConfig::default() },
            TrainConfig { window: 0, ..TrainConfig::default() },
            TrainConfig { negatives: 0, ..TrainConfig::default() },
            TrainConfig { lr_start: 0.01, lr_end: 0.1, ..TrainConfig::default() },
            TrainConfig { lr_end: 0.0, ..TrainConfig::default() },
            TrainConfig { workers: 0, ..TrainConfig::default() },
        ] {
            assert!(matches!(bad.validate(), Err(TrainError::InvalidConfig(_))));
        }
    }

    #[test]
    fn learning_rate_decays_linearly() {
        let c = TrainConfig::default();
        assert_eq!(c.learning_rate(0.0), 0.05);
        assert!((c.learning_rate(0.5) - (0.05 + 0.0001) / 2.0).abs() < 1e-12);
        assert_eq!(c.learning_rate(1.0), 0.0001);
        assert_eq!(c.learning_rate(3.0), 0.0001);
    }

    #[test]
    fn initialization_bounds() {
        let v = vocab("a b c d");
        let config = TrainConfig { dim: 20, mode: Mode::Subword, bucket_count: 50, ..small_config() };
        let model = EmbeddingModel::initialize(&v, &config).unwrap();
        assert_eq!(model.input().rows(), 54);
        assert!(model.input().as_slice().iter().all(|x| x.abs() <= 1.0 / 20.0));
        assert!(model.input().as_slice().iter().any(|x| *x != 0.0));
        assert!(model.output().as_slice().iter().all(|x| *x == 0.0));
        assert_eq!(model.output().rows(), 4);
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let v = vocab("a b a b");
        let corpus = IndexedCorpus::new(&[vec!["a", "b", "a", "b"]], &v);
        let config = TrainConfig { epochs: 0, ..small_config() };
        let out = train(&corpus, &v, &config).unwrap();
        assert_eq!(out.model, EmbeddingModel::initialize(&v, &config).unwrap());
        assert!(out.epoch_losses.is_empty());
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let v = vocab("a b");
        let corpus = IndexedCorpus::new(&[vec!["zzz"]], &v);
        assert!(matches!(train(&corpus, &v, &small_config()), Err(TrainError::EmptyCorpus)));
    }

    #[test]
    fn repeated_pair_moves_towards_context() {
        let v = vocab("a b");
        let sentences: Vec<Vec<&str>> = vec![vec!["a", "b"]; 200];
        let corpus = IndexedCorpus::new(&sentences, &v);
        let config = small_config();
        let init = EmbeddingModel::initialize(&v, &config).unwrap();
        let trained = train(&corpus, &v, &config).unwrap().model;
        let (a, b) = (v.index_of("a").unwrap(), v.index_of("b").unwrap());
        let score = |m: &EmbeddingModel| crate::matrix::dot64(m.input().row(a), m.output().row(b));
        assert!(score(&trained) > score(&init) + 1.0, "{} vs {}", score(&trained), score(&init));
    }

    #[test]
    fn single_worker_is_deterministic() {
        let text = "a b c d e f a b c a b a";
        let v = vocab(text);
        let sentences: Vec<Vec<&str>> = vec![text.split(' ').collect(); 20];
        let corpus = IndexedCorpus::new(&sentences, &v);
        for mode in [Mode::Word, Mode::Subword] {
            let config = TrainConfig { mode, bucket_count: 100, ..small_config() };
            let first = train(&corpus, &v, &config).unwrap();
            let second = train(&corpus, &v, &config).unwrap();
            assert_eq!(first.model, second.model);
            assert_eq!(first.epoch_losses, second.epoch_losses);
        }
    }

    #[test]
    fn single_token_vocabulary_skips_negatives() {
        let v = vocab("a a a");
        let corpus = IndexedCorpus::new(&[vec!["a", "a", "a"]], &v);
        let out = train(&corpus, &v, &small_config()).unwrap();
        assert!(out.model.input().is_finite());
    }

    #[test]
    fn huge_learning_rate_fails_cleanly_or_stays_finite() {
        let text = "a b c d a b c d";
        let v = vocab(text);
        let sentences: Vec<Vec<&str>> = vec![text.split(' ').collect(); 50];
        let corpus = IndexedCorpus::new(&sentences, &v);
        let config = TrainConfig { lr_start: 1e30, lr_end: 1e30, sigmoid: SigmoidMode::Exact, ..small_config() };
        match train(&corpus, &v, &config) {
            Err(TrainError::NonFiniteLoss { .. }) => {}
            Ok(out) => assert!(out.model.input().is_finite()),
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
