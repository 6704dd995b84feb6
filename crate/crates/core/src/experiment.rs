//! Repeated train-and-evaluate runs with averaged scores.

use crate::embeddings::WordEmbeddings;
use crate::eval::{evaluate, AnalogyOptions, AnalogySet, EvalReport, WordPairSet};
use crate::sgns::{train, EmbeddingModel, IndexedCorpus, TrainConfig};
use crate::vocab::Vocabulary;
use crate::Error;

/// A tokenized training corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub name: String,
    pub sentences: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Default)]
pub struct EvalSets {
    pub analogy: Option<AnalogySet>,
    pub wordpairs: Option<WordPairSet>,
    pub options: AnalogyOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub vocab_size: usize,
    /// One report per repeat, in seed order.
    pub runs: Vec<EvalReport>,
    pub mean: EvalReport,
}

/// Train `repeats` models with seeds `config.seed + r` and average their
/// evaluation reports. The vocabulary is built once and shared by all runs.
pub fn run_experiment(dataset: &Dataset, sets: &EvalSets, config: &TrainConfig, repeats: usize) -> Result<ExperimentResult, Error> {
    run_experiment_with(dataset, sets, config, repeats, |_, _| Ok(()))
}

/// As [`run_experiment`], handing each trained model to `on_model` along with
/// its repeat index.
pub fn run_experiment_with<F>(
    dataset: &Dataset,
    sets: &EvalSets,
    config: &TrainConfig,
    repeats: usize,
    mut on_model: F,
) -> Result<ExperimentResult, Error>
where
    F: FnMut(usize, &EmbeddingModel) -> Result<(), Error>,
{
    if repeats == 0 {
        return Err(Error::Config("repeats must be at least 1".into()));
    }
    let vocab = Vocabulary::from_counts(crate::vocab::count_tokens(&dataset.sentences), config.min_count)?;
    let corpus = IndexedCorpus::new(&dataset.sentences, &vocab);
    let mut runs = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let run_config = TrainConfig {
            seed: config.seed.wrapping_add(r as u64),
            ..config.clone()
        };
        log::info!(
            "{}: {} model, run {}/{} (seed {})",
            dataset.name,
            config.mode,
            r + 1,
            repeats,
            run_config.seed
        );
        let out = train(&corpus, &vocab, &run_config)?;
        on_model(r, &out.model)?;
        let emb: WordEmbeddings = out.model.to_embeddings();
        runs.push(evaluate(&emb, sets.analogy.as_ref(), sets.wordpairs.as_ref(), &sets.options)?);
    }
    let mean = EvalReport::mean(&runs)?;
    Ok(ExperimentResult {
        vocab_size: vocab.len(),
        runs,
        mean,
    })
}
