//! Yorùbá corpus cleaning, diacritic normalization, skipgram
//! negative-sampling embeddings (word and subword) and intrinsic evaluation.

pub mod corpus;
pub mod embeddings;
pub mod eval;
pub mod experiment;
pub mod matrix;
pub mod pipeline;
pub mod sgns;
pub mod textnorm;
pub mod vocab;

use std::io;

use thiserror::Error;

pub use embeddings::{FormatError, ModelError, WordEmbeddings};
pub use eval::EvalError;
pub use sgns::TrainError;
pub use textnorm::TextNormError;
pub use vocab::VocabError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    TextNorm(#[from] TextNormError),
    #[error(transparent)]
    Vocab(#[from] VocabError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Config(String),
    #[error("{0} is empty")]
    EmptyInput(String),
    #[error("{path}: line {line}: invalid UTF-8")]
    Encoding { path: String, line: usize },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

/// Broad failure class, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numeric,
}

impl Error {
    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Train(TrainError::NonFiniteLoss { .. }) => ErrorClass::Numeric,
            Error::Eval(EvalError::ZeroVector | EvalError::DegenerateInput) => ErrorClass::Numeric,
            Error::Config(_) | Error::Train(TrainError::InvalidConfig(_)) => ErrorClass::Usage,
            _ => ErrorClass::Data,
        }
    }
}

impl From<io::Error> for Error {
    fn from(source: io::Error) -> Self {
        Error::io("i/o error", source)
    }
}
