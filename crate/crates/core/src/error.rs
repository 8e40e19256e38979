use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("no co-occurrence mass")]
    NoCooccurrenceMass,

    #[error("embedding dimension {k} exceeds min(rows, cols) = {max}")]
    DimensionTooLarge { k: usize, max: usize },

    #[error("out-of-vocabulary: {0}")]
    OutOfVocabulary(String),

    #[error("no frequency-matched candidate for '{0}'")]
    NoFrequencyMatchedCandidate(String),

    #[error("too few training examples: {0}")]
    TooFewTrainingExamples(usize),

    #[error("no training data for verb '{0}'")]
    NoTrainingData(String),

    #[error("non-finite loss for '{verb}' at epoch {epoch}, batch {batch}")]
    NonFiniteLoss {
        verb: String,
        epoch: usize,
        batch: usize,
    },

    #[error("degenerate ranking: {0}")]
    DegenerateRanking(String),

    #[error("no scorable pairs")]
    NoScorablePairs,

    #[error("degenerate normalization: {0} scores are constant")]
    DegenerateNormalization(String),

    #[error("cannot compare sentence representations: {0}")]
    ReprMismatch(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{0}")]
    Invalid(String),

    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub fn in_stage(self, stage: &str) -> Self {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}
