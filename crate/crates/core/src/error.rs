use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input is {len} bytes, the limit is {max}")]
    InputTooLarge { len: usize, max: usize },

    #[error("span [{start}, {end}) is out of bounds for a document of {len} tokens")]
    SpanOutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("span covers {len} tokens, at most {max} are supported")]
    SpanTooLong { len: usize, max: usize },

    #[error("expected fill options for {expected} positions, got {got}")]
    OptionsMismatch { expected: usize, got: usize },

    #[error("token scorer returned {got} scores for {expected} tokens")]
    TokenScoreLength { expected: usize, got: usize },

    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),

    #[error("sample distribution is empty")]
    EmptyDistribution,

    #[error("sample contains a non-finite value")]
    NonFiniteSample,

    #[error("at least two paired samples are required, got {0}")]
    TooFewSamples(usize),

    #[error("rank correlation is undefined: every pair is tied in {0}")]
    UndefinedCorrelation(&'static str),

    #[error("proportion needs at least one trial")]
    EmptySample,

    #[error("{successes} successes out of {trials} trials")]
    InvalidProportion { successes: u64, trials: u64 },

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("cannot read {}", path.display())]
    Read { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })
}

impl Error {
    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }
}
