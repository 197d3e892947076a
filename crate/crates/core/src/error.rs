use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite coordinate in valence-arousal point ({valence}, {arousal})")]
    NonFinitePoint { valence: f64, arousal: f64 },

    #[error("point ({valence}, {arousal}) lies on a midline (midpoint {midpoint})")]
    AmbiguousPoint { valence: f64, arousal: f64, midpoint: f64 },

    #[error("invalid distribution: {0}")]
    DistributionInvalid(String),

    #[error("expected label set {expected}, found {found:?}")]
    WrongLabelSet { expected: String, found: Vec<String> },

    #[error("distributions do not share one label set: {left:?} vs {right:?}")]
    MixedLabelSets { left: Vec<String>, right: Vec<String> },

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("cannot parse {what} from {value:?}")]
    InvalidValue { what: &'static str, value: String },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("duplicate word {0:?} in lexicon")]
    DuplicateWord(String),

    #[error("rating {value} for {word:?} outside scale [{min}, {max}]")]
    OutOfScaleRating {
        word: String,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid lexicon scale: min {min}, midpoint {midpoint}, max {max}")]
    InvalidScale { min: f64, midpoint: f64, max: f64 },

    #[error("no word of {0:?} found in lexicon")]
    NotInLexicon(String),

    #[error("term {0:?} appears more than once in mapping table")]
    DuplicateTerm(String),

    #[error("cannot chunk empty text")]
    EmptyText,

    #[error("invalid chunking parameters: max_tokens {max_tokens}, overlap {overlap}")]
    InvalidChunking { max_tokens: usize, overlap: usize },

    #[error("nothing to aggregate")]
    NoChunks,

    #[error("audio and text maxima tie at {0}")]
    Tie(f64),

    #[error("fusion weight {0} outside [0, 1]")]
    WeightOutOfRange(f64),

    #[error("grid step {0} does not split [0, 1] into uniform points")]
    InvalidGridStep(f64),

    #[error("dataset has no usable records")]
    EmptyDataset,

    #[error("duplicate song id {0:?}")]
    DuplicateSongId(String),

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
