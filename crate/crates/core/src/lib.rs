//! Music sentiment analysis downstream of the neural models.
//!
//! The crate maps mood annotations and tags onto the four quadrants of the
//! valence–arousal plane, folds chunked lyrics predictions into one
//! distribution per song, fuses audio and text class distributions (max
//! probability, average, weighted blend with a weight sweep) and reports
//! per-class precision, recall and F-score.
//!
//! Model inference happens elsewhere; its output arrives as a predictions
//! JSON file (see [`ingest`]).
//!
//! Batch work (the weight sweep and batch fusion) runs on rayon when the
//! default `parallel` feature is on; see [`Execution`].

pub mod chunker;
pub mod cli;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod ingest;
pub mod lexicon;
pub mod model;
mod par;
pub mod report;

use std::fmt;
use std::path::Path;

use serde::Serialize;

pub use error::{Error, Result};
pub use model::{ClassDistribution, LabelSpace, Modality, Quadrant, VaPoint};
pub use par::Execution;

/// A non-fatal problem tied to one term, record or file location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub subject: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

/// Tab for `.tsv`/`.tab`/`.txt` files, comma otherwise.
pub fn delimiter_for(path: &Path) -> u8 {
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv" | "tab" | "txt") => b'\t',
        _ => b',',
    }
}
