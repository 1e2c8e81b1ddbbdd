//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("unknown taxon `{0}`")]
    UnknownTaxon(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {} point(s) outside the window (lines {})", lines.len(), fmt_lines(lines))]
    OutOfWindow { path: PathBuf, lines: Vec<usize> },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid model graph: {}", violations.join("; "))]
    InvalidGraph { violations: Vec<String> },

    #[error("cycle in parent assignments involving `{0}`")]
    Cycle(String),

    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),

    #[error("monte carlo mass requires at least one sample")]
    ZeroSamples,

    #[error("taxon `{0}` has the wrong role for this operation")]
    Role(String),

    #[error("initial state has zero likelihood: {0}")]
    Initialization(String),

    #[error("too few points: {0}")]
    TooFewPoints(String),

    #[error("estimator requires a rectangular window")]
    RectWindowRequired,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

fn fmt_lines(lines: &[usize]) -> String {
    const MAX_SHOWN: usize = 10;
    let shown: Vec<String> = lines.iter().take(MAX_SHOWN).map(|l| l.to_string()).collect();
    if lines.len() > MAX_SHOWN {
        format!("{}, ...", shown.join(", "))
    } else {
        shown.join(", ")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
