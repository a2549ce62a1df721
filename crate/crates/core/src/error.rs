use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("sample size {n} is too small (need n >= {min})")]
    DegenerateSize { n: usize, min: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("too few points: have {have}, need at least {need}")]
    TooFewPoints { have: usize, need: usize },

    #[error("degenerate split: n0 = {n0}, n1 = {n1}")]
    DegenerateSplit { n0: usize, n1: usize },

    #[error("significance level {0} outside (0, 1)")]
    InvalidLevel(f64),

    #[error("split fraction {0} outside (0, 1)")]
    InvalidFraction(f64),

    #[error("interval A2 is empty for n = {n}: [{lower}, {upper}]")]
    EmptyInterval { n: usize, lower: f64, upper: f64 },

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("reference key mismatch: {0}")]
    KeyMismatch(String),

    #[error("replication {rep} at gamma = {gamma}: {source}")]
    Replication {
        gamma: f64,
        rep: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by inputs violating an operation's preconditions,
    /// as opposed to malformed input text or I/O failures.
    pub fn is_precondition(&self) -> bool {
        match self {
            Error::Parse(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => false,
            Error::Replication { source, .. } => source.is_precondition(),
            _ => true,
        }
    }
}
