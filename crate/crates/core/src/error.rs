use thiserror::Error;

use crate::domain::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("incompatible loss: {loss} cannot score {output} outputs")]
    IncompatibleLoss { loss: String, output: String },

    #[error("invalid conversion rate: lambda must be a finite value > 0")]
    InvalidConversionRate,

    #[error("invalid cost: total cost must be finite and >= 0")]
    InvalidCost,

    #[error("heterogeneous episodes: {0}")]
    HeterogeneousEpisodes(String),

    #[error("no episodes supplied")]
    NoEpisodes,

    #[error("insufficient records: need at least 2, got {0}")]
    InsufficientRecords(usize),

    #[error("invalid bootstrap parameters: {0}")]
    InvalidBootstrap(String),

    #[error("invalid window size: must be >= 1")]
    InvalidWindow,

    #[error("protocol requires real-scalar outputs")]
    RequiresRealScalar,

    #[error("oracle requires ground truth")]
    OracleRequiresTruth,

    #[error("invalid protocol {field}: {message}")]
    InvalidProtocol { field: String, message: String },

    #[error("value mismatch: {0}")]
    ValueMismatch(String),

    #[error("invalid task: {0}")]
    InvalidTask(String),

    #[error("invalid episode: {}", summarize(.0))]
    InvalidEpisode(Vec<Violation>),

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid report: {0}")]
    InvalidReport(String),
}

fn summarize(violations: &[Violation]) -> String {
    match violations {
        [] => "no violations".to_string(),
        [only] => only.to_string(),
        [first, rest @ ..] => format!("{first} (and {} more)", rest.len()),
    }
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
