use thiserror::Error;
use tsxplain::evaluation::EvalError;
use tsxplain::explainer::ExplainError;
use tsxplain::model::ModelError;
use tsxplain::segmentation::SegmentError;
use tsxplain::types::{DatasetError, SampleError};

use crate::csv_io::CsvError;

/// Failure classes, one per process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input file or parameters.
    #[error("{0}")]
    Input(String),
    /// The black-box model failed or could not be reached.
    #[error("model error: {0}")]
    Model(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Model(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn input(message: impl std::fmt::Display) -> Self {
        CliError::Input(message.to_string())
    }

    pub fn internal(message: impl std::fmt::Display) -> Self {
        CliError::Internal(message.to_string())
    }
}

impl From<CsvError> for CliError {
    fn from(e: CsvError) -> Self {
        match e {
            CsvError::Io(_) | CsvError::Parse { .. } | CsvError::Sample(_) => CliError::Input(e.to_string()),
        }
    }
}

impl From<SampleError> for CliError {
    fn from(e: SampleError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SegmentError> for CliError {
    fn from(e: SegmentError) -> Self {
        CliError::Input(format!("segmentation: {e}"))
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidLocator { .. } | ModelError::UnknownModel(_) => CliError::Input(e.to_string()),
            _ => CliError::Model(e.to_string()),
        }
    }
}

impl From<ExplainError> for CliError {
    fn from(e: ExplainError) -> Self {
        match e {
            ExplainError::Model(m) => m.into(),
            ExplainError::Segment(s) => s.into(),
            ExplainError::InvalidConfig(_) | ExplainError::Replace(_) => CliError::Input(e.to_string()),
            ExplainError::Surrogate(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Model(m) => m.into(),
            EvalError::Explain { window, source } => match CliError::from(source) {
                CliError::Input(m) => CliError::Input(format!("window {window}: {m}")),
                CliError::Model(m) => CliError::Model(format!("window {window}: {m}")),
                CliError::Internal(m) => CliError::Internal(format!("window {window}: {m}")),
            },
            EvalError::InvalidPercentile(_) | EvalError::InvalidConfig(_) => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("i/o: {e}"))
    }
}
