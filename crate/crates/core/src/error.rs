use thiserror::Error;

use crate::corpus::CorpusError;
use crate::dsp::DspError;
use crate::eval::EvalError;
use crate::featset::FeatureError;
use crate::learn::LearnError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure class, used by the command line front end to pick an exit
/// status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Config(String),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) => ErrorCategory::Config,
            Error::Corpus(_) | Error::Feature(_) | Error::Eval(_) => ErrorCategory::Data,
            Error::Dsp(e) => match e {
                DspError::NumericalFailure { .. } => ErrorCategory::Numerical,
                _ => ErrorCategory::Data,
            },
            Error::Learn(e) => match e {
                LearnError::ConvergenceFailure { .. } | LearnError::DegenerateCovariance => {
                    ErrorCategory::Numerical
                }
                LearnError::InvalidParams(_) => ErrorCategory::Config,
                _ => ErrorCategory::Data,
            },
        }
    }
}
