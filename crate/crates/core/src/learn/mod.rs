//! Normalisation, retained-variance PCA, RBF support vector machines trained
//! with SMO, grid search, and the serialized model bundle.

mod bundle;
mod grid;
mod normalize;
mod pca;
mod svm;

use thiserror::Error;

pub use bundle::{load_model, save_model, train_bundle, ModelBundle, TrainOptions, FORMAT_VERSION};
pub use grid::{grid_search, GridPoint, GridReport, SvmGrid};
pub use normalize::{fit_normalizer, NormalizerStats};
pub use pca::{fit_pca, retained_components, PcaTransform, DEFAULT_PCA_EPSILON};
pub use svm::{rbf_kernel, train_svm, SmoOptions, SvmHyperParams, SvmModel, TrainReport};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { got: usize, required: usize },
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("covariance matrix has no variance")]
    DegenerateCovariance,
    #[error("training data contains a single class")]
    SingleClass,
    #[error("label {0} is not +1 or -1")]
    InvalidLabel(f64),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("non-finite value in training data")]
    NonFinite,
    #[error(
        "SMO did not converge after {iterations} iterations and {kernel_evaluations} kernel evaluations (gap {gap:.3e})"
    )]
    ConvergenceFailure {
        iterations: u64,
        kernel_evaluations: u64,
        gap: f64,
    },
    #[error("model format: {0}")]
    VersionMismatch(String),
    #[error("corrupt model: {0}")]
    CorruptModel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
