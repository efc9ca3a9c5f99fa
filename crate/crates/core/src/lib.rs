//! Detection of non-lexical confirmations ("mhm", "aha") in speech audio.
//!
//! The crate is organised along the processing chain:
//!
//! - [`corpus`]: WAV and manifest ingestion, voice activity detection, framing
//!   and speaker-independent corpus splits.
//! - [`dsp`]: per-frame primitives (windows, spectra, MFCCs, Savitzky-Golay
//!   differentiation, LPC, polynomial roots, formants, Yin pitch).
//! - [`featset`]: the seven feature sets built from those primitives,
//!   including stacking over 15 frames.
//! - [`learn`]: z-score normalisation, retained-variance PCA, an RBF support
//!   vector machine trained with SMO, grid search and model files.
//! - [`pipeline`]: offline and streaming (rolling majority vote) classification.
//! - [`eval`]: class balancing, leave-one-user-out cross-validation, ROC/AUC
//!   and segment metrics.
//! - [`synth`]: a synthetic corpus generator used for end-to-end checks.

pub mod corpus;
pub mod dsp;
pub mod eval;
pub mod featset;
pub mod learn;
pub mod pipeline;
pub mod synth;

mod error;

pub use error::{Error, ErrorCategory, Result};
