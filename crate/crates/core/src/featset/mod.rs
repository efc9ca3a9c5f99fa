//! The seven evaluated feature sets and their per-frame producers.
//!
//! Every feature set is computed in two stages: a base vector per frame
//! (13 MFCCs, the first two formants, or the pitch) and a context stage that
//! either passes the base vector through, adds Savitzky-Golay derivatives,
//! stacks 15 consecutive base vectors, or takes their standard deviation.
//! Stacking is causal: the vector emitted for frame `t` covers frames
//! `t-14 ..= t`.

mod dump;
mod stream;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{frame_stream, AudioSegment, CorpusError, Frame, Label};
use crate::dsp::{DspError, WindowKind, MFCC_COUNT};

pub use dump::{read_dump, write_dump, DumpMeta};
pub use stream::{FeatureExtractor, FeatureStream, StackBuffer};

pub const STACK_DEPTH: usize = 15;

/// Frames required by the Savitzky-Golay filters of the delta feature set.
pub const DELTA_MIN_FRAMES: usize = 7;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("segment has {frames} frames, feature set needs at least {required}")]
    SegmentTooShort { frames: usize, required: usize },
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("unknown feature set `{0}`")]
    UnknownKind(String),
    #[error("feature dump {path}: {message}")]
    Dump { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    Mfcc,
    MfccDelta,
    StackedMfcc,
    FormantSd,
    StackedFormants,
    Pitch,
    StackedPitch,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 7] = [
        FeatureKind::Mfcc,
        FeatureKind::MfccDelta,
        FeatureKind::StackedMfcc,
        FeatureKind::FormantSd,
        FeatureKind::StackedFormants,
        FeatureKind::Pitch,
        FeatureKind::StackedPitch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Mfcc => "mfcc",
            FeatureKind::MfccDelta => "mfcc-delta",
            FeatureKind::StackedMfcc => "stacked-mfcc",
            FeatureKind::FormantSd => "formant-sd",
            FeatureKind::StackedFormants => "stacked-formants",
            FeatureKind::Pitch => "pitch",
            FeatureKind::StackedPitch => "stacked-pitch",
        }
    }

    /// Human readable label as used in result tables.
    pub fn title(self) -> &'static str {
        match self {
            FeatureKind::Mfcc => "MFCCs",
            FeatureKind::MfccDelta => "MFCCs Delta Deltadelta",
            FeatureKind::StackedMfcc => "Stacked MFCCs",
            FeatureKind::FormantSd => "SD of formants",
            FeatureKind::StackedFormants => "Stacked formants",
            FeatureKind::Pitch => "Pitch",
            FeatureKind::StackedPitch => "Stacked pitch",
        }
    }

    pub(crate) fn base(self) -> BaseFeature {
        match self {
            FeatureKind::Mfcc | FeatureKind::MfccDelta | FeatureKind::StackedMfcc => {
                BaseFeature::Mfcc
            }
            FeatureKind::FormantSd | FeatureKind::StackedFormants => BaseFeature::Formants,
            FeatureKind::Pitch | FeatureKind::StackedPitch => BaseFeature::Pitch,
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| FeatureError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BaseFeature {
    Mfcc,
    Formants,
    Pitch,
}

impl BaseFeature {
    pub(crate) fn dimension(self) -> usize {
        match self {
            BaseFeature::Mfcc => MFCC_COUNT,
            BaseFeature::Formants => 2,
            BaseFeature::Pitch => 1,
        }
    }
}

/// Which feature set to compute and over how many frames context is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureSetConfig {
    pub kind: FeatureKind,
    pub stack_depth: usize,
}

impl FeatureSetConfig {
    pub fn new(kind: FeatureKind) -> Self {
        Self {
            kind,
            stack_depth: STACK_DEPTH,
        }
    }

    /// Length of every emitted vector.
    pub fn dimension(&self) -> usize {
        let base = self.kind.base().dimension();
        match self.kind {
            FeatureKind::Mfcc | FeatureKind::Pitch => base,
            FeatureKind::MfccDelta => 3 * base,
            FeatureKind::StackedMfcc | FeatureKind::StackedFormants | FeatureKind::StackedPitch => {
                self.stack_depth * base
            }
            FeatureKind::FormantSd => base,
        }
    }

    /// Frames consumed before the first vector appears; `N_out = N_in - (context - 1)`.
    pub fn context(&self) -> usize {
        match self.kind {
            FeatureKind::StackedMfcc
            | FeatureKind::StackedFormants
            | FeatureKind::StackedPitch
            | FeatureKind::FormantSd => self.stack_depth,
            FeatureKind::Mfcc | FeatureKind::Pitch | FeatureKind::MfccDelta => 1,
        }
    }

    /// Shortest segment, in frames, that yields output.
    pub fn min_frames(&self) -> usize {
        match self.kind {
            FeatureKind::MfccDelta => DELTA_MIN_FRAMES,
            _ => self.context(),
        }
    }

    pub fn output_count(&self, frames: usize) -> usize {
        if frames < self.min_frames() {
            0
        } else {
            frames - (self.context() - 1)
        }
    }

    pub fn window_kind(&self) -> WindowKind {
        window_kind_for(self)
    }

    /// Whether the trained model applies PCA after normalisation.
    pub fn uses_pca(&self) -> bool {
        matches!(
            self.kind,
            FeatureKind::MfccDelta | FeatureKind::StackedMfcc | FeatureKind::StackedPitch
        )
    }
}

impl From<FeatureKind> for FeatureSetConfig {
    fn from(kind: FeatureKind) -> Self {
        Self::new(kind)
    }
}

pub fn dimension(config: &FeatureSetConfig) -> usize {
    config.dimension()
}

/// Blackman-Harris for the MFCC family, Hann for formants and pitch.
pub fn window_kind_for(config: &FeatureSetConfig) -> WindowKind {
    match config.kind.base() {
        BaseFeature::Mfcc => WindowKind::BlackmanHarris4,
        BaseFeature::Formants | BaseFeature::Pitch => WindowKind::Hann,
    }
}

/// One emitted feature vector, tagged with the frame it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub frame_index: usize,
    pub kind: FeatureKind,
}

/// Computes feature vectors for the frames of one segment, in order.
pub fn extract(
    frames: &[Frame],
    config: &FeatureSetConfig,
) -> Result<Vec<FeatureVector>, FeatureError> {
    FeatureExtractor::new(*config).extract(frames)
}

/// Feature vectors of one labelled segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentFeatures {
    pub segment_id: String,
    pub speaker_id: String,
    pub label: Label,
    pub vectors: Vec<FeatureVector>,
}

impl SegmentFeatures {
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.iter().map(|v| v.values.as_slice())
    }
}

/// Extracts every segment in parallel, preserving input order.
pub fn extract_corpus(
    segments: &[AudioSegment],
    config: &FeatureSetConfig,
) -> Result<Vec<SegmentFeatures>, FeatureError> {
    let extractor = FeatureExtractor::new(*config);
    segments
        .par_iter()
        .map(|seg| {
            let frames = frame_stream(seg)?;
            let vectors = extractor.extract(&frames)?;
            Ok(SegmentFeatures {
                segment_id: seg.id(),
                speaker_id: seg.speaker_id.clone(),
                label: seg.label,
                vectors,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_match_table() {
        let expected = [
            (FeatureKind::Mfcc, 13),
            (FeatureKind::MfccDelta, 39),
            (FeatureKind::StackedMfcc, 195),
            (FeatureKind::FormantSd, 2),
            (FeatureKind::StackedFormants, 30),
            (FeatureKind::Pitch, 1),
            (FeatureKind::StackedPitch, 15),
        ];
        for (kind, dim) in expected {
            assert_eq!(dimension(&FeatureSetConfig::new(kind)), dim, "{kind}");
        }
    }

    #[test]
    fn window_choice() {
        use FeatureKind::*;
        for k in [Mfcc, MfccDelta, StackedMfcc] {
            assert_eq!(window_kind_for(&k.into()), WindowKind::BlackmanHarris4);
        }
        for k in [FormantSd, StackedFormants, Pitch, StackedPitch] {
            assert_eq!(window_kind_for(&k.into()), WindowKind::Hann);
        }
    }

    #[test]
    fn output_count_law() {
        let stacked = FeatureSetConfig::new(FeatureKind::StackedFormants);
        assert_eq!(stacked.output_count(98), 84);
        assert_eq!(stacked.output_count(14), 0);
        assert_eq!(FeatureSetConfig::new(FeatureKind::Mfcc).output_count(98), 98);
        let delta = FeatureSetConfig::new(FeatureKind::MfccDelta);
        assert_eq!(delta.output_count(98), 98);
        assert_eq!(delta.output_count(6), 0);
    }

    #[test]
    fn pca_membership() {
        let with: Vec<_> = FeatureKind::ALL
            .into_iter()
            .filter(|k| FeatureSetConfig::new(*k).uses_pca())
            .collect();
        assert_eq!(
            with,
            [FeatureKind::MfccDelta, FeatureKind::StackedMfcc, FeatureKind::StackedPitch]
        );
    }

    #[test]
    fn kind_names_round_trip() {
        for k in FeatureKind::ALL {
            assert_eq!(k.name().parse::<FeatureKind>().unwrap(), k);
        }
        assert_eq!("Stacked_Formants".parse::<FeatureKind>().unwrap(), FeatureKind::StackedFormants);
        assert!("loudness".parse::<FeatureKind>().is_err());
    }
}
