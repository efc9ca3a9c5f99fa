//! Audio ingestion, segmentation and corpus splitting.

mod manifest;
mod split;
mod vad;
mod wav;

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use manifest::{
    annotate_segments, load_segments, parse_manifest, parse_manifest_str, write_manifest,
    write_manifest_string, SegmentDescriptor, MANIFEST_HEADER,
};
pub use split::{split_corpus, Annotated, CorpusSplit};
pub use vad::{vad_segments, VadConfig};
pub use wav::{load_wav, write_wav};

/// The only sample rate accepted by the pipeline.
pub const SAMPLE_RATE: u32 = 16_000;

/// 25 ms at 16 kHz.
pub const FRAME_LEN: usize = 400;

/// 10 ms at 16 kHz.
pub const FRAME_SHIFT: usize = 160;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt audio file: {0}")]
    CorruptFile(String),
    #[error("manifest row {row}: {message}")]
    ParseError { row: usize, message: String },
    #[error("manifest row {row}: segment end {end_ms} ms exceeds audio length {audio_ms} ms")]
    RangeError { row: usize, end_ms: u64, audio_ms: u64 },
    #[error("segment has {samples} samples, at least {required} needed")]
    SegmentTooShort { samples: usize, required: usize },
    #[error("no speaker has any confirmation segment")]
    NoConfirmations,
    #[error("cannot split {speakers} eligible speaker(s) into non-empty train and test sides")]
    SplitImpossible { speakers: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Mono PCM audio with amplitudes in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    /// Wraps samples, rejecting rates other than 16 kHz and non-finite or
    /// out-of-range amplitudes.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, CorpusError> {
        if sample_rate != SAMPLE_RATE {
            return Err(CorpusError::UnsupportedFormat(format!(
                "sample rate {sample_rate} Hz, expected {SAMPLE_RATE} Hz"
            )));
        }
        if let Some(pos) = samples
            .iter()
            .position(|s| !s.is_finite() || s.abs() > 1.0)
        {
            return Err(CorpusError::InvalidArgument(format!(
                "sample {pos} is {} (must be finite and within [-1, 1])",
                samples[pos]
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_ms(&self) -> u64 {
        samples_to_ms(self.samples.len())
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Confirmation,
    Other,
}

impl Label {
    /// +1 for confirmations, -1 otherwise.
    pub fn sign(self) -> f64 {
        match self {
            Label::Confirmation => 1.0,
            Label::Other => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Confirmation => "confirmation",
            Label::Other => "other",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "confirmation" => Ok(Label::Confirmation),
            "other" => Ok(Label::Other),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

/// A span of continuous speech cut out of a source recording.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSegment {
    pub source_id: String,
    pub speaker_id: String,
    pub start_ms: u64,
    pub end_ms: u64,
    pub samples: Vec<f64>,
    pub label: Label,
}

impl AudioSegment {
    /// Stable identity string, `source:start-end`.
    pub fn id(&self) -> String {
        format!("{}:{}-{}", self.source_id, self.start_ms, self.end_ms)
    }

    pub fn frame_count(&self) -> usize {
        frame_count(self.samples.len())
    }
}

/// One 25 ms analysis frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub index: usize,
    pub segment_id: Arc<str>,
    pub samples: Vec<f64>,
}

/// Number of whole frames in `n` samples; partial trailing frames are dropped.
pub fn frame_count(n: usize) -> usize {
    if n < FRAME_LEN {
        0
    } else {
        (n - FRAME_LEN) / FRAME_SHIFT + 1
    }
}

/// Cuts a segment into overlapping frames.
pub fn frame_stream(segment: &AudioSegment) -> Result<Vec<Frame>, CorpusError> {
    frames_from_samples(&segment.samples, Arc::from(segment.id()))
}

pub fn frames_from_samples(
    samples: &[f64],
    segment_id: Arc<str>,
) -> Result<Vec<Frame>, CorpusError> {
    if samples.len() < FRAME_LEN {
        return Err(CorpusError::SegmentTooShort {
            samples: samples.len(),
            required: FRAME_LEN,
        });
    }
    Ok(samples
        .windows(FRAME_LEN)
        .step_by(FRAME_SHIFT)
        .enumerate()
        .map(|(index, w)| Frame {
            index,
            segment_id: Arc::clone(&segment_id),
            samples: w.to_vec(),
        })
        .collect())
}

pub(crate) fn samples_to_ms(n: usize) -> u64 {
    (n as u64 * 1000) / SAMPLE_RATE as u64
}

pub(crate) fn ms_to_samples(ms: u64) -> usize {
    (ms * SAMPLE_RATE as u64 / 1000) as usize
}
