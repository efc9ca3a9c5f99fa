use std::collections::VecDeque;
use std::sync::Arc;

use super::{
    BaseFeature, FeatureError, FeatureKind, FeatureSetConfig, FeatureVector, DELTA_MIN_FRAMES,
};
use crate::corpus::{Frame, FRAME_LEN, SAMPLE_RATE};
use crate::dsp::{
    apply_window, DspError, FormantPair, FormantTracker, Mfcc, MfccConfig, PitchYinFft,
    SavitzkyGolayFilter, WindowFunction, YinConfig,
};

/// FIFO of the most recent base vectors.
#[derive(Debug, Clone)]
pub struct StackBuffer {
    depth: usize,
    ring: VecDeque<Vec<f64>>,
}

impl StackBuffer {
    pub fn new(depth: usize) -> Self {
        assert!(depth > 0, "stack depth must be positive");
        Self {
            depth,
            ring: VecDeque::with_capacity(depth),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.ring.len() == self.depth
    }

    /// Adds a vector, evicting the oldest once full.
    pub fn push(&mut self, base: Vec<f64>) {
        if self.ring.len() == self.depth {
            self.ring.pop_front();
        }
        self.ring.push_back(base);
    }

    /// Oldest-first concatenation, available once the buffer is full.
    pub fn concat(&self) -> Option<Vec<f64>> {
        self.is_full()
            .then(|| self.ring.iter().flatten().copied().collect())
    }

    /// Population standard deviation of each component across the buffer.
    pub fn std_dev(&self) -> Option<Vec<f64>> {
        if !self.is_full() {
            return None;
        }
        let dim = self.ring[0].len();
        let n = self.ring.len() as f64;
        Some(
            (0..dim)
                .map(|d| {
                    // shifted by the first value so a constant run gives exactly 0
                    let k = self.ring[0][d];
                    let s: f64 = self.ring.iter().map(|v| v[d] - k).sum();
                    let s2: f64 = self.ring.iter().map(|v| (v[d] - k).powi(2)).sum();
                    ((s2 - s * s / n) / n).max(0.0).sqrt()
                })
                .collect(),
        )
    }

    pub fn clear(&mut self) {
        self.ring.clear();
    }
}

enum BaseAnalyzer {
    Mfcc(Mfcc),
    Formants(FormantTracker),
    Pitch(PitchYinFft),
}

struct Analyzers {
    window: WindowFunction,
    base: BaseAnalyzer,
    first: SavitzkyGolayFilter,
    second: SavitzkyGolayFilter,
}

/// Shared, immutable per-frame analysis for one feature set.
///
/// Cloning is cheap; every audio stream gets its own [`FeatureStream`].
#[derive(Clone)]
pub struct FeatureExtractor {
    config: FeatureSetConfig,
    analyzers: Arc<Analyzers>,
}

impl std::fmt::Debug for FeatureExtractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FeatureExtractor")
            .field("config", &self.config)
            .finish()
    }
}

impl FeatureExtractor {
    pub fn new(config: FeatureSetConfig) -> Self {
        let rate = f64::from(SAMPLE_RATE);
        let base = match config.kind.base() {
            BaseFeature::Mfcc => BaseAnalyzer::Mfcc(Mfcc::new(MfccConfig::default())),
            BaseFeature::Formants => BaseAnalyzer::Formants(FormantTracker::new(rate)),
            BaseFeature::Pitch => BaseAnalyzer::Pitch(PitchYinFft::new(YinConfig::default())),
        };
        Self {
            config,
            analyzers: Arc::new(Analyzers {
                window: WindowFunction::new(config.window_kind(), FRAME_LEN),
                base,
                first: SavitzkyGolayFilter::first_derivative(),
                second: SavitzkyGolayFilter::second_derivative(),
            }),
        }
    }

    pub fn config(&self) -> &FeatureSetConfig {
        &self.config
    }

    /// Per-frame base vector: 13 MFCCs, (F1, F2) or the pitch.
    ///
    /// Frames without usable formants (silence, or no resonance passing the
    /// frequency and bandwidth limits) give zeros.
    pub fn base_vector(&self, samples: &[f64]) -> Result<Vec<f64>, FeatureError> {
        let a = &*self.analyzers;
        let windowed = apply_window(samples, &a.window)?;
        let v = match &a.base {
            BaseAnalyzer::Mfcc(m) => m.compute(&windowed)?,
            BaseAnalyzer::Formants(t) => {
                let pair = match t.analyze(&windowed) {
                    Ok(p) => p,
                    Err(DspError::DegenerateFrame | DspError::NumericalFailure { .. }) => {
                        FormantPair::default()
                    }
                    Err(e) => return Err(e.into()),
                };
                vec![pair.f1, pair.f2]
            }
            BaseAnalyzer::Pitch(p) => vec![p.estimate(&windowed)],
        };
        Ok(v)
    }

    pub fn stream(&self) -> FeatureStream {
        FeatureStream::new(self.clone())
    }

    /// Offline extraction over a whole segment; identical to pushing every
    /// frame through a fresh stream and finishing it.
    pub fn extract(&self, frames: &[Frame]) -> Result<Vec<FeatureVector>, FeatureError> {
        let required = self.config.min_frames();
        if frames.len() < required {
            return Err(FeatureError::SegmentTooShort {
                frames: frames.len(),
                required,
            });
        }
        let mut stream = self.stream();
        let mut out = Vec::with_capacity(self.config.output_count(frames.len()));
        for frame in frames {
            out.extend(stream.push(&frame.samples)?);
        }
        out.extend(stream.finish());
        Ok(out)
    }

    /// Extraction straight from samples of one segment.
    pub fn extract_samples(&self, samples: &[f64]) -> Result<Vec<FeatureVector>, FeatureError> {
        let frames = crate::corpus::frames_from_samples(samples, Arc::from(""))?;
        self.extract(&frames)
    }
}

/// Incremental feature computation for one audio stream.
///
/// Stacked and SD kinds emit one vector per frame once 15 frames are
/// buffered. The delta kind emits the vector of frame `t` when frame `t + 3`
/// arrives (the filters are centred) and flushes the last three on
/// [`finish`](Self::finish), replicating the final frame.
pub struct FeatureStream {
    extractor: FeatureExtractor,
    stack: StackBuffer,
    /// Absolute index of the next frame to be pushed.
    frames_seen: usize,
    /// Next frame index whose delta vector is still owed.
    delta_next: usize,
}

impl FeatureStream {
    pub fn new(extractor: FeatureExtractor) -> Self {
        let depth = match extractor.config.kind {
            FeatureKind::MfccDelta => DELTA_MIN_FRAMES,
            FeatureKind::Mfcc | FeatureKind::Pitch => 1,
            _ => extractor.config.stack_depth,
        };
        Self {
            extractor,
            stack: StackBuffer::new(depth),
            frames_seen: 0,
            delta_next: 0,
        }
    }

    pub fn config(&self) -> &FeatureSetConfig {
        &self.extractor.config
    }

    pub fn frames_seen(&self) -> usize {
        self.frames_seen
    }

    /// Analyses one 400-sample frame and returns the vectors that became
    /// available.
    pub fn push(&mut self, samples: &[f64]) -> Result<Vec<FeatureVector>, FeatureError> {
        let base = self.extractor.base_vector(samples)?;
        let index = self.frames_seen;
        self.frames_seen += 1;
        self.stack.push(base);
        let kind = self.extractor.config.kind;
        let values = match kind {
            FeatureKind::Mfcc | FeatureKind::Pitch => self.stack.concat(),
            FeatureKind::StackedMfcc | FeatureKind::StackedFormants | FeatureKind::StackedPitch => {
                self.stack.concat()
            }
            FeatureKind::FormantSd => self.stack.std_dev(),
            FeatureKind::MfccDelta => {
                if self.frames_seen < DELTA_MIN_FRAMES {
                    return Ok(Vec::new());
                }
                let mut out = Vec::new();
                while self.delta_next + 3 <= index {
                    out.push(self.delta_vector(self.delta_next));
                    self.delta_next += 1;
                }
                return Ok(out);
            }
        };
        Ok(values
            .map(|values| FeatureVector {
                values,
                frame_index: index,
                kind,
            })
            .into_iter()
            .collect())
    }

    /// Flushes vectors held back for lookahead (delta kind only).
    pub fn finish(&mut self) -> Vec<FeatureVector> {
        let mut out = Vec::new();
        if self.extractor.config.kind == FeatureKind::MfccDelta
            && self.frames_seen >= DELTA_MIN_FRAMES
        {
            while self.delta_next < self.frames_seen {
                out.push(self.delta_vector(self.delta_next));
                self.delta_next += 1;
            }
        }
        out
    }

    /// Clears all context, as at a segment boundary.
    pub fn reset(&mut self) {
        self.stack.clear();
        self.frames_seen = 0;
        self.delta_next = 0;
    }

    /// Static MFCCs of frame `t` followed by their first and second
    /// Savitzky-Golay derivatives, with edge replication at both ends of
    /// what has been seen so far.
    fn delta_vector(&self, t: usize) -> FeatureVector {
        let a = &*self.extractor.analyzers;
        let newest = self.frames_seen - 1;
        let oldest = newest + 1 - self.stack.len();
        let half = a.first.half_width();
        let row = |offset: usize| -> &Vec<f64> {
            let abs = (t + offset).saturating_sub(half).min(newest);
            &self.stack.ring[abs - oldest]
        };
        let dim = self.stack.ring[0].len();
        let mut values = Vec::with_capacity(3 * dim);
        values.extend_from_slice(row(half));
        for filter in [&a.first, &a.second] {
            for d in 0..dim {
                let acc: f64 = filter
                    .coefficients()
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * row(j)[d])
                    .sum();
                values.push(acc / filter.norm());
            }
        }
        FeatureVector {
            values,
            frame_index: t,
            kind: FeatureKind::MfccDelta,
        }
    }
}
