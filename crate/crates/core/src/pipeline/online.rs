use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{DecisionBuilder, FrameScore, OnlineState, SegmentDecision};
use crate::corpus::{FRAME_LEN, FRAME_SHIFT, SAMPLE_RATE};
use crate::featset::{FeatureStream, FeatureVector};
use crate::learn::ModelBundle;

/// Emitted when a segment latches as a confirmation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerEvent {
    pub segment_id: String,
    /// Stream time at which the decision became available: the end of the
    /// newest frame received, offset by the segment start.
    pub trigger_time_ms: f64,
    pub rolling_mean: f64,
    /// Frame whose vote latched the segment.
    pub frame_index: usize,
}

/// Streaming classifier for one audio stream.
///
/// Audio arrives as arbitrary chunks of samples or as whole frames; features
/// are computed incrementally and every new vector casts a vote. Call
/// [`end_segment`](Self::end_segment) at each segment boundary.
pub struct OnlineClassifier {
    bundle: Arc<ModelBundle>,
    stream: FeatureStream,
    votes: DecisionBuilder,
    pending: Vec<f64>,
    segment_id: String,
    segment_start_ms: f64,
    frames_received: usize,
}

impl OnlineClassifier {
    pub fn new(bundle: Arc<ModelBundle>, majority_threshold: f64) -> Self {
        let stream = crate::featset::FeatureExtractor::new(bundle.feature_config).stream();
        Self {
            bundle,
            stream,
            votes: DecisionBuilder::new(majority_threshold),
            pending: Vec::with_capacity(2 * FRAME_LEN),
            segment_id: String::new(),
            segment_start_ms: 0.0,
            frames_received: 0,
        }
    }

    /// Starts a new segment, discarding any state of the current one.
    pub fn begin_segment(&mut self, segment_id: impl Into<String>, start_ms: f64) {
        self.reset();
        self.segment_id = segment_id.into();
        self.segment_start_ms = start_ms;
    }

    pub fn state(&self) -> &OnlineState {
        self.votes.state()
    }

    /// Feeds raw samples; complete frames are analysed as they form.
    pub fn push_samples(&mut self, chunk: &[f64]) -> crate::Result<Vec<TriggerEvent>> {
        self.pending.extend_from_slice(chunk);
        let mut events = Vec::new();
        let mut start = 0;
        while self.pending.len() - start >= FRAME_LEN {
            let frame: Vec<f64> = self.pending[start..start + FRAME_LEN].to_vec();
            events.extend(self.push_frame(&frame)?);
            start += FRAME_SHIFT;
        }
        self.pending.drain(..start);
        Ok(events)
    }

    /// Feeds one 400-sample frame.
    pub fn push_frame(&mut self, samples: &[f64]) -> crate::Result<Option<TriggerEvent>> {
        self.frames_received += 1;
        let vectors = self.stream.push(samples)?;
        self.vote(vectors)
    }

    fn vote(&mut self, vectors: Vec<FeatureVector>) -> crate::Result<Option<TriggerEvent>> {
        let mut event = None;
        for v in vectors {
            let score = FrameScore {
                frame_index: v.frame_index,
                decision_value: self.bundle.decision_value(&v.values)?,
            };
            let outcome = self.votes.push(score);
            if outcome.triggered {
                event = Some(TriggerEvent {
                    segment_id: self.segment_id.clone(),
                    trigger_time_ms: self.segment_start_ms + self.elapsed_ms(),
                    rolling_mean: outcome.rolling_mean.unwrap_or_default(),
                    frame_index: v.frame_index,
                });
            }
        }
        Ok(event)
    }

    fn elapsed_ms(&self) -> f64 {
        if self.frames_received == 0 {
            return 0.0;
        }
        let end = (self.frames_received - 1) * FRAME_SHIFT + FRAME_LEN;
        end as f64 * 1000.0 / f64::from(SAMPLE_RATE)
    }

    /// Closes the segment: flushes held-back vectors, returns the decision
    /// (and a trigger raised by the flush, if any) and resets all state.
    pub fn end_segment(&mut self) -> crate::Result<(SegmentDecision, Option<TriggerEvent>)> {
        let tail = self.stream.finish();
        let event = self.vote(tail)?;
        let decision = self.votes.finish(std::mem::take(&mut self.segment_id));
        self.reset();
        Ok((decision, event))
    }

    /// Clears vote ring, latch, counters and feature buffers.
    pub fn reset(&mut self) {
        self.stream.reset();
        self.votes.reset();
        self.pending.clear();
        self.frames_received = 0;
    }
}
