//! Frame-by-frame classification with a rolling majority vote.
//!
//! Each feature vector gets a vote of +1 (decision value above 0) or -1.
//! Once five votes are in, a segment is flagged as a confirmation the first
//! time the mean of the last five votes exceeds the majority threshold; the
//! flag then holds until the segment ends. Offline classification stores all
//! decision values and replays the same rule, so both modes agree exactly.

mod online;
mod output;

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{AudioSegment, Label};
use crate::featset::{extract_corpus, SegmentFeatures};
use crate::learn::ModelBundle;

pub use online::{OnlineClassifier, TriggerEvent};
pub use output::{offline_csv, segment_csv, trigger_ndjson};

pub const VOTE_WINDOW: usize = 5;
pub const DEFAULT_MAJORITY_THRESHOLD: f64 = 0.0;

/// Rolling vote state of one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineState {
    ring: VecDeque<i8>,
    latched: bool,
    majority_threshold: f64,
    frames_seen: usize,
}

/// Result of adding one vote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteOutcome {
    /// Mean of the last five votes, once five have been cast.
    pub rolling_mean: Option<f64>,
    /// True only for the vote that latched the segment.
    pub triggered: bool,
}

impl OnlineState {
    pub fn new(majority_threshold: f64) -> Self {
        Self {
            ring: VecDeque::with_capacity(VOTE_WINDOW),
            latched: false,
            majority_threshold,
            frames_seen: 0,
        }
    }

    pub fn majority_threshold(&self) -> f64 {
        self.majority_threshold
    }

    pub fn is_latched(&self) -> bool {
        self.latched
    }

    /// Votes cast since the last reset.
    pub fn frames_seen(&self) -> usize {
        self.frames_seen
    }

    pub fn rolling_mean(&self) -> Option<f64> {
        (self.ring.len() == VOTE_WINDOW)
            .then(|| self.ring.iter().map(|&v| f64::from(v)).sum::<f64>() / VOTE_WINDOW as f64)
    }

    /// Votes +1 for a positive decision value and -1 otherwise.
    pub fn push_score(&mut self, decision_value: f64) -> VoteOutcome {
        self.push_vote(if decision_value > 0.0 { 1 } else { -1 })
    }

    pub fn push_vote(&mut self, vote: i8) -> VoteOutcome {
        debug_assert!(vote == 1 || vote == -1);
        if self.ring.len() == VOTE_WINDOW {
            self.ring.pop_front();
        }
        self.ring.push_back(vote);
        self.frames_seen += 1;
        let rolling_mean = self.rolling_mean();
        let triggered = match rolling_mean {
            Some(m) if !self.latched && m > self.majority_threshold => {
                self.latched = true;
                true
            }
            _ => false,
        };
        VoteOutcome {
            rolling_mean,
            triggered,
        }
    }

    pub fn reset(&mut self) {
        self.ring.clear();
        self.latched = false;
        self.frames_seen = 0;
    }
}

/// Decision value of one feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameScore {
    pub frame_index: usize,
    pub decision_value: f64,
}

impl FrameScore {
    pub fn prediction(&self) -> Label {
        if self.decision_value > 0.0 {
            Label::Confirmation
        } else {
            Label::Other
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDecision {
    pub segment_id: String,
    pub decided_label: Label,
    /// Frame whose vote latched the segment.
    pub trigger_frame: Option<usize>,
    pub frame_scores: Vec<FrameScore>,
    /// Highest rolling vote mean reached, if five votes were cast.
    pub max_rolling_mean: Option<f64>,
}

/// Accumulates votes for one segment and produces its decision.
#[derive(Debug, Clone)]
pub(crate) struct DecisionBuilder {
    state: OnlineState,
    scores: Vec<FrameScore>,
    trigger_frame: Option<usize>,
    max_rolling_mean: Option<f64>,
}

impl DecisionBuilder {
    pub(crate) fn new(majority_threshold: f64) -> Self {
        Self {
            state: OnlineState::new(majority_threshold),
            scores: Vec::new(),
            trigger_frame: None,
            max_rolling_mean: None,
        }
    }

    pub(crate) fn push(&mut self, score: FrameScore) -> VoteOutcome {
        let outcome = self.state.push_score(score.decision_value);
        self.scores.push(score);
        if let Some(m) = outcome.rolling_mean {
            self.max_rolling_mean = Some(self.max_rolling_mean.map_or(m, |x: f64| x.max(m)));
        }
        if outcome.triggered {
            self.trigger_frame = Some(score.frame_index);
        }
        outcome
    }

    pub(crate) fn state(&self) -> &OnlineState {
        &self.state
    }

    pub(crate) fn finish(&mut self, segment_id: String) -> SegmentDecision {
        let d = SegmentDecision {
            segment_id,
            decided_label: if self.trigger_frame.is_some() {
                Label::Confirmation
            } else {
                Label::Other
            },
            trigger_frame: self.trigger_frame,
            frame_scores: std::mem::take(&mut self.scores),
            max_rolling_mean: self.max_rolling_mean,
        };
        self.reset();
        d
    }

    pub(crate) fn reset(&mut self) {
        self.state.reset();
        self.scores.clear();
        self.trigger_frame = None;
        self.max_rolling_mean = None;
    }
}

/// Replays the online vote rule over stored decision values.
pub fn decide_segment(
    segment_id: impl Into<String>,
    scores: &[FrameScore],
    majority_threshold: f64,
) -> SegmentDecision {
    let mut b = DecisionBuilder::new(majority_threshold);
    for &s in scores {
        b.push(s);
    }
    b.finish(segment_id.into())
}

/// Scores already extracted segments.
pub fn classify_features(
    segments: &[SegmentFeatures],
    bundle: &ModelBundle,
    majority_threshold: f64,
) -> crate::Result<Vec<SegmentDecision>> {
    segments
        .par_iter()
        .map(|seg| {
            let scores = seg
                .vectors
                .iter()
                .map(|v| {
                    Ok(FrameScore {
                        frame_index: v.frame_index,
                        decision_value: bundle.decision_value(&v.values)?,
                    })
                })
                .collect::<crate::Result<Vec<_>>>()?;
            Ok(decide_segment(seg.segment_id.clone(), &scores, majority_threshold))
        })
        .collect()
}

/// Extracts features for every segment and classifies every frame.
pub fn classify_offline(
    segments: &[AudioSegment],
    bundle: &Arc<ModelBundle>,
    majority_threshold: f64,
) -> crate::Result<Vec<SegmentDecision>> {
    let features = extract_corpus(segments, &bundle.feature_config)?;
    classify_features(&features, bundle, majority_threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn votes(v: &[i8]) -> (Vec<VoteOutcome>, OnlineState) {
        let mut s = OnlineState::new(0.0);
        (v.iter().map(|&x| s.push_vote(x)).collect(), s)
    }

    #[test]
    fn unanimous_votes_trigger_on_fifth() {
        let (o, s) = votes(&[1, 1, 1, 1, 1]);
        assert!(o[..4].iter().all(|x| !x.triggered && x.rolling_mean.is_none()));
        assert!(o[4].triggered);
        assert_eq!(o[4].rolling_mean, Some(1.0));
        assert!(s.is_latched());
    }

    #[test]
    fn three_of_five_is_a_majority() {
        let (o, _) = votes(&[1, 1, 1, -1, -1]);
        assert!(o[4].triggered);
        assert!((o[4].rolling_mean.unwrap() - 0.2).abs() < 1e-15);
        let (o, s) = votes(&[1, 1, -1, -1, -1]);
        assert!(!o[4].triggered);
        assert!((o[4].rolling_mean.unwrap() + 0.2).abs() < 1e-15);
        assert!(!s.is_latched());
    }

    #[test]
    fn latch_fires_once() {
        let (o, s) = votes(&[1, 1, 1, 1, 1, -1, -1, -1, -1, -1, 1, 1, 1, 1, 1]);
        assert_eq!(o.iter().filter(|x| x.triggered).count(), 1);
        assert!(s.is_latched());
    }

    #[test]
    fn reset_clears_everything() {
        let (_, mut s) = votes(&[1, 1, 1, 1, 1]);
        s.reset();
        assert_eq!(s, OnlineState::new(0.0));
        s.reset();
        assert_eq!(s, OnlineState::new(0.0));
    }

    fn scores(values: &[f64]) -> Vec<FrameScore> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| FrameScore {
                frame_index: i + 14,
                decision_value: v,
            })
            .collect()
    }

    #[test]
    fn all_positive_segment_latches_at_fifth_vote() {
        let d = decide_segment("s", &scores(&[0.5; 12]), 0.0);
        assert_eq!(d.decided_label, Label::Confirmation);
        assert_eq!(d.trigger_frame, Some(18));
        assert!(d.frame_scores.iter().all(|s| s.prediction() == Label::Confirmation));
    }

    #[test]
    fn all_negative_segment_is_other() {
        let d = decide_segment("s", &scores(&[-0.5; 12]), 0.0);
        assert_eq!(d.decided_label, Label::Other);
        assert_eq!(d.trigger_frame, None);
        assert_eq!(d.max_rolling_mean, Some(-1.0));
    }

    #[test]
    fn alternating_votes() {
        // windows alternate between three and two positives; the first with
        // three positives starts with a positive vote
        let alt: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let d = decide_segment("s", &scores(&alt), 0.0);
        assert_eq!(d.trigger_frame, Some(14 + 4));
        let alt: Vec<f64> = alt.iter().map(|v| -v).collect();
        let d = decide_segment("s", &scores(&alt), 0.0);
        assert_eq!(d.trigger_frame, Some(14 + 5));
        assert!((d.max_rolling_mean.unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_score_votes_negative() {
        let d = decide_segment("s", &scores(&[0.0; 8]), 0.0);
        assert_eq!(d.decided_label, Label::Other);
    }
}
