//! Class balancing, leave-one-speaker-out cross-validation, ROC analysis and
//! segment-level metrics.

mod balance;
mod cv;
mod report;
mod roc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;
use crate::pipeline::SegmentDecision;

pub use balance::{balance_frames, balance_indices};
pub use cv::{louo_cv, CvReport, FoldResult};
pub use report::{results_table, run_experiment, EvalReport, ExperimentOptions};
pub use roc::{pairwise_auc, roc_auc, RocCurve};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("both classes are required, only {0} present")]
    MissingClass(Label),
    #[error("no items to evaluate")]
    Empty,
    #[error("{what}: {left} vs {right} items")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("non-finite score")]
    NonFinite,
    #[error("cross-validation needs at least 2 speakers with confirmations, got {0}")]
    TooFewSpeakers(usize),
}

/// Binary confusion matrix with Confirmation as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn add(&mut self, predicted: Label, truth: Label) {
        match (predicted, truth) {
            (Label::Confirmation, Label::Confirmation) => self.tp += 1,
            (Label::Confirmation, Label::Other) => self.fp += 1,
            (Label::Other, Label::Other) => self.tn += 1,
            (Label::Other, Label::Confirmation) => self.fn_ += 1,
        }
    }

    pub fn from_pairs(
        predicted: &[Label],
        truth: &[Label],
    ) -> Result<Self, EvalError> {
        if predicted.len() != truth.len() {
            return Err(EvalError::LengthMismatch {
                what: "predictions and labels",
                left: predicted.len(),
                right: truth.len(),
            });
        }
        let mut c = Self::default();
        for (&p, &t) in predicted.iter().zip(truth) {
            c.add(p, t);
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// True positive rate; 0 when there are no positives.
    pub fn tpr(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// False positive rate; 0 when there are no negatives.
    pub fn fpr(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn)
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Segment-level confusion counts and accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentMetrics {
    pub counts: ConfusionCounts,
    pub accuracy: f64,
}

pub fn segment_metrics(
    decisions: &[SegmentDecision],
    truth: &[Label],
) -> Result<SegmentMetrics, EvalError> {
    let predicted: Vec<Label> = decisions.iter().map(|d| d.decided_label).collect();
    let counts = ConfusionCounts::from_pairs(&predicted, truth)?;
    Ok(SegmentMetrics {
        counts,
        accuracy: counts.accuracy(),
    })
}
