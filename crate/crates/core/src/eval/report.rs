use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::cv::{louo_cv, CvReport};
use super::roc::{roc_auc, RocCurve};
use super::{segment_metrics, ConfusionCounts, SegmentMetrics};
use crate::corpus::Label;
use crate::featset::{FeatureSetConfig, SegmentFeatures};
use crate::learn::{train_bundle, ModelBundle, SvmHyperParams, TrainOptions, TrainReport};
use crate::pipeline::{classify_features, SegmentDecision, DEFAULT_MAJORITY_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentOptions {
    pub train: TrainOptions,
    pub majority_threshold: f64,
    /// Also run leave-one-speaker-out CV on the training portion.
    pub cross_validate: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            train: TrainOptions::default(),
            majority_threshold: DEFAULT_MAJORITY_THRESHOLD,
            cross_validate: true,
        }
    }
}

/// Outcome of training on one portion of a corpus and testing on another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub feature_config: FeatureSetConfig,
    pub title: String,
    pub raw_dimension: usize,
    /// Dimension seen by the SVM (after PCA, where used).
    pub model_dimension: usize,
    pub hyperparams: SvmHyperParams,
    pub cv: Option<CvReport>,
    pub train_frames: usize,
    pub support_vectors: usize,
    pub test_frames: usize,
    /// Frame-level counts at decision threshold 0.
    pub frame_counts: ConfusionCounts,
    pub auc: f64,
    pub roc: RocCurve,
    pub segment: SegmentMetrics,
    /// ROC over segments scored by their highest rolling vote mean.
    pub segment_roc: Option<RocCurve>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Trains on `train`, classifies every frame of `test`, and collects
/// frame- and segment-level metrics.
pub fn run_experiment(
    train: &[SegmentFeatures],
    test: &[SegmentFeatures],
    config: &FeatureSetConfig,
    params: &SvmHyperParams,
    options: &ExperimentOptions,
) -> crate::Result<(EvalReport, ModelBundle, Vec<SegmentDecision>)> {
    let cv = if options.cross_validate {
        Some(louo_cv(train, config, params, &options.train)?)
    } else {
        None
    };
    let (bundle, train_report): (ModelBundle, TrainReport) =
        train_bundle(train, config, params, &options.train)?;
    let decisions = classify_features(test, &bundle, options.majority_threshold)?;

    let mut frame_scores = Vec::new();
    let mut frame_counts = ConfusionCounts::default();
    for (seg, d) in test.iter().zip(&decisions) {
        for s in &d.frame_scores {
            frame_scores.push((s.decision_value, seg.label));
            frame_counts.add(s.prediction(), seg.label);
        }
    }
    let roc = roc_auc(&frame_scores)?;
    let truth: Vec<Label> = test.iter().map(|s| s.label).collect();
    let segment = segment_metrics(&decisions, &truth)?;
    let seg_scores: Vec<(f64, Label)> = decisions
        .iter()
        .zip(&truth)
        .map(|(d, &l)| (d.max_rolling_mean.unwrap_or(-1.0), l))
        .collect();
    let segment_roc = roc_auc(&seg_scores).ok();

    let report = EvalReport {
        feature_config: *config,
        title: config.kind.title().to_string(),
        raw_dimension: config.dimension(),
        model_dimension: bundle.svm.dimension(),
        hyperparams: *params,
        cv,
        train_frames: train_report.alphas.len(),
        support_vectors: train_report.support_vectors,
        test_frames: frame_scores.len(),
        frame_counts,
        auc: roc.auc,
        roc,
        segment,
        segment_roc,
    };
    Ok((report, bundle, decisions))
}

/// Plain-text results table: feature set, dimension, CV range, TPR, FPR,
/// AUC, and segment accuracy.
pub fn results_table(reports: &[EvalReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<24} {:>4} {:>13} {:>7} {:>7} {:>6} {:>8}",
        "Feature set", "Dim", "CV (%)", "TPR (%)", "FPR (%)", "AUC", "Seg. acc"
    );
    for r in reports {
        let cv = r.cv.as_ref().map_or_else(
            || "-".to_string(),
            |c| format!("{:.1} - {:.1}", 100.0 * c.min_accuracy, 100.0 * c.max_accuracy),
        );
        let _ = writeln!(
            s,
            "{:<24} {:>4} {:>13} {:>7.1} {:>7.1} {:>6.2} {:>8.2}",
            r.title,
            r.model_dimension,
            cv,
            100.0 * r.frame_counts.tpr(),
            100.0 * r.frame_counts.fpr(),
            r.auc,
            r.segment.accuracy
        );
    }
    s
}
