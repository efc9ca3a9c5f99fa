use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::Label;
use crate::featset::{FeatureSetConfig, SegmentFeatures};
use crate::learn::{train_bundle, SvmHyperParams, TrainOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub speaker_id: String,
    /// Frame accuracy on the held-out speaker, without balancing.
    pub accuracy: f64,
    /// Confirmation segments of the held-out speaker; the fold's weight.
    pub confirmation_count: usize,
    pub frames: usize,
    /// Speakers the fold's model was trained on.
    pub train_speakers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    /// `sum(acc_i w_i) / sum(w_i)` with `w_i` the fold confirmation count.
    pub weighted_accuracy: f64,
    pub min_accuracy: f64,
    pub max_accuracy: f64,
}

impl CvReport {
    pub fn from_folds(folds: Vec<FoldResult>) -> Self {
        let scored: Vec<&FoldResult> = folds.iter().filter(|f| f.frames > 0).collect();
        let weight: f64 = scored.iter().map(|f| f.confirmation_count as f64).sum();
        let weighted_accuracy = if weight > 0.0 {
            scored
                .iter()
                .map(|f| f.accuracy * f.confirmation_count as f64)
                .sum::<f64>()
                / weight
        } else {
            0.0
        };
        let min_accuracy = scored.iter().map(|f| f.accuracy).fold(f64::INFINITY, f64::min);
        let max_accuracy = scored.iter().map(|f| f.accuracy).fold(f64::NEG_INFINITY, f64::max);
        Self {
            folds,
            weighted_accuracy,
            min_accuracy: if min_accuracy.is_finite() { min_accuracy } else { 0.0 },
            max_accuracy: if max_accuracy.is_finite() { max_accuracy } else { 0.0 },
        }
    }
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Leave-one-speaker-out cross-validation.
///
/// Speakers without any confirmation segment are dropped first. Each fold
/// trains on the remaining speakers (balanced) and scores every frame of the
/// held-out speaker.
pub fn louo_cv(
    segments: &[SegmentFeatures],
    config: &FeatureSetConfig,
    params: &SvmHyperParams,
    options: &TrainOptions,
) -> crate::Result<CvReport> {
    let mut by_speaker: BTreeMap<&str, Vec<&SegmentFeatures>> = BTreeMap::new();
    for s in segments {
        by_speaker.entry(s.speaker_id.as_str()).or_default().push(s);
    }
    by_speaker.retain(|_, segs| segs.iter().any(|s| s.label == Label::Confirmation));
    if by_speaker.len() < 2 {
        return Err(EvalError::TooFewSpeakers(by_speaker.len()).into());
    }
    let speakers: Vec<&str> = by_speaker.keys().copied().collect();

    let folds = speakers
        .par_iter()
        .enumerate()
        .map(|(k, &held_out)| {
            let train: Vec<SegmentFeatures> = by_speaker
                .iter()
                .filter(|(spk, _)| **spk != held_out)
                .flat_map(|(_, segs)| segs.iter().map(|s| (*s).clone()))
                .collect();
            let opts = TrainOptions {
                seed: fold_seed(options.seed, k),
                ..*options
            };
            let (bundle, _) = train_bundle(&train, config, params, &opts)?;
            let test = &by_speaker[held_out];
            let mut correct = 0usize;
            let mut frames = 0usize;
            for seg in test {
                for v in seg.rows() {
                    let f = bundle.decision_value(v)?;
                    let predicted = if f > 0.0 { Label::Confirmation } else { Label::Other };
                    correct += usize::from(predicted == seg.label);
                    frames += 1;
                }
            }
            Ok(FoldResult {
                speaker_id: held_out.to_string(),
                accuracy: if frames > 0 { correct as f64 / frames as f64 } else { 0.0 },
                confirmation_count: test.iter().filter(|s| s.label == Label::Confirmation).count(),
                frames,
                train_speakers: speakers
                    .iter()
                    .filter(|s| **s != held_out)
                    .map(|s| s.to_string())
                    .collect(),
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(CvReport::from_folds(folds))
}
