use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bundle::TrainOptions;
use super::svm::SvmHyperParams;
use crate::eval::{louo_cv, CvReport};
use crate::featset::{FeatureSetConfig, SegmentFeatures};

/// Candidate values for each hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmGrid {
    pub c: Vec<f64>,
    pub eps: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Default for SvmGrid {
    fn default() -> Self {
        Self {
            c: vec![1.0, 5.0],
            eps: vec![0.005, 0.05, 0.1, 0.5],
            gamma: vec![0.005, 0.05],
        }
    }
}

impl SvmGrid {
    /// All combinations, in ascending lexicographic `(c, eps, gamma)` order.
    pub fn points(&self) -> Vec<SvmHyperParams> {
        let sorted = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let (cs, es, gs) = (sorted(&self.c), sorted(&self.eps), sorted(&self.gamma));
        let mut out = Vec::with_capacity(cs.len() * es.len() * gs.len());
        for &c in &cs {
            for &eps in &es {
                for &gamma in &gs {
                    out.push(SvmHyperParams { c, eps, gamma });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub params: SvmHyperParams,
    pub cv: CvReport,
}

impl GridPoint {
    pub fn score(&self) -> f64 {
        self.cv.weighted_accuracy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub feature_config: FeatureSetConfig,
    pub points: Vec<GridPoint>,
    pub best: SvmHyperParams,
    pub best_score: f64,
}

/// Scores every grid point by leave-one-speaker-out cross-validation and
/// returns the best; on equal scores the lexicographically smallest
/// `(c, eps, gamma)` wins.
pub fn grid_search(
    segments: &[SegmentFeatures],
    config: &FeatureSetConfig,
    grid: &SvmGrid,
    options: &TrainOptions,
) -> crate::Result<GridReport> {
    let params = grid.points();
    for p in &params {
        p.validate()?;
    }
    let points = params
        .par_iter()
        .map(|p| {
            Ok(GridPoint {
                params: *p,
                cv: louo_cv(segments, config, p, options)?,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let best = select_best(&points).ok_or_else(|| crate::Error::Config("empty grid".into()))?;
    Ok(GridReport {
        feature_config: *config,
        best: points[best].params,
        best_score: points[best].score(),
        points,
    })
}

/// Index of the highest score, keeping the first (smallest) point on ties.
fn select_best(points: &[GridPoint]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        match best {
            Some(b) if p.score() <= points[b].score() => {}
            _ => best = Some(i),
        }
    }
    best
}
