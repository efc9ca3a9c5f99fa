use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::Label;

/// ROC curve from a threshold sweep, highest threshold first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(fpr, tpr)` pairs starting at `(0, 0)` and ending at `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    /// Threshold reached at each point; the first is `+inf`.
    pub thresholds: Vec<f64>,
    pub auc: f64,
    pub positives: u64,
    pub negatives: u64,
}

impl RocCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("threshold,fpr,tpr\n");
        for (t, (x, y)) in self.thresholds.iter().zip(&self.points) {
            let _ = writeln!(s, "{t},{x},{y}");
        }
        s
    }
}

fn class_counts(scores: &[(f64, Label)]) -> Result<(u64, u64), EvalError> {
    if scores.is_empty() {
        return Err(EvalError::Empty);
    }
    if scores.iter().any(|(s, _)| s.is_nan()) {
        return Err(EvalError::NonFinite);
    }
    let p = scores.iter().filter(|(_, l)| *l == Label::Confirmation).count() as u64;
    let n = scores.len() as u64 - p;
    if p == 0 {
        return Err(EvalError::MissingClass(Label::Other));
    }
    if n == 0 {
        return Err(EvalError::MissingClass(Label::Confirmation));
    }
    Ok((p, n))
}

/// Sweeps the threshold over the distinct scores, moving all items with an
/// equal score together, and integrates the curve by trapezoids.
///
/// The area is accumulated in integer units of `1 / (2 P N)`, so the result
/// equals the pairwise statistic exactly.
pub fn roc_auc(scores: &[(f64, Label)]) -> Result<RocCurve, EvalError> {
    let (p, n) = class_counts(scores)?;
    let mut sorted: Vec<(f64, Label)> = scores.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut area2: u128 = 0;
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        let (tp0, fp0) = (tp, fp);
        while i < sorted.len() && sorted[i].0 == t {
            match sorted[i].1 {
                Label::Confirmation => tp += 1,
                Label::Other => fp += 1,
            }
            i += 1;
        }
        area2 += u128::from(fp - fp0) * u128::from(tp0 + tp);
        points.push((fp as f64 / n as f64, tp as f64 / p as f64));
        thresholds.push(t);
    }
    let auc = area2 as f64 / (2 * u128::from(p) * u128::from(n)) as f64;
    Ok(RocCurve {
        points,
        thresholds,
        auc,
        positives: p,
        negatives: n,
    })
}

/// Fraction of (positive, negative) pairs ordered correctly, ties counting
/// one half. Quadratic; meant as a reference.
pub fn pairwise_auc(scores: &[(f64, Label)]) -> Result<f64, EvalError> {
    let (p, n) = class_counts(scores)?;
    let pos: Vec<f64> = scores
        .iter()
        .filter(|(_, l)| *l == Label::Confirmation)
        .map(|(s, _)| *s)
        .collect();
    let neg: Vec<f64> = scores
        .iter()
        .filter(|(_, l)| *l == Label::Other)
        .map(|(s, _)| *s)
        .collect();
    let mut twice: u128 = 0;
    for &a in &pos {
        for &b in &neg {
            if a > b {
                twice += 2;
            } else if a == b {
                twice += 1;
            }
        }
    }
    Ok(twice as f64 / (2 * u128::from(p) * u128::from(n)) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mk(pos: &[f64], neg: &[f64]) -> Vec<(f64, Label)> {
        pos.iter()
            .map(|&s| (s, Label::Confirmation))
            .chain(neg.iter().map(|&s| (s, Label::Other)))
            .collect()
    }

    #[test]
    fn separated_scores() {
        let r = roc_auc(&mk(&[3.0, 2.5], &[1.0, 0.0, -1.0])).unwrap();
        assert_eq!(r.auc, 1.0);
        assert_eq!(r.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(r.points.last(), Some(&(1.0, 1.0)));
    }

    #[test]
    fn identical_scores_give_diagonal() {
        let r = roc_auc(&mk(&[0.5, 0.5], &[0.5, 0.5, 0.5])).unwrap();
        assert_eq!(r.auc, 0.5);
        assert_eq!(r.points, vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn three_of_four_pairs() {
        let s = mk(&[0.9, 0.7], &[0.8, 0.6]);
        assert_eq!(roc_auc(&s).unwrap().auc, 0.75);
        assert_eq!(pairwise_auc(&s).unwrap(), 0.75);
    }

    #[test]
    fn monotone_points() {
        let r = roc_auc(&mk(&[0.1, 0.4, 0.4, 0.9], &[0.2, 0.4, 0.3, 0.0, 0.95])).unwrap();
        assert!(r.points.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
        assert!(r.to_csv().starts_with("threshold,fpr,tpr\ninf,0,0\n"));
    }

    #[test]
    fn missing_class() {
        assert!(matches!(roc_auc(&mk(&[1.0], &[])), Err(EvalError::MissingClass(_))));
        assert!(matches!(roc_auc(&[]), Err(EvalError::Empty)));
        assert!(matches!(roc_auc(&mk(&[f64::NAN], &[0.0])), Err(EvalError::NonFinite)));
    }
}
