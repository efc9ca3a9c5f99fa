use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::EvalError;
use crate::corpus::Label;

/// Indices (ascending) of a class-balanced subset: the smaller class is
/// kept whole and the larger one is subsampled uniformly without
/// replacement to the same size.
pub fn balance_indices(labels: &[Label], seed: u64) -> Result<Vec<usize>, EvalError> {
    let pos: Vec<usize> = (0..labels.len())
        .filter(|&i| labels[i] == Label::Confirmation)
        .collect();
    let neg: Vec<usize> = (0..labels.len())
        .filter(|&i| labels[i] == Label::Other)
        .collect();
    if pos.is_empty() {
        return Err(EvalError::MissingClass(Label::Other));
    }
    if neg.is_empty() {
        return Err(EvalError::MissingClass(Label::Confirmation));
    }
    let (keep, pool) = if pos.len() <= neg.len() {
        (pos, neg)
    } else {
        (neg, pos)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<usize> = sample(&mut rng, pool.len(), keep.len())
        .into_iter()
        .map(|k| pool[k])
        .chain(keep)
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Balanced subset of labelled frames, in input order.
pub fn balance_frames<T: Clone>(
    frames: &[(T, Label)],
    seed: u64,
) -> Result<Vec<(T, Label)>, EvalError> {
    let labels: Vec<Label> = frames.iter().map(|f| f.1).collect();
    Ok(balance_indices(&labels, seed)?
        .into_iter()
        .map(|i| frames[i].clone())
        .collect())
}
