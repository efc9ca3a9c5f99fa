use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AudioSegment, CorpusError, Label, SegmentDescriptor};

/// Anything that belongs to one speaker and carries a ground-truth label.
pub trait Annotated {
    fn speaker_id(&self) -> &str;
    fn label(&self) -> Label;
}

impl Annotated for AudioSegment {
    fn speaker_id(&self) -> &str {
        &self.speaker_id
    }
    fn label(&self) -> Label {
        self.label
    }
}

impl Annotated for SegmentDescriptor {
    fn speaker_id(&self) -> &str {
        &self.speaker_id
    }
    fn label(&self) -> Label {
        self.label
    }
}

/// Speaker-disjoint train/test partition.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSplit<T = AudioSegment> {
    pub train: Vec<T>,
    pub test: Vec<T>,
    pub train_speakers: BTreeSet<String>,
    pub test_speakers: BTreeSet<String>,
    pub seed: u64,
}

/// Partitions speakers so that the train side holds at least
/// `train_fraction` of the segments.
///
/// Speakers without any confirmation are dropped first. The remaining
/// speakers are shuffled with `seed`, stably sorted by descending segment
/// count and moved to the train side until the fraction is reached; at least
/// one speaker always stays on the test side.
pub fn split_corpus<T: Annotated + Clone>(
    segments: &[T],
    train_fraction: f64,
    seed: u64,
) -> Result<CorpusSplit<T>, CorpusError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CorpusError::InvalidArgument(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let mut per_speaker: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for s in segments {
        let entry = per_speaker.entry(s.speaker_id()).or_default();
        entry.0 += 1;
        if s.label() == Label::Confirmation {
            entry.1 += 1;
        }
    }
    let mut eligible: Vec<(&str, usize)> = per_speaker
        .into_iter()
        .filter(|(_, (_, conf))| *conf > 0)
        .map(|(spk, (count, _))| (spk, count))
        .collect();
    if eligible.is_empty() {
        return Err(CorpusError::NoConfirmations);
    }
    if eligible.len() < 2 {
        return Err(CorpusError::SplitImpossible {
            speakers: eligible.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    eligible.shuffle(&mut rng);
    eligible.sort_by(|a, b| b.1.cmp(&a.1));

    let total: usize = eligible.iter().map(|e| e.1).sum();
    let mut train_speakers = BTreeSet::new();
    let mut train_count = 0usize;
    for &(spk, count) in &eligible[..eligible.len() - 1] {
        if train_count as f64 / total as f64 >= train_fraction - 1e-12 {
            break;
        }
        train_speakers.insert(spk.to_string());
        train_count += count;
    }
    let test_speakers: BTreeSet<String> = eligible
        .iter()
        .map(|e| e.0.to_string())
        .filter(|s| !train_speakers.contains(s))
        .collect();

    let pick = |side: &BTreeSet<String>| {
        segments
            .iter()
            .filter(|s| side.contains(s.speaker_id()))
            .cloned()
            .collect::<Vec<_>>()
    };
    Ok(CorpusSplit {
        train: pick(&train_speakers),
        test: pick(&test_speakers),
        train_speakers,
        test_speakers,
        seed,
    })
}
