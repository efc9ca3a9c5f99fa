use serde::{Deserialize, Serialize};

use super::{AudioBuffer, AudioSegment, Label, FRAME_LEN, FRAME_SHIFT};

/// Energy gate: 10 ms blocks whose RMS exceeds `threshold` count as speech;
/// runs closer than `hangover_ms` are merged and every run is extended by
/// `hangover_ms`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VadConfig {
    pub threshold: f64,
    pub hangover_ms: u64,
}

impl Default for VadConfig {
    fn default() -> Self {
        Self {
            threshold: 0.01,
            hangover_ms: 200,
        }
    }
}

const BLOCK_MS: u64 = 10;

/// Splits audio into segments of continuous speech.
///
/// Returned segments carry empty source/speaker ids and the `Other` label;
/// callers fill those in (see [`super::annotate_segments`]).
pub fn vad_segments(audio: &AudioBuffer, config: &VadConfig) -> Vec<AudioSegment> {
    let samples = audio.samples();
    let active: Vec<bool> = samples
        .chunks(FRAME_SHIFT)
        .map(|block| {
            let energy = block.iter().map(|s| s * s).sum::<f64>() / block.len() as f64;
            energy.sqrt() > config.threshold
        })
        .collect();

    let hang_samples = (config.hangover_ms / BLOCK_MS) as usize * FRAME_SHIFT;
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < active.len() {
        if !active[i] {
            i += 1;
            continue;
        }
        let start_block = i;
        while i < active.len() && active[i] {
            i += 1;
        }
        let start = start_block * FRAME_SHIFT;
        let end = (i * FRAME_SHIFT).min(samples.len()) + hang_samples;
        match spans.last_mut() {
            Some(last) if start <= last.1 => last.1 = end,
            _ => spans.push((start, end)),
        }
    }

    spans
        .into_iter()
        .map(|(s, e)| (s, e.min(samples.len())))
        .filter(|&(s, e)| e - s >= FRAME_LEN)
        .map(|(s, e)| AudioSegment {
            source_id: String::new(),
            speaker_id: String::new(),
            start_ms: s as u64 * BLOCK_MS / FRAME_SHIFT as u64,
            end_ms: e as u64 * BLOCK_MS / FRAME_SHIFT as u64,
            samples: samples[s..e].to_vec(),
            label: Label::Other,
        })
        .collect()
}
