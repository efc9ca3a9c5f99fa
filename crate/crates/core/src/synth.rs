//! Synthetic stand-in corpus with confirmation-like and ordinary utterances.
//!
//! Confirmation tokens are short voiced hums: a pulse train with an almost
//! flat pitch (within 2% of the speaker's median) through resonators fixed
//! near 350 and 1400 Hz (scaled per speaker). Ordinary utterances last
//! 0.5 to 3 s and move through a new vowel target every syllable, so F2
//! jumps by at least 400 Hz between neighbouring targets, while the pitch
//! swings by more than 20% around the speaker's median.
//!
//! Each speaker's tokens are concatenated, separated by low-level noise, into
//! one WAV file, and a manifest lists every token with its label.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{
    write_manifest, write_wav, AudioSegment, CorpusError, Label, SegmentDescriptor, SAMPLE_RATE,
};

const FS: f64 = SAMPLE_RATE as f64;
/// Samples per millisecond; token boundaries are kept on whole milliseconds.
const MS: usize = SAMPLE_RATE as usize / 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub speakers: usize,
    pub segments_per_speaker: usize,
    /// Expected share of confirmation tokens; every speaker gets at least one.
    pub confirmation_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            speakers: 10,
            segments_per_speaker: 40,
            confirmation_rate: 0.08,
            seed: 2024,
        }
    }
}

/// Per-speaker voice parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Voice {
    pub median_f0: f64,
    /// Vocal tract scale applied to all formant targets.
    pub formant_scale: f64,
    /// Pole of the one-pole low-pass that shapes the glottal pulses.
    pub tilt: f64,
    pub bandwidth_scale: f64,
    /// Standard deviation of additive breath noise relative to the pulses.
    pub breath: f64,
}

impl Voice {
    pub fn random(rng: &mut impl Rng) -> Self {
        Self {
            median_f0: rng.random_range(90.0..140.0),
            formant_scale: rng.random_range(0.9..1.12),
            tilt: rng.random_range(0.75..0.92),
            bandwidth_scale: rng.random_range(0.9..1.2),
            breath: rng.random_range(0.005..0.02),
        }
    }
}

/// Formant and pitch tracks, one value per sample.
struct Tracks {
    f0: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
    amplitude: Vec<f64>,
}

/// Two-pole resonator with unity gain at DC.
#[derive(Default)]
struct Resonator {
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn step(&mut self, x: f64, freq: f64, bandwidth: f64) -> f64 {
        let r = (-PI * bandwidth / FS).exp();
        let a1 = 2.0 * r * (2.0 * PI * freq / FS).cos();
        let a2 = -r * r;
        let b0 = 1.0 - a1 - a2;
        let y = b0 * x + a1 * self.y1 + a2 * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

fn render(voice: &Voice, tracks: &Tracks, rng: &mut impl Rng) -> Vec<f64> {
    let n = tracks.f0.len();
    let noise = Normal::new(0.0, 1.0).expect("valid normal");
    let (mut r1, mut r2, mut r3) = (Resonator::default(), Resonator::default(), Resonator::default());
    let mut phase = rng.random_range(0.0..1.0);
    let mut glottal = 0.0;
    let bw = voice.bandwidth_scale;
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        phase += tracks.f0[t] / FS;
        let pulse = if phase >= 1.0 {
            phase -= 1.0;
            1.0
        } else {
            0.0
        };
        glottal = pulse + voice.tilt * glottal;
        let source = glottal + voice.breath * noise.sample(rng);
        let y = r1.step(source, tracks.f1[t], 80.0 * bw);
        let y = r2.step(y, tracks.f2[t], 100.0 * bw);
        let y = r3.step(y, tracks.f3[t], 150.0 * bw);
        out.push(y * tracks.amplitude[t]);
    }
    // remove the DC offset left by the unipolar pulses
    let mean = out.iter().sum::<f64>() / n.max(1) as f64;
    out.iter_mut().for_each(|v| *v -= mean);
    out
}

fn edge_envelope(n: usize, ramp: usize) -> Vec<f64> {
    (0..n)
        .map(|t| {
            let k = t.min(n - 1 - t);
            if k >= ramp {
                1.0
            } else {
                0.5 - 0.5 * (PI * k as f64 / ramp as f64).cos()
            }
        })
        .collect()
}

fn normalize_peak(x: &mut [f64], peak: f64) {
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        x.iter_mut().for_each(|v| *v *= peak / m);
    }
}

fn whole_ms(ms: f64) -> usize {
    (ms.round() as usize).max(1) * MS
}

/// A 300 to 700 ms hum with stable formants and flat pitch.
pub fn confirmation_token(voice: &Voice, rng: &mut impl Rng) -> Vec<f64> {
    let n = whole_ms(rng.random_range(300.0..700.0));
    let f0 = voice.median_f0 * (1.0 + rng.random_range(-0.02..0.02));
    let s = voice.formant_scale;
    let f1 = 350.0 * s * (1.0 + rng.random_range(-0.03..0.03));
    let f2 = 1400.0 * s * (1.0 + rng.random_range(-0.03..0.03));
    let tracks = Tracks {
        // slight period jitter, well inside the 2% band
        f0: (0..n)
            .map(|t| f0 * (1.0 + 0.004 * (2.0 * PI * 3.0 * t as f64 / FS).sin()))
            .collect(),
        f1: vec![f1; n],
        f2: vec![f2; n],
        f3: vec![2500.0 * s; n],
        amplitude: edge_envelope(n, 25 * MS),
    };
    let mut x = render(voice, &tracks, rng);
    normalize_peak(&mut x, rng.random_range(0.25..0.5));
    x
}

/// A 0.5 to 3 s utterance with moving formants and pitch.
pub fn other_token(voice: &Voice, rng: &mut impl Rng) -> Vec<f64> {
    let n = whole_ms(rng.random_range(500.0..3000.0));
    let s = voice.formant_scale;

    // vowel targets, one per syllable
    let mut bounds = vec![0usize];
    while *bounds.last().expect("non-empty") < n {
        let len = whole_ms(rng.random_range(150.0..280.0));
        bounds.push((bounds.last().expect("non-empty") + len).min(n));
    }
    let mut targets: Vec<(f64, f64)> = Vec::with_capacity(bounds.len());
    for _ in 0..bounds.len() {
        let prev = targets.last().copied();
        let t = loop {
            let cand = (rng.random_range(300.0..850.0), rng.random_range(900.0..2400.0));
            match prev {
                Some((_, f2)) if (cand.1 - f2).abs() < 400.0 => continue,
                _ => break cand,
            }
        };
        targets.push(t);
    }
    let mut f1 = vec![0.0; n];
    let mut f2 = vec![0.0; n];
    let mut syllable_amp = vec![0.0; n];
    for k in 0..bounds.len() - 1 {
        let (a, b) = (bounds[k], bounds[k + 1]);
        let len = (b - a).max(1) as f64;
        for t in a..b {
            let u = (t - a) as f64 / len;
            // linear so the tract never settles on a target
            let w = u;
            f1[t] = s * (targets[k].0 + w * (targets[k + 1].0 - targets[k].0));
            f2[t] = s * (targets[k].1 + w * (targets[k + 1].1 - targets[k].1));
            syllable_amp[t] = 0.45 + 0.55 * (PI * u).sin();
        }
    }

    let rate = rng.random_range(1.5..3.5);
    let phase = rng.random_range(0.0..2.0 * PI);
    let swing = rng.random_range(0.14..0.22);
    let f0: Vec<f64> = (0..n)
        .map(|t| {
            let time = t as f64 / FS;
            let declination = 1.05 - 0.1 * t as f64 / n as f64;
            voice.median_f0 * declination * (1.0 + swing * (2.0 * PI * rate * time + phase).sin())
        })
        .collect();
    let env = edge_envelope(n, 25 * MS);
    let tracks = Tracks {
        f0,
        f1,
        f2,
        f3: vec![2500.0 * s; n],
        amplitude: env.iter().zip(&syllable_amp).map(|(a, b)| a * b).collect(),
    };
    let mut x = render(voice, &tracks, rng);
    normalize_peak(&mut x, rng.random_range(0.3..0.6));
    x
}

/// One speaker's recording and the sample ranges of its tokens.
pub struct SpeakerRecording {
    pub speaker_id: String,
    pub voice: Voice,
    pub samples: Vec<f64>,
    /// `(start_sample, end_sample, label)`, on whole milliseconds.
    pub tokens: Vec<(usize, usize, Label)>,
}

fn confirmation_count(cfg: &SynthConfig, rng: &mut impl Rng) -> usize {
    let expected = cfg.confirmation_rate * cfg.segments_per_speaker as f64;
    let jitter: f64 = rng.random_range(-1.0..1.0);
    ((expected + jitter).round().max(1.0) as usize).min(cfg.segments_per_speaker.saturating_sub(1).max(1))
}

pub fn render_speaker(cfg: &SynthConfig, index: usize) -> SpeakerRecording {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1 + index as u64));
    let voice = Voice::random(&mut rng);
    let confirmations = confirmation_count(cfg, &mut rng);
    let mut labels: Vec<Label> = (0..cfg.segments_per_speaker)
        .map(|i| if i < confirmations { Label::Confirmation } else { Label::Other })
        .collect();
    for i in (1..labels.len()).rev() {
        labels.swap(i, rng.random_range(0..=i));
    }

    let floor = Normal::new(0.0, 3e-4).expect("valid normal");
    let mut samples: Vec<f64> = Vec::new();
    let silence = |rng: &mut ChaCha8Rng, out: &mut Vec<f64>, ms: f64| {
        for _ in 0..whole_ms(ms) {
            out.push(floor.sample(rng));
        }
    };
    silence(&mut rng, &mut samples, 200.0);
    let mut tokens = Vec::with_capacity(labels.len());
    for label in labels {
        let tok = match label {
            Label::Confirmation => confirmation_token(&voice, &mut rng),
            Label::Other => other_token(&voice, &mut rng),
        };
        let start = samples.len();
        samples.extend(tok.iter().map(|v| v + floor.sample(&mut rng)));
        tokens.push((start, samples.len(), label));
        let gap = rng.random_range(200.0..500.0);
        silence(&mut rng, &mut samples, gap);
    }
    SpeakerRecording {
        speaker_id: format!("spk{index:02}"),
        voice,
        samples,
        tokens,
    }
}

/// All tokens of the corpus as in-memory segments.
pub fn synth_segments(cfg: &SynthConfig) -> Vec<AudioSegment> {
    (0..cfg.speakers)
        .flat_map(|i| {
            let rec = render_speaker(cfg, i);
            let source = format!("{}.wav", rec.speaker_id);
            rec.tokens
                .iter()
                .map(|&(a, b, label)| AudioSegment {
                    source_id: source.clone(),
                    speaker_id: rec.speaker_id.clone(),
                    start_ms: (a / MS) as u64,
                    end_ms: (b / MS) as u64,
                    samples: rec.samples[a..b].to_vec(),
                    label,
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Files written by [`generate_corpus`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub manifest_path: PathBuf,
    pub wav_paths: Vec<PathBuf>,
    pub rows: Vec<SegmentDescriptor>,
}

/// Writes one WAV per speaker and `manifest.csv` into `dir`.
pub fn generate_corpus(dir: impl AsRef<Path>, cfg: &SynthConfig) -> Result<SynthCorpus, CorpusError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut rows = Vec::new();
    let mut wav_paths = Vec::new();
    for i in 0..cfg.speakers {
        let rec = render_speaker(cfg, i);
        let name = format!("{}.wav", rec.speaker_id);
        let path = dir.join(&name);
        write_wav(&path, &rec.samples)?;
        wav_paths.push(path);
        rows.extend(rec.tokens.iter().map(|&(a, b, label)| SegmentDescriptor {
            wav_path: name.clone(),
            speaker_id: rec.speaker_id.clone(),
            start_ms: (a / MS) as u64,
            end_ms: (b / MS) as u64,
            label,
        }));
    }
    let manifest_path = dir.join("manifest.csv");
    write_manifest(&manifest_path, &rows)?;
    Ok(SynthCorpus {
        manifest_path,
        wav_paths,
        rows,
    })
}
