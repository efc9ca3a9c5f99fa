//! Acceptance suite: every headline criterion runs at its stated tolerance
//! and time bound and reports one PASS/FAIL line. Exits non-zero if any
//! criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use backchannel_core::corpus::{frame_count, load_segments, parse_manifest, split_corpus, AudioSegment, Label};
use backchannel_core::dsp::{
    apply_window, savitzky_golay, FormantTracker, Mfcc, PitchYinFft, SavitzkyGolayFilter,
    WindowFunction, WindowKind,
};
use backchannel_core::eval::{roc_auc, run_experiment, ExperimentOptions};
use backchannel_core::featset::{extract_corpus, FeatureKind, FeatureSetConfig};
use backchannel_core::learn::{
    fit_pca, grid_search, retained_components, train_bundle, train_svm, ModelBundle, SmoOptions,
    SvmGrid, SvmHyperParams, TrainOptions,
};
use backchannel_core::pipeline::{classify_offline, OnlineClassifier};
use backchannel_core::synth::{confirmation_token, other_token, synth_segments, SynthConfig, Voice};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FS: f64 = 16_000.0;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, elapsed: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

// ---------------------------------------------------------------------------

fn sg_exactness() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d1 = SavitzkyGolayFilter::first_derivative();
    let d2 = SavitzkyGolayFilter::second_derivative();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let a: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ts: Vec<f64> = (-12..=12).map(f64::from).collect();
        // quadratic for the first derivative, cubic for the second
        let quad: Vec<f64> = ts.iter().map(|t| a[0] + a[1] * t + a[2] * t * t).collect();
        let cubic: Vec<f64> = ts
            .iter()
            .map(|t| a[0] + a[1] * t + a[2] * t * t + a[3] * t * t * t)
            .collect();
        let y1 = savitzky_golay(&quad, &d1).map_err(|e| e.to_string())?;
        let y2 = savitzky_golay(&cubic, &d2).map_err(|e| e.to_string())?;
        for i in 3..ts.len() - 3 {
            let t = ts[i];
            worst = worst.max((y1[i] - (a[1] + 2.0 * a[2] * t)).abs());
            worst = worst.max((y2[i] - (2.0 * a[2] + 6.0 * a[3] * t)).abs());
        }
        // the quadratic also passes through the second-derivative filter exactly
        let y2q = savitzky_golay(&quad, &d2).map_err(|e| e.to_string())?;
        for v in &y2q[3..ts.len() - 3] {
            worst = worst.max((v - 2.0 * a[2]).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max error {worst:e}"))?;
    within(Duration::from_secs(1), t0.elapsed())?;
    Ok(format!("max error {worst:.1e}"))
}

// ---------------------------------------------------------------------------

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// MFCCs from first principles: explicit window, direct DFT on 512 points,
/// unit-area triangular filters, log with floor, orthonormal DCT-II.
fn mfcc_reference(frame: &[f64]) -> Vec<f64> {
    let n = frame.len();
    let nfft = 512;
    let a = [0.35875, 0.48829, 0.14128, 0.01168];
    let windowed: Vec<f64> = (0..n)
        .map(|i| {
            let x = 2.0 * PI * i as f64 / (n - 1) as f64;
            frame[i] * (a[0] - a[1] * x.cos() + a[2] * (2.0 * x).cos() - a[3] * (3.0 * x).cos())
        })
        .collect();
    let power: Vec<f64> = (0..=nfft / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, x) in windowed.iter().enumerate() {
                let ph = -2.0 * PI * (k * j) as f64 / nfft as f64;
                re += x * ph.cos();
                im += x * ph.sin();
            }
            re * re + im * im
        })
        .collect();
    let bands = 40;
    let (lo, hi) = (hz_to_mel(20.0), hz_to_mel(7800.0));
    let edges: Vec<f64> = (0..bands + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (bands + 1) as f64))
        .collect();
    let log_e: Vec<f64> = (0..bands)
        .map(|b| {
            let (l, c, h) = (edges[b], edges[b + 1], edges[b + 2]);
            let w: Vec<f64> = (0..power.len())
                .map(|k| {
                    let f = k as f64 * FS / nfft as f64;
                    if f > l && f <= c {
                        (f - l) / (c - l)
                    } else if f > c && f < h {
                        (h - f) / (h - c)
                    } else {
                        0.0
                    }
                })
                .collect();
            let area: f64 = w.iter().sum();
            let e: f64 = w.iter().zip(&power).map(|(w, p)| w * p).sum::<f64>() / area;
            e.max(1e-10).ln()
        })
        .collect();
    let m = bands as f64;
    (0..13)
        .map(|k| {
            let s = if k == 0 { (1.0 / m).sqrt() } else { (2.0 / m).sqrt() };
            s * log_e
                .iter()
                .enumerate()
                .map(|(i, e)| e * (PI * k as f64 * (i as f64 + 0.5) / m).cos())
                .sum::<f64>()
        })
        .collect()
}

fn mfcc_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mfcc = Mfcc::default();
    let window = WindowFunction::new(WindowKind::BlackmanHarris4, 400);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        // mix of noise, tones and decaying pulses at varied levels
        let level = 10f64.powf(rng.random_range(-3.0..0.0));
        let f = rng.random_range(80.0..6000.0);
        let frame: Vec<f64> = (0..400)
            .map(|t| {
                let noise: f64 = rng.random_range(-1.0..1.0);
                let tone = (2.0 * PI * f * t as f64 / FS).sin();
                level * match i % 3 {
                    0 => noise,
                    1 => 0.8 * tone + 0.2 * noise,
                    _ => (-(t as f64) / 80.0).exp() * tone,
                }
            })
            .collect();
        let got = mfcc
            .compute(&apply_window(&frame, &window).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let want = mfcc_reference(&frame);
        ensure(got.len() == 13, || format!("{} coefficients", got.len()))?;
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    ensure(worst <= 1e-5, || format!("max deviation {worst:e}"))?;
    within(Duration::from_secs(10), t0.elapsed())?;
    Ok(format!("max deviation {worst:.1e} over 100 frames"))
}

// ---------------------------------------------------------------------------

/// 100 Hz impulse train through two all-pole resonators (pole radius 0.97).
fn two_resonators(f1: f64, f2: f64, n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|t| if t % 160 == 0 { 1.0 } else { 0.0 }).collect();
    for f in [f1, f2] {
        let r: f64 = 0.97;
        let (a1, a2) = (2.0 * r * (2.0 * PI * f / FS).cos(), -r * r);
        let (mut y1, mut y2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let y = *v + a1 * y1 + a2 * y2;
            y2 = y1;
            y1 = y;
            *v = y;
        }
    }
    x
}

fn formant_recovery() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let tracker = FormantTracker::new(FS);
    let hann = WindowFunction::new(WindowKind::Hann, 400);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f1 = rng.random_range(300.0..900.0);
        let f2 = rng.random_range(1000.0..2500.0);
        let sig = two_resonators(f1, f2, 2000);
        let frame = apply_window(&sig[1200..1600], &hann).map_err(|e| e.to_string())?;
        let p = tracker.analyze(&frame).map_err(|e| e.to_string())?;
        let err = (p.f1 - f1).abs().max((p.f2 - f2).abs());
        ensure(err <= 50.0, || {
            format!("({f1:.0}, {f2:.0}) recovered as ({:.0}, {:.0})", p.f1, p.f2)
        })?;
        worst = worst.max(err);
    }
    within(Duration::from_secs(10), t0.elapsed())?;
    Ok(format!("worst error {worst:.1} Hz over 20 pairs"))
}

// ---------------------------------------------------------------------------

fn pitch_accuracy() -> Outcome {
    let t0 = Instant::now();
    let yin = PitchYinFft::default();
    let hann = WindowFunction::new(WindowKind::Hann, 400);
    let mut worst: f64 = 0.0;
    for f in [80.0, 120.0, 200.0, 330.0, 440.0] {
        for phase in [0.0, 0.7, 2.1] {
            let frame: Vec<f64> = (0..400)
                .map(|t| 0.5 * (2.0 * PI * f * t as f64 / FS + phase).sin())
                .collect();
            let est = yin.estimate(&apply_window(&frame, &hann).map_err(|e| e.to_string())?);
            let rel = (est - f).abs() / f;
            ensure(rel <= 0.01, || format!("{f} Hz estimated as {est:.2} Hz"))?;
            worst = worst.max(rel);
        }
    }
    let silence = yin.estimate(&[0.0; 400]);
    ensure(silence == 0.0, || format!("silence gave {silence} Hz"))?;
    within(Duration::from_secs(5), t0.elapsed())?;
    Ok(format!("worst relative error {:.3}%", 100.0 * worst))
}

// ---------------------------------------------------------------------------

/// Random orthonormal basis by Gram-Schmidt.
fn random_basis(d: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

fn pca_contract() -> Outcome {
    let cases: [(&[f64], usize); 4] = [
        (&[0.9, 0.06, 0.04], 2),
        (&[0.5, 0.45, 0.05], 2),
        (&[0.96, 0.03, 0.01], 1),
        (&[0.4, 0.3, 0.2, 0.1], 4),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (masses, k) in cases {
        let got = retained_components(masses, 0.95);
        ensure(got == k, || format!("masses {masses:?}: k = {got}, expected {k}"))?;
        // data whose sample covariance has exactly these eigenvalues along a
        // random rotation: points at +-s_i u_i
        let d = masses.len();
        let basis = random_basis(d, &mut rng);
        let mut rows = Vec::new();
        for (m, u) in masses.iter().zip(&basis) {
            let s = (m * (2 * d - 1) as f64 / 2.0).sqrt();
            rows.push(u.iter().map(|x| 3.0 + s * x).collect::<Vec<_>>());
            rows.push(u.iter().map(|x| 3.0 - s * x).collect::<Vec<_>>());
        }
        let p = fit_pca(&rows, 0.95).map_err(|e| e.to_string())?;
        ensure(p.output_dimension() == k, || {
            format!("fit on {masses:?} kept {} components", p.output_dimension())
        })?;
        for (l, m) in p.eigenvalues.iter().zip(masses) {
            ensure((l - m).abs() < 1e-9, || format!("eigenvalue {l}, expected {m}"))?;
        }
        for i in 0..k {
            for j in 0..k {
                let dot: f64 = p.basis[i].iter().zip(&p.basis[j]).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                ensure((dot - want).abs() <= 1e-6, || format!("<b{i}, b{j}> = {dot}"))?;
            }
        }
    }
    // orthonormality on a generic 20-dimensional fit
    let rows: Vec<Vec<f64>> = (0..300)
        .map(|_| {
            let z: f64 = rng.random_range(-1.0..1.0);
            (0..20).map(|j| z * j as f64 + rng.random_range(-1.0..1.0)).collect()
        })
        .collect();
    let p = fit_pca(&rows, 1.0).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for i in 0..p.output_dimension() {
        for j in 0..p.output_dimension() {
            let dot: f64 = p.basis[i].iter().zip(&p.basis[j]).map(|(a, b)| a * b).sum();
            worst = worst.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("orthonormality error {worst:e}"))?;
    Ok(format!("k matches on 4 spectra, orthonormality error {worst:.1e}"))
}

// ---------------------------------------------------------------------------

/// Largest violation `m - M` of the dual KKT conditions, recomputed from the
/// trained model's decision values.
fn kkt_violation(x: &[Vec<f64>], y: &[f64], alphas: &[f64], c: f64, f: &[f64], bias: f64) -> f64 {
    let (mut up, mut low) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..x.len() {
        // -y_i * gradient_i = y_i - (f_i - b)
        let v = y[i] - (f[i] - bias);
        let below_c = alphas[i] < c;
        let above_0 = alphas[i] > 0.0;
        let in_up = (y[i] > 0.0 && below_c) || (y[i] < 0.0 && above_0);
        let in_low = (y[i] > 0.0 && above_0) || (y[i] < 0.0 && below_c);
        if in_up {
            up = up.max(v);
        }
        if in_low {
            low = low.min(v);
        }
    }
    up - low
}

fn svm_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let xor_x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
    let xor_y = vec![-1.0, -1.0, 1.0, 1.0];
    let mut blob_x = Vec::new();
    let mut blob_y = Vec::new();
    for i in 0..200 {
        let s: f64 = if i % 2 == 0 { 1.0 } else { -1.0 };
        blob_x.push(vec![2.0 * s + rng.random_range(-1.0..1.0), s + rng.random_range(-1.0..1.0)]);
        blob_y.push(s);
    }
    let cases = [
        ("xor", &xor_x, &xor_y, SvmHyperParams::new(100.0, 1e-3, 2.0).unwrap()),
        ("blobs", &blob_x, &blob_y, SvmHyperParams::new(1.0, 1e-3, 0.5).unwrap()),
        ("blobs, loose eps", &blob_x, &blob_y, SvmHyperParams::new(5.0, 0.1, 0.05).unwrap()),
    ];
    let mut notes = Vec::new();
    for (name, x, y, params) in cases {
        let (model, report) =
            train_svm(x, y, &params, &SmoOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        let f: Vec<f64> = x
            .iter()
            .map(|r| model.decision_value(r))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let correct = f.iter().zip(y.iter()).filter(|(f, y)| *f * *y > 0.0).count();
        ensure(correct == x.len(), || format!("{name}: {correct}/{} correct", x.len()))?;
        let gap = kkt_violation(x, y, &report.alphas, params.c, &f, model.bias());
        ensure(gap <= params.eps, || format!("{name}: KKT violation {gap:e} > eps {}", params.eps))?;
        notes.push(format!("{name} gap {gap:.1e}"));
    }

    // model file round trip
    let segs: Vec<backchannel_core::featset::SegmentFeatures> = (0..6)
        .map(|s| {
            let label = if s % 2 == 0 { Label::Confirmation } else { Label::Other };
            let c = label.sign();
            backchannel_core::featset::SegmentFeatures {
                segment_id: format!("s{s}"),
                speaker_id: format!("p{}", s / 2),
                label,
                vectors: (0..30)
                    .map(|t| backchannel_core::featset::FeatureVector {
                        values: (0..195).map(|_| c + rng.random_range(-2.0..2.0)).collect(),
                        frame_index: 14 + t,
                        kind: FeatureKind::StackedMfcc,
                    })
                    .collect(),
            }
        })
        .collect();
    let cfg = FeatureSetConfig::new(FeatureKind::StackedMfcc);
    let (bundle, _) = train_bundle(&segs, &cfg, &SvmHyperParams::default_for(cfg.kind), &TrainOptions::default())
        .map_err(|e| e.to_string())?;
    let from_bytes = ModelBundle::from_bytes(&bundle.to_bytes()).map_err(|e| e.to_string())?;
    let from_json = ModelBundle::from_json(&bundle.to_json()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for seg in &segs {
        for v in &seg.vectors {
            let a = bundle.decision_value(&v.values).map_err(|e| e.to_string())?;
            for other in [&from_bytes, &from_json] {
                let b = other.decision_value(&v.values).map_err(|e| e.to_string())?;
                worst = worst.max((a - b).abs());
            }
        }
    }
    ensure(worst <= 1e-12, || format!("round trip changed decisions by {worst:e}"))?;
    notes.push(format!("round trip {worst:.1e}"));
    Ok(notes.join(", "))
}

// ---------------------------------------------------------------------------

/// Fraction of (positive, negative) pairs ordered correctly, ties counting 1/2.
fn pairwise(scores: &[(f64, Label)]) -> f64 {
    let pos: Vec<f64> = scores.iter().filter(|s| s.1 == Label::Confirmation).map(|s| s.0).collect();
    let neg: Vec<f64> = scores.iter().filter(|s| s.1 == Label::Other).map(|s| s.0).collect();
    let mut wins = 0.0;
    for p in &pos {
        for n in &neg {
            wins += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

fn auc_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for set in 0..1000 {
        let n = rng.random_range(2..=1000);
        // coarse scores in some sets force many ties
        let levels = if set % 3 == 0 { 5.0 } else { 1e6 };
        let mut scores: Vec<(f64, Label)> = (0..n)
            .map(|_| {
                let label = if rng.random_bool(0.3) { Label::Confirmation } else { Label::Other };
                let shift = if label == Label::Confirmation { 0.5 } else { 0.0 };
                let s: f64 = rng.random_range(0.0..1.0) + shift;
                ((s * levels).round() / levels, label)
            })
            .collect();
        scores[0].1 = Label::Confirmation;
        scores[1].1 = Label::Other;
        let roc = roc_auc(&scores).map_err(|e| e.to_string())?;
        worst = worst.max((roc.auc - pairwise(&scores)).abs());
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e} over 1000 sets in {:.2?}", t0.elapsed()))
}

// ---------------------------------------------------------------------------

/// One model per feature set, trained on a small synthetic corpus.
fn models() -> Result<Vec<Arc<ModelBundle>>, String> {
    let corpus = synth_segments(&SynthConfig {
        speakers: 4,
        segments_per_speaker: 10,
        confirmation_rate: 0.2,
        seed: 99,
    });
    FeatureKind::ALL
        .iter()
        .map(|&kind| {
            let cfg = FeatureSetConfig::new(kind);
            let feats = extract_corpus(&corpus, &cfg).map_err(|e| e.to_string())?;
            let (b, _) = train_bundle(&feats, &cfg, &SvmHyperParams::default_for(kind), &TrainOptions::default())
                .map_err(|e| format!("{kind:?}: {e}"))?;
            Ok(Arc::new(b))
        })
        .collect()
}

fn random_segment(i: usize, rng: &mut ChaCha8Rng) -> AudioSegment {
    let voice = Voice::random(rng);
    let confirmation = rng.random_bool(0.5);
    let mut samples = if confirmation {
        confirmation_token(&voice, rng)
    } else {
        other_token(&voice, rng)
    };
    // random excerpt, occasionally too short for the stacked feature sets
    let len = rng.random_range(2400..=samples.len().max(2401)).min(samples.len());
    let start = rng.random_range(0..=samples.len() - len);
    samples = samples[start..start + len].to_vec();
    AudioSegment {
        source_id: format!("random{i}"),
        speaker_id: String::new(),
        start_ms: 0,
        end_ms: (len / 16) as u64,
        samples,
        label: if confirmation { Label::Confirmation } else { Label::Other },
    }
}

fn mode_parity() -> Outcome {
    let models = models()?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut latched = 0;
    for i in 0..1000 {
        let bundle = &models[i % models.len()];
        let seg = random_segment(i, &mut rng);
        let mut online = OnlineClassifier::new(Arc::clone(bundle), 0.0);
        online.begin_segment(seg.id(), 0.0);
        let chunk = rng.random_range(1..2000);
        for part in seg.samples.chunks(chunk) {
            online.push_samples(part).map_err(|e| e.to_string())?;
        }
        let (streamed, _) = online.end_segment().map_err(|e| e.to_string())?;
        if frame_count(seg.samples.len()) < bundle.feature_config.min_frames() {
            // offline refuses short segments; streaming casts no vote at all
            ensure(classify_offline(&[seg.clone()], bundle, 0.0).is_err(), || {
                format!("segment {i}: short segment accepted offline")
            })?;
            ensure(
                streamed.frame_scores.is_empty() && streamed.decided_label == Label::Other,
                || format!("segment {i}: short segment voted online"),
            )?;
            continue;
        }
        let offline = classify_offline(&[seg], bundle, 0.0).map_err(|e| e.to_string())?;
        ensure(offline[0] == streamed, || {
            format!(
                "segment {i} ({:?}): offline trigger {:?}, online {:?}",
                bundle.feature_config.kind, offline[0].trigger_frame, streamed.trigger_frame
            )
        })?;
        latched += usize::from(streamed.trigger_frame.is_some());
    }
    Ok(format!("1000 segments identical, {latched} latched"))
}

// ---------------------------------------------------------------------------

fn end_to_end() -> Outcome {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = backchannel_core::synth::generate_corpus(dir.path(), &SynthConfig::default())
        .map_err(|e| e.to_string())?;
    let rows = parse_manifest(&corpus.manifest_path).map_err(|e| e.to_string())?;
    let split = split_corpus(&rows, 0.7, 7).map_err(|e| e.to_string())?;
    ensure(split.train_speakers.is_disjoint(&split.test_speakers), || "speaker overlap".into())?;
    let train = load_segments(&corpus.manifest_path, &split.train).map_err(|e| e.to_string())?;
    let test = load_segments(&corpus.manifest_path, &split.test).map_err(|e| e.to_string())?;
    let mut notes = vec![format!(
        "{} train / {} test segments",
        train.len(),
        test.len()
    )];
    let mut failures = Vec::new();
    for kind in [FeatureKind::StackedFormants, FeatureKind::StackedMfcc] {
        let cfg = FeatureSetConfig::new(kind);
        let tr = extract_corpus(&train, &cfg).map_err(|e| e.to_string())?;
        let te = extract_corpus(&test, &cfg).map_err(|e| e.to_string())?;
        let grid = grid_search(&tr, &cfg, &SvmGrid::default(), &TrainOptions::default())
            .map_err(|e| e.to_string())?;
        let (report, _, _) = run_experiment(&tr, &te, &cfg, &grid.best, &ExperimentOptions::default())
            .map_err(|e| e.to_string())?;
        let line = format!(
            "{}: AUC {:.3}, segment accuracy {:.3} (C={}, eps={}, gamma={})",
            kind.title(),
            report.auc,
            report.segment.accuracy,
            grid.best.c,
            grid.best.eps,
            grid.best.gamma
        );
        if report.auc < 0.90 || report.segment.accuracy < 0.80 {
            failures.push(line.clone());
        }
        notes.push(line);
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    within(Duration::from_secs(15 * 60), t0.elapsed())?;
    notes.push(format!("{:.1?}", t0.elapsed()));
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------------------

fn streaming_rtf() -> Outcome {
    let models = models()?;
    let audio = synth_segments(&SynthConfig {
        speakers: 2,
        segments_per_speaker: 12,
        confirmation_rate: 0.2,
        seed: 5,
    });
    let seconds = audio.iter().map(|s| s.samples.len()).sum::<usize>() as f64 / FS;
    let mut notes = Vec::new();
    for bundle in &models {
        let t = Instant::now();
        let mut online = OnlineClassifier::new(Arc::clone(bundle), 0.0);
        for seg in &audio {
            online.begin_segment(seg.id(), seg.start_ms as f64);
            for part in seg.samples.chunks(160) {
                online.push_samples(part).map_err(|e| e.to_string())?;
            }
            online.end_segment().map_err(|e| e.to_string())?;
        }
        let rtf = t.elapsed().as_secs_f64() / seconds;
        ensure(rtf < 1.0, || format!("{:?}: real-time factor {rtf:.3}", bundle.feature_config.kind))?;
        notes.push(format!("{} {rtf:.4}", bundle.feature_config.kind.name()));
    }
    Ok(format!("{seconds:.0} s of audio; RTF {}", notes.join(", ")))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("SG exactness", sg_exactness),
        ("MFCC oracle equivalence", mfcc_oracle),
        ("Formant recovery", formant_recovery),
        ("Pitch accuracy", pitch_accuracy),
        ("PCA contract", pca_contract),
        ("SVM correctness", svm_correctness),
        ("AUC oracle", auc_oracle),
        ("Mode parity", mode_parity),
        ("End-to-end synthetic experiment", end_to_end),
        ("Streaming performance", streaming_rtf),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let status = if outcome.is_ok() { "PASS" } else { "FAIL" };
        let detail = outcome.unwrap_or_else(|e| e);
        println!("[{status}] {:>2}. {name} ({:.2?}): {detail}", i + 1, t.elapsed());
        failed += usize::from(status == "FAIL");
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
