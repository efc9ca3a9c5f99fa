use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use backchannel_core::corpus::{load_segments, parse_manifest};
use backchannel_core::learn::load_model;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_backchannel"))
}

fn run(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    if !out.status.success() {
        eprintln!("stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn corpus(dir: &Path) -> PathBuf {
    let out = dir.join("corpus");
    let o = run(&[
        "synth-corpus",
        "--out",
        s(&out),
        "--speakers",
        "4",
        "--segments-per-speaker",
        "8",
        "--confirmation-rate",
        "0.25",
        "--seed",
        "11",
    ]);
    assert!(o.status.success());
    out.join("manifest.csv")
}

/// Walks the section list of a model file and returns the payload of `tag`.
fn section<'a>(bytes: &'a [u8], tag: &[u8; 4]) -> Option<&'a [u8]> {
    assert_eq!(&bytes[..4], b"NLCM");
    let mut pos = 8;
    while pos + 12 <= bytes.len() {
        let len = u64::from_le_bytes(bytes[pos + 4..pos + 12].try_into().unwrap()) as usize;
        let payload = &bytes[pos + 12..pos + 12 + len];
        if &bytes[pos..pos + 4] == tag {
            return Some(payload);
        }
        pos += 12 + len;
    }
    None
}

#[test]
fn synth_corpus_reloads_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let rows = parse_manifest(&manifest).unwrap();
    assert_eq!(rows.len(), 32);
    let segs = load_segments(&manifest, &rows).unwrap();
    assert!(segs.iter().all(|s| !s.samples.is_empty()));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("corpus/run.json")).unwrap())
            .unwrap();
    assert_eq!(meta["command"], "synth-corpus");
    assert_eq!(meta["seed"], 11);
    assert!(meta["timings_s"]["total"].as_f64().unwrap() >= 0.0);
}

#[test]
fn train_records_stacked_formant_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let out = dir.path().join("train");
    let o = run(&[
        "train",
        "--manifest",
        s(&manifest),
        "--feature-set",
        "stacked-formants",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    let bytes = std::fs::read(out.join("model.nlcm")).unwrap();
    let parm = section(&bytes, b"PARM").expect("PARM section");
    let vals: Vec<f64> = parm
        .chunks(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    assert_eq!(vals, vec![1.0, 0.5, 0.05]);
    let model = load_model(out.join("model.nlcm")).unwrap();
    assert_eq!((model.hyperparams.c, model.hyperparams.eps, model.hyperparams.gamma), (1.0, 0.5, 0.05));
    assert!(out.join("model.json").exists());
    assert!(out.join("run.json").exists());
}

#[test]
fn grid_search_scores_sixteen_points() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let out = dir.path().join("grid");
    let o = run(&["grid-search", "--manifest", s(&manifest), "-f", "formant-sd", "--out", s(&out)]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out.join("grid.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "c,eps,gamma,weighted_accuracy,min_accuracy,max_accuracy");
    assert_eq!(lines.len(), 17);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("grid.json")).unwrap()).unwrap();
    assert_eq!(report["points"].as_array().unwrap().len(), 16);
}

#[test]
fn classify_and_listen_agree() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let model_dir = dir.path().join("model");
    assert!(run(&["train", "--manifest", s(&manifest), "-f", "stacked-mfcc", "--out", s(&model_dir)])
        .status
        .success());
    let model = model_dir.join("model.nlcm");
    let wav = manifest.with_file_name("spk01.wav");
    for input in [vec!["--manifest", s(&manifest)], vec!["--wav", s(&wav)]] {
        let a = dir.path().join("offline");
        let b = dir.path().join("online");
        let mut args = vec!["classify", "--model", s(&model), "--out", s(&a)];
        args.extend(&input);
        assert!(run(&args).status.success());
        let mut args = vec!["listen", "--model", s(&model), "--out", s(&b), "--chunk-ms", "7"];
        args.extend(&input);
        assert!(run(&args).status.success());
        let offline = std::fs::read_to_string(a.join("segments.csv")).unwrap();
        let online = std::fs::read_to_string(b.join("segments.csv")).unwrap();
        assert!(offline.lines().count() > 1);
        assert_eq!(offline, online);
        let triggers = std::fs::read_to_string(b.join("triggers.ndjson")).unwrap();
        let latched = offline.lines().skip(1).filter(|l| l.contains(",confirmation,")).count();
        assert_eq!(triggers.lines().count(), latched);
        let decisions = std::fs::read_to_string(a.join("decisions.csv")).unwrap();
        assert!(decisions.starts_with("segment_id,frame_index,decision_value,prediction\n"));
    }
}

#[test]
fn evaluate_writes_reports_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let out = dir.path().join("eval");
    let o = run(&[
        "evaluate",
        "--manifest",
        s(&manifest),
        "-f",
        "formant-sd",
        "--train-fraction",
        "0.6",
        "--segment-roc",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.starts_with("Feature set"));
    assert!(table.contains("SD of formants"));
    assert!(out.join("report_formant-sd.json").exists());
    let roc = std::fs::read_to_string(out.join("roc_formant-sd.csv")).unwrap();
    assert!(roc.starts_with("threshold,fpr,tpr\n"));
}

#[test]
fn extract_writes_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let out = dir.path().join("feat");
    assert!(run(&["extract", "--manifest", s(&manifest), "-f", "pitch", "--out", s(&out)])
        .status
        .success());
    let first = out.join("features/pitch/00000.csv");
    let (meta, vectors) = backchannel_core::featset::read_dump(&first).unwrap();
    assert_eq!(meta.dimension, 1);
    assert_eq!(meta.rows, vectors.len());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "feature_set = \"pitch\"\nseed = 4\n[svm]\nc = 5.0\neps = 0.05\n").unwrap();
    let out = dir.path().join("t");
    let o = run(&[
        "train",
        "--config",
        s(&cfg),
        "--manifest",
        s(&manifest),
        "--eps",
        "0.1",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["feature_set"]["kind"], "pitch");
    assert_eq!(meta["config"]["svm"]["c"], 5.0);
    assert_eq!(meta["config"]["svm"]["eps"], 0.1);
    assert_eq!(meta["config"]["svm"]["gamma"], 0.05);
    assert_eq!(meta["seed"], 4);
}

#[test]
fn exit_codes_follow_error_category() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    // missing manifest and invalid values are configuration errors
    assert_eq!(code(&["train", "--out", s(&out)]), Some(2));
    assert_eq!(code(&["train", "--manifest", "m.csv", "--gamma", "0", "--out", s(&out)]), Some(2));
    assert_eq!(code(&["train", "-f", "spectrogram", "--out", s(&out)]), Some(2));
    // unreadable or malformed data
    let missing = dir.path().join("missing.csv");
    assert_eq!(code(&["train", "--manifest", s(&missing), "--out", s(&out)]), Some(3));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "wav_path,speaker_id,start_ms,end_ms,label\na.wav,s,10,5,other\n").unwrap();
    assert_eq!(code(&["train", "--manifest", s(&bad), "--out", s(&out)]), Some(3));
    let junk = dir.path().join("junk.nlcm");
    std::fs::write(&junk, b"not a model").unwrap();
    assert_eq!(
        code(&["classify", "--model", s(&junk), "--manifest", s(&bad), "--out", s(&out)]),
        Some(3)
    );
}
