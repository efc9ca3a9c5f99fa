use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use backchannel_core::corpus::{
    frame_count, load_segments, load_wav, parse_manifest, split_corpus, vad_segments,
    AudioSegment, CorpusError, SegmentDescriptor, SAMPLE_RATE,
};
use backchannel_core::eval::{results_table, run_experiment, EvalReport, ExperimentOptions};
use backchannel_core::featset::{extract_corpus, write_dump, DumpMeta, FeatureKind, FeatureSetConfig};
use backchannel_core::learn::{
    grid_search as search, load_model, save_model, train_bundle, SvmGrid, SvmHyperParams,
    TrainOptions,
};
use backchannel_core::pipeline::{
    classify_offline, offline_csv, segment_csv, trigger_ndjson, OnlineClassifier, SegmentDecision,
};
use backchannel_core::synth::{generate_corpus, SynthConfig};
use backchannel_core::Error;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;

/// One command invocation: resolved config, output directory, timings and
/// the metadata written to `run.json` at the end.
pub struct Run {
    pub cfg: RunConfig,
    command: &'static str,
    started: Instant,
    timings: Map<String, Value>,
    results: Map<String, Value>,
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
    .into()
}

impl Run {
    pub fn start(command: &'static str, cfg: RunConfig) -> Result<Self, Error> {
        std::fs::create_dir_all(&cfg.out).map_err(|e| io_error(&cfg.out, e))?;
        Ok(Self {
            cfg,
            command,
            started: Instant::now(),
            timings: Map::new(),
            results: Map::new(),
        })
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&Self) -> Result<T, Error>) -> Result<T, Error> {
        let t = Instant::now();
        let out = f(self)?;
        let secs = t.elapsed().as_secs_f64();
        let prev = self.timings.get(stage).and_then(Value::as_f64).unwrap_or(0.0);
        self.timings.insert(stage.to_string(), json!(prev + secs));
        Ok(out)
    }

    fn record(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }

    fn path(&self, name: impl AsRef<Path>) -> PathBuf {
        self.cfg.out.join(name)
    }

    fn write(&self, name: impl AsRef<Path>, contents: impl AsRef<[u8]>) -> Result<PathBuf, Error> {
        let path = self.path(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        }
        std::fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
        Ok(path)
    }

    fn train_options(&self) -> TrainOptions {
        TrainOptions {
            pca_epsilon: self.cfg.pca_epsilon,
            seed: self.cfg.seed,
            ..TrainOptions::default()
        }
    }

    pub fn finish(mut self) -> Result<(), Error> {
        self.timings
            .insert("total".into(), json!(self.started.elapsed().as_secs_f64()));
        let meta = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.cfg.seed,
            "config": self.cfg,
            "timings_s": self.timings,
            "results": self.results,
        });
        let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
        self.write("run.json", text)?;
        Ok(())
    }
}

fn load_manifest(path: &Path) -> Result<(Vec<SegmentDescriptor>, Vec<AudioSegment>), Error> {
    let rows = parse_manifest(path)?;
    let segments = load_segments(path, &rows)?;
    Ok((rows, segments))
}

pub fn extract(run: &mut Run) -> Result<(), Error> {
    let manifest = run.cfg.manifest()?.to_path_buf();
    let (_, segments) = run.timed("load", |_| load_manifest(&manifest))?;
    let config = run.cfg.feature_set;
    let features = run.timed("extract", |_| Ok(extract_corpus(&segments, &config)?))?;
    let dir = PathBuf::from("features").join(config.kind.name());
    std::fs::create_dir_all(run.path(&dir)).map_err(|e| io_error(&run.path(&dir), e))?;
    let mut rows = 0;
    for (i, seg) in features.iter().enumerate() {
        let meta = DumpMeta {
            config,
            dimension: config.dimension(),
            segment_id: seg.segment_id.clone(),
            speaker_id: seg.speaker_id.clone(),
            label: seg.label,
            rows: seg.vectors.len(),
        };
        write_dump(run.path(dir.join(format!("{i:05}.csv"))), &meta, &seg.vectors)?;
        rows += seg.vectors.len();
    }
    println!(
        "{}: {} segments, {} vectors of dimension {} in {}",
        config.kind.title(),
        features.len(),
        rows,
        config.dimension(),
        run.path(&dir).display()
    );
    run.record("segments", json!(features.len()));
    run.record("vectors", json!(rows));
    Ok(())
}

pub fn train(run: &mut Run) -> Result<(), Error> {
    let manifest = run.cfg.manifest()?.to_path_buf();
    let (_, segments) = run.timed("load", |_| load_manifest(&manifest))?;
    let config = run.cfg.feature_set;
    let features = run.timed("extract", |_| Ok(extract_corpus(&segments, &config)?))?;
    let (bundle, report) = run.timed("train", |r| {
        train_bundle(&features, &config, &r.cfg.svm, &r.train_options())
    })?;
    let model_path = run.path("model.nlcm");
    save_model(&bundle, &model_path)?;
    run.write("model.json", bundle.to_json())?;
    println!(
        "{}: C={} eps={} gamma={}, {} training frames, {} support vectors, model dimension {}",
        config.kind.title(),
        bundle.hyperparams.c,
        bundle.hyperparams.eps,
        bundle.hyperparams.gamma,
        report.alphas.len(),
        report.support_vectors,
        bundle.svm.dimension()
    );
    println!("model written to {}", model_path.display());
    run.record("model", json!(model_path));
    run.record("training_frames", json!(report.alphas.len()));
    run.record("support_vectors", json!(report.support_vectors));
    run.record("smo_iterations", json!(report.iterations));
    Ok(())
}

pub fn grid_search(run: &mut Run) -> Result<(), Error> {
    let manifest = run.cfg.manifest()?.to_path_buf();
    let (_, segments) = run.timed("load", |_| load_manifest(&manifest))?;
    let config = run.cfg.feature_set;
    let features = run.timed("extract", |_| Ok(extract_corpus(&segments, &config)?))?;
    let report = run.timed("grid_search", |r| {
        search(&features, &config, &SvmGrid::default(), &r.train_options())
    })?;
    let mut csv = String::from("c,eps,gamma,weighted_accuracy,min_accuracy,max_accuracy\n");
    for p in &report.points {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            p.params.c, p.params.eps, p.params.gamma, p.cv.weighted_accuracy, p.cv.min_accuracy, p.cv.max_accuracy
        );
    }
    run.write("grid.csv", &csv)?;
    run.write("grid.json", serde_json::to_string_pretty(&report).expect("report serializes"))?;
    print!("{csv}");
    println!(
        "best: C={} eps={} gamma={} (weighted CV accuracy {:.4})",
        report.best.c, report.best.eps, report.best.gamma, report.best_score
    );
    run.record("best", json!(report.best));
    run.record("best_score", json!(report.best_score));
    Ok(())
}

pub struct EvaluateOptions {
    pub all: bool,
    pub grid: bool,
    pub cross_validate: bool,
    pub segment_roc: bool,
}

pub fn evaluate(run: &mut Run, opts: &EvaluateOptions) -> Result<(), Error> {
    let manifest = run.cfg.manifest()?.to_path_buf();
    let test_manifest = run.cfg.test_manifest.clone();
    let (train, test) = run.timed("load", |r| match &test_manifest {
        Some(t) => Ok((load_manifest(&manifest)?.1, load_manifest(t)?.1)),
        None => {
            let rows = parse_manifest(&manifest)?;
            let split = split_corpus(&rows, r.cfg.train_fraction, r.cfg.seed)?;
            Ok((load_segments(&manifest, &split.train)?, load_segments(&manifest, &split.test)?))
        }
    })?;
    let kinds: Vec<FeatureKind> = if opts.all {
        FeatureKind::ALL.to_vec()
    } else {
        vec![run.cfg.feature_set.kind]
    };
    let mut reports: Vec<EvalReport> = Vec::new();
    for kind in kinds {
        let config = FeatureSetConfig::new(kind);
        let (tr, te) = run.timed("extract", |_| {
            Ok((extract_corpus(&train, &config)?, extract_corpus(&test, &config)?))
        })?;
        let params = if opts.grid {
            run.timed("grid_search", |r| {
                Ok(search(&tr, &config, &SvmGrid::default(), &r.train_options())?.best)
            })?
        } else if opts.all {
            SvmHyperParams::default_for(kind)
        } else {
            run.cfg.svm
        };
        let options = ExperimentOptions {
            train: run.train_options(),
            majority_threshold: run.cfg.majority_threshold,
            cross_validate: opts.cross_validate,
        };
        let (report, _, _) =
            run.timed("evaluate", |_| run_experiment(&tr, &te, &config, &params, &options))?;
        let name = kind.name();
        run.write(format!("report_{name}.json"), report.to_json())?;
        run.write(format!("roc_{name}.csv"), report.roc.to_csv())?;
        if opts.segment_roc {
            if let Some(roc) = &report.segment_roc {
                run.write(format!("segment_roc_{name}.csv"), roc.to_csv())?;
            }
        }
        reports.push(report);
    }
    let table = results_table(&reports);
    run.write("results.txt", &table)?;
    print!("{table}");
    run.record("train_segments", json!(train.len()));
    run.record("test_segments", json!(test.len()));
    run.record(
        "feature_sets",
        Value::Array(
            reports
                .iter()
                .map(|r| {
                    json!({
                        "feature_set": r.feature_config.kind,
                        "hyperparams": r.hyperparams,
                        "auc": r.auc,
                        "segment_accuracy": r.segment.accuracy,
                    })
                })
                .collect(),
        ),
    );
    Ok(())
}

/// Segments to classify: manifest rows, or voice-activity segments of a WAV.
fn input_segments(run: &Run, wav: Option<&Path>) -> Result<Vec<AudioSegment>, Error> {
    match wav {
        Some(path) => {
            let audio = load_wav(path)?;
            let source = path
                .file_name()
                .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
            let mut segs = vad_segments(&audio, &run.cfg.vad);
            for s in &mut segs {
                s.source_id = source.clone();
            }
            Ok(segs)
        }
        None => Ok(load_manifest(run.cfg.manifest()?)?.1),
    }
}

/// Drops segments too short for the feature set; both classification modes
/// apply the same rule.
fn usable(run: &mut Run, segments: Vec<AudioSegment>) -> Vec<AudioSegment> {
    let min = run.cfg.feature_set.min_frames();
    let (keep, short): (Vec<_>, Vec<_>) =
        segments.into_iter().partition(|s| frame_count(s.samples.len()) >= min);
    if !short.is_empty() {
        eprintln!("skipping {} segment(s) shorter than {min} frames", short.len());
    }
    run.record(
        "skipped_segments",
        Value::Array(short.iter().map(|s| json!(s.id())).collect()),
    );
    keep
}

fn load_run_model(run: &mut Run) -> Result<Arc<backchannel_core::learn::ModelBundle>, Error> {
    let path = run.cfg.model()?.to_path_buf();
    let bundle = load_model(&path)?;
    // the model decides the features; the config echo should say so
    run.cfg.feature_set = bundle.feature_config;
    run.cfg.svm = bundle.hyperparams;
    Ok(Arc::new(bundle))
}

fn summarize(run: &mut Run, decisions: &[SegmentDecision]) {
    let hits = decisions
        .iter()
        .filter(|d| d.trigger_frame.is_some())
        .count();
    println!("{} segments, {} classified as confirmation", decisions.len(), hits);
    run.record("segments", json!(decisions.len()));
    run.record("confirmations", json!(hits));
}

pub fn classify(run: &mut Run, wav: Option<&Path>) -> Result<(), Error> {
    let bundle = load_run_model(run)?;
    let segments = run.timed("load", |r| input_segments(r, wav))?;
    let segments = usable(run, segments);
    let decisions = run.timed("classify", |r| {
        classify_offline(&segments, &bundle, r.cfg.majority_threshold)
    })?;
    run.write("decisions.csv", offline_csv(&decisions))?;
    run.write("segments.csv", segment_csv(&decisions))?;
    summarize(run, &decisions);
    Ok(())
}

pub fn listen(run: &mut Run, wav: Option<&Path>, chunk_ms: u64) -> Result<(), Error> {
    if chunk_ms == 0 {
        return Err(Error::Config("chunk_ms must be positive".into()));
    }
    let bundle = load_run_model(run)?;
    let segments = run.timed("load", |r| input_segments(r, wav))?;
    let segments = usable(run, segments);
    let chunk = (chunk_ms * u64::from(SAMPLE_RATE) / 1000) as usize;
    let threshold = run.cfg.majority_threshold;
    let t = Instant::now();
    let mut classifier = OnlineClassifier::new(bundle, threshold);
    let mut events = Vec::new();
    let mut decisions = Vec::with_capacity(segments.len());
    for seg in &segments {
        classifier.begin_segment(seg.id(), seg.start_ms as f64);
        for part in seg.samples.chunks(chunk) {
            events.extend(classifier.push_samples(part)?);
        }
        let (decision, late) = classifier.end_segment()?;
        events.extend(late);
        decisions.push(decision);
    }
    let wall = t.elapsed().as_secs_f64();
    let audio_s = segments.iter().map(|s| s.samples.len()).sum::<usize>() as f64
        / f64::from(SAMPLE_RATE);
    let rtf = if audio_s > 0.0 { wall / audio_s } else { 0.0 };
    run.timings.insert("listen".into(), json!(wall));
    run.write("triggers.ndjson", trigger_ndjson(&events))?;
    run.write("segments.csv", segment_csv(&decisions))?;
    summarize(run, &decisions);
    println!("{audio_s:.1} s of audio in {wall:.2} s (real-time factor {rtf:.4})");
    run.record("audio_seconds", json!(audio_s));
    run.record("real_time_factor", json!(rtf));
    run.record("triggers", json!(events.len()));
    Ok(())
}

pub fn synth_corpus(
    run: &mut Run,
    speakers: usize,
    segments_per_speaker: usize,
    confirmation_rate: f64,
) -> Result<(), Error> {
    if speakers == 0 || segments_per_speaker < 2 || !(0.0..=1.0).contains(&confirmation_rate) {
        return Err(Error::Config(
            "synthetic corpus needs speakers >= 1, segments_per_speaker >= 2 and a rate in [0, 1]"
                .into(),
        ));
    }
    let cfg = SynthConfig {
        speakers,
        segments_per_speaker,
        confirmation_rate,
        seed: run.cfg.seed,
    };
    let out = run.cfg.out.clone();
    let corpus = run.timed("synthesize", |_| Ok(generate_corpus(&out, &cfg)?))?;
    let confirmations = corpus
        .rows
        .iter()
        .filter(|r| r.label == backchannel_core::corpus::Label::Confirmation)
        .count();
    println!(
        "{} segments ({} confirmations) from {} speakers; manifest {}",
        corpus.rows.len(),
        confirmations,
        speakers,
        corpus.manifest_path.display()
    );
    run.record("manifest", json!(corpus.manifest_path));
    run.record("segments", json!(corpus.rows.len()));
    run.record("confirmations", json!(confirmations));
    Ok(())
}
