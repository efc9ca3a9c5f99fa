use std::path::{Path, PathBuf};

use backchannel_core::corpus::VadConfig;
use backchannel_core::featset::{FeatureKind, FeatureSetConfig, STACK_DEPTH};
use backchannel_core::learn::{SvmHyperParams, DEFAULT_PCA_EPSILON};
use backchannel_core::pipeline::DEFAULT_MAJORITY_THRESHOLD;
use backchannel_core::Error;
use serde::{Deserialize, Serialize};

/// Contents of a `--config` TOML file. Every key is optional.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub feature_set: Option<String>,
    pub stack_depth: Option<usize>,
    pub pca_epsilon: Option<f64>,
    pub majority_threshold: Option<f64>,
    pub seed: Option<u64>,
    pub train_fraction: Option<f64>,
    pub manifest: Option<PathBuf>,
    pub test_manifest: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub svm: SvmSection,
    #[serde(default)]
    pub vad: VadSection,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmSection {
    pub c: Option<f64>,
    pub eps: Option<f64>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VadSection {
    pub threshold: Option<f64>,
    pub hangover_ms: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("config {}: {e}", path.display())))
    }
}

/// Values given on the command line; they take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub feature_set: Option<String>,
    pub stack_depth: Option<usize>,
    pub pca_epsilon: Option<f64>,
    pub majority_threshold: Option<f64>,
    pub seed: Option<u64>,
    pub train_fraction: Option<f64>,
    pub manifest: Option<PathBuf>,
    pub test_manifest: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub c: Option<f64>,
    pub eps: Option<f64>,
    pub gamma: Option<f64>,
    pub vad_threshold: Option<f64>,
    pub vad_hangover_ms: Option<u64>,
}

/// Fully resolved settings of one run, echoed into the run metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub feature_set: FeatureSetConfig,
    pub svm: SvmHyperParams,
    pub pca_epsilon: f64,
    pub majority_threshold: f64,
    pub vad: VadConfig,
    pub seed: u64,
    pub train_fraction: f64,
    pub manifest: Option<PathBuf>,
    pub test_manifest: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn resolve(file: &FileConfig, flags: &Overrides) -> Result<Self, Error> {
        let kind = match flags.feature_set.as_ref().or(file.feature_set.as_ref()) {
            Some(name) => name
                .parse::<FeatureKind>()
                .map_err(|_| Error::Config(format!("unknown feature set '{name}'")))?,
            None => FeatureKind::StackedFormants,
        };
        let stack_depth = flags.stack_depth.or(file.stack_depth).unwrap_or(STACK_DEPTH);
        if stack_depth != STACK_DEPTH {
            return Err(Error::Config(format!(
                "stack depth {stack_depth} is not supported (only {STACK_DEPTH})"
            )));
        }
        let defaults = SvmHyperParams::default_for(kind);
        let svm = SvmHyperParams::new(
            flags.c.or(file.svm.c).unwrap_or(defaults.c),
            flags.eps.or(file.svm.eps).unwrap_or(defaults.eps),
            flags.gamma.or(file.svm.gamma).unwrap_or(defaults.gamma),
        )
        .map_err(|e| Error::Config(e.to_string()))?;

        let pca_epsilon = flags.pca_epsilon.or(file.pca_epsilon).unwrap_or(DEFAULT_PCA_EPSILON);
        if !(pca_epsilon > 0.0 && pca_epsilon <= 1.0) {
            return Err(Error::Config(format!("pca_epsilon {pca_epsilon} outside (0, 1]")));
        }
        let majority_threshold = flags
            .majority_threshold
            .or(file.majority_threshold)
            .unwrap_or(DEFAULT_MAJORITY_THRESHOLD);
        if !(-1.0..1.0).contains(&majority_threshold) {
            return Err(Error::Config(format!(
                "majority_threshold {majority_threshold} outside [-1, 1)"
            )));
        }
        let train_fraction = flags.train_fraction.or(file.train_fraction).unwrap_or(0.7);
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::Config(format!("train_fraction {train_fraction} outside (0, 1)")));
        }
        let vad_default = VadConfig::default();
        let vad = VadConfig {
            threshold: flags.vad_threshold.or(file.vad.threshold).unwrap_or(vad_default.threshold),
            hangover_ms: flags
                .vad_hangover_ms
                .or(file.vad.hangover_ms)
                .unwrap_or(vad_default.hangover_ms),
        };
        Ok(Self {
            feature_set: FeatureSetConfig::new(kind),
            svm,
            pca_epsilon,
            majority_threshold,
            vad,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            train_fraction,
            manifest: flags.manifest.clone().or_else(|| file.manifest.clone()),
            test_manifest: flags.test_manifest.clone().or_else(|| file.test_manifest.clone()),
            model: flags.model.clone().or_else(|| file.model.clone()),
            out: flags
                .out
                .clone()
                .or_else(|| file.out.clone())
                .unwrap_or_else(|| PathBuf::from("out")),
        })
    }

    pub fn manifest(&self) -> Result<&Path, Error> {
        self.manifest
            .as_deref()
            .ok_or_else(|| Error::Config("no manifest given (--manifest or `manifest` key)".into()))
    }

    pub fn model(&self) -> Result<&Path, Error> {
        self.model
            .as_deref()
            .ok_or_else(|| Error::Config("no model given (--model or `model` key)".into()))
    }
}
