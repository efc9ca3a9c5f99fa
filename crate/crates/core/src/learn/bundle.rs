use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::normalize::{fit_normalizer, NormalizerStats};
use super::pca::{fit_pca, PcaTransform, DEFAULT_PCA_EPSILON};
use super::svm::{train_svm, SmoOptions, SvmHyperParams, SvmModel, TrainReport};
use super::LearnError;
use crate::eval::balance_indices;
use crate::featset::{FeatureKind, FeatureSetConfig, SegmentFeatures};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"NLCM";

/// Everything needed to turn a raw feature vector into a decision value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub feature_config: FeatureSetConfig,
    pub hyperparams: SvmHyperParams,
    pub normalizer: NormalizerStats,
    pub pca: Option<PcaTransform>,
    pub svm: SvmModel,
}

impl ModelBundle {
    pub fn new(
        feature_config: FeatureSetConfig,
        hyperparams: SvmHyperParams,
        normalizer: NormalizerStats,
        pca: Option<PcaTransform>,
        svm: SvmModel,
    ) -> Result<Self, LearnError> {
        let b = Self {
            format_version: FORMAT_VERSION,
            feature_config,
            hyperparams,
            normalizer,
            pca,
            svm,
        };
        b.check_chain()?;
        Ok(b)
    }

    fn check_chain(&self) -> Result<(), LearnError> {
        let raw = self.feature_config.dimension();
        let mismatch = |expected, got| LearnError::DimensionMismatch { expected, got };
        if self.normalizer.dimension() != raw || self.normalizer.std.len() != raw {
            return Err(mismatch(raw, self.normalizer.dimension()));
        }
        let svm_in = match &self.pca {
            Some(p) => {
                if p.input_dimension() != raw {
                    return Err(mismatch(raw, p.input_dimension()));
                }
                if p.basis.iter().any(|r| r.len() != raw) {
                    return Err(LearnError::CorruptModel("ragged PCA basis".into()));
                }
                p.output_dimension()
            }
            None => raw,
        };
        if self.svm.dimension() != svm_in {
            return Err(mismatch(svm_in, self.svm.dimension()));
        }
        Ok(())
    }

    /// Normalisation followed by the optional PCA projection.
    pub fn prepare(&self, raw: &[f64]) -> Result<Vec<f64>, LearnError> {
        let z = self.normalizer.transform(raw)?;
        match &self.pca {
            Some(p) => p.project(&z),
            None => Ok(z),
        }
    }

    pub fn decision_value(&self, raw: &[f64]) -> Result<f64, LearnError> {
        self.svm.decision_value(&self.prepare(raw)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LearnError> {
        let b: Self =
            serde_json::from_str(text).map_err(|e| LearnError::CorruptModel(e.to_string()))?;
        b.check_chain()?;
        Ok(b)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.format_version.to_le_bytes());

        let mut s = Section::default();
        s.u8(kind_code(self.feature_config.kind));
        s.u32(self.feature_config.stack_depth as u32);
        s.write_to(b"FEAT", &mut out);

        let mut s = Section::default();
        s.f64s(&[self.hyperparams.c, self.hyperparams.eps, self.hyperparams.gamma]);
        s.write_to(b"PARM", &mut out);

        let mut s = Section::default();
        s.u32(self.normalizer.dimension() as u32);
        s.f64s(&self.normalizer.mean);
        s.f64s(&self.normalizer.std);
        s.write_to(b"NORM", &mut out);

        if let Some(p) = &self.pca {
            let mut s = Section::default();
            s.u32(p.output_dimension() as u32);
            s.u32(p.input_dimension() as u32);
            s.f64s(&[p.epsilon, p.total_variance]);
            s.f64s(&p.mean);
            s.f64s(&p.eigenvalues);
            for row in &p.basis {
                s.f64s(row);
            }
            s.write_to(b"PCA ", &mut out);
        }

        let mut s = Section::default();
        s.u32(self.svm.dimension() as u32);
        s.u32(self.svm.support_count() as u32);
        s.f64s(&[self.svm.gamma(), self.svm.bias()]);
        s.f64s(self.svm.coefficients());
        s.f64s(self.svm.flat_support_vectors());
        s.write_to(b"SVM ", &mut out);

        Section::default().write_to(b"END ", &mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, LearnError> {
        if bytes.len() < 8 {
            return Err(LearnError::CorruptModel("file shorter than its header".into()));
        }
        if &bytes[..4] != MAGIC {
            return Err(LearnError::VersionMismatch("not a model file (bad magic)".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(LearnError::VersionMismatch(format!(
                "format version {version}, this build reads {FORMAT_VERSION}"
            )));
        }
        let mut r = Reader { buf: &bytes[8..] };
        let mut feat = None;
        let mut parm = None;
        let mut norm = None;
        let mut pca = None;
        let mut svm = None;
        loop {
            let tag: [u8; 4] = r.take(4)?.try_into().expect("4 bytes");
            let len = r.u64()? as usize;
            let mut p = Reader { buf: r.take(len)? };
            match &tag {
                b"FEAT" => {
                    let kind = kind_from_code(p.u8()?)?;
                    let stack_depth = p.u32()? as usize;
                    feat = Some(FeatureSetConfig { kind, stack_depth });
                }
                b"PARM" => {
                    let v = p.f64s(3)?;
                    parm = Some(SvmHyperParams {
                        c: v[0],
                        eps: v[1],
                        gamma: v[2],
                    });
                }
                b"NORM" => {
                    let d = p.u32()? as usize;
                    norm = Some(NormalizerStats {
                        mean: p.f64s(d)?,
                        std: p.f64s(d)?,
                    });
                }
                b"PCA " => {
                    let k = p.u32()? as usize;
                    let d = p.u32()? as usize;
                    let head = p.f64s(2)?;
                    let mean = p.f64s(d)?;
                    let eigenvalues = p.f64s(k)?;
                    let basis = (0..k).map(|_| p.f64s(d)).collect::<Result<_, _>>()?;
                    pca = Some(PcaTransform {
                        epsilon: head[0],
                        mean,
                        basis,
                        eigenvalues,
                        total_variance: head[1],
                    });
                }
                b"SVM " => {
                    let d = p.u32()? as usize;
                    let n = p.u32()? as usize;
                    let head = p.f64s(2)?;
                    let coef = p.f64s(n)?;
                    let sv = p.f64s(n.checked_mul(d).ok_or_else(overflow)?)?;
                    svm = Some(SvmModel::from_parts(d, sv, coef, head[1], head[0])?);
                }
                b"END " => break,
                other => {
                    return Err(LearnError::CorruptModel(format!(
                        "unknown section {:?}",
                        String::from_utf8_lossy(other)
                    )))
                }
            }
            if !p.buf.is_empty() {
                return Err(LearnError::CorruptModel(format!(
                    "section {:?} has {} trailing bytes",
                    String::from_utf8_lossy(&tag),
                    p.buf.len()
                )));
            }
        }
        let missing = |name: &str| LearnError::CorruptModel(format!("missing {name} section"));
        let feature_config = feat.ok_or_else(|| missing("feature"))?;
        let b = Self {
            format_version: version,
            feature_config,
            hyperparams: parm.ok_or_else(|| missing("parameter"))?,
            normalizer: norm.ok_or_else(|| missing("normalizer"))?,
            pca,
            svm: svm.ok_or_else(|| missing("svm"))?,
        };
        b.check_chain()?;
        Ok(b)
    }
}

fn overflow() -> LearnError {
    LearnError::CorruptModel("section size overflow".into())
}

fn kind_code(kind: FeatureKind) -> u8 {
    FeatureKind::ALL
        .iter()
        .position(|k| *k == kind)
        .expect("listed kind") as u8
}

fn kind_from_code(code: u8) -> Result<FeatureKind, LearnError> {
    FeatureKind::ALL
        .get(code as usize)
        .copied()
        .ok_or_else(|| LearnError::CorruptModel(format!("unknown feature kind {code}")))
}

#[derive(Default)]
struct Section {
    buf: Vec<u8>,
}

impl Section {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s(&mut self, v: &[f64]) {
        for x in v {
            self.buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    fn write_to(self, tag: &[u8; 4], out: &mut Vec<u8>) {
        out.extend_from_slice(tag);
        out.extend_from_slice(&(self.buf.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.buf);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], LearnError> {
        if self.buf.len() < n {
            return Err(LearnError::CorruptModel(format!(
                "truncated: needed {n} bytes, {} left",
                self.buf.len()
            )));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }
    fn u8(&mut self) -> Result<u8, LearnError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, LearnError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64, LearnError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, LearnError> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(overflow)?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

pub fn save_model(bundle: &ModelBundle, path: impl AsRef<Path>) -> Result<(), LearnError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bundle.to_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelBundle, LearnError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    ModelBundle::from_bytes(&bytes)
}

/// Settings for turning labelled segments into a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub pca_epsilon: f64,
    /// Apply z-score normalisation to every feature set, not only those
    /// reduced by PCA.
    pub normalize: bool,
    /// Subsample the majority class to the minority frame count.
    pub balance: bool,
    pub seed: u64,
    pub smo: SmoOptions,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            pca_epsilon: DEFAULT_PCA_EPSILON,
            normalize: true,
            balance: true,
            seed: 0,
            smo: SmoOptions::default(),
        }
    }
}

/// Balances the frames of `segments`, fits normaliser and PCA, and trains
/// the SVM.
pub fn train_bundle(
    segments: &[SegmentFeatures],
    config: &FeatureSetConfig,
    params: &SvmHyperParams,
    options: &TrainOptions,
) -> crate::Result<(ModelBundle, TrainReport)> {
    let dim = config.dimension();
    let mut rows: Vec<&[f64]> = Vec::new();
    let mut labels = Vec::new();
    for seg in segments {
        for v in seg.rows() {
            if v.len() != dim {
                return Err(LearnError::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                }
                .into());
            }
            rows.push(v);
            labels.push(seg.label);
        }
    }
    let keep: Vec<usize> = if options.balance {
        balance_indices(&labels, options.seed)?
    } else {
        (0..rows.len()).collect()
    };
    let raw: Vec<Vec<f64>> = keep.iter().map(|&i| rows[i].to_vec()).collect();
    let y: Vec<f64> = keep.iter().map(|&i| labels[i].sign()).collect();

    let needs_pca = config.uses_pca();
    let normalizer = if options.normalize || needs_pca {
        fit_normalizer(&raw)?
    } else {
        NormalizerStats::identity(dim)
    };
    let z: Vec<Vec<f64>> = raw
        .iter()
        .map(|r| normalizer.transform(r))
        .collect::<Result<_, _>>()?;
    let (pca, x) = if needs_pca {
        let p = fit_pca(&z, options.pca_epsilon)?;
        let x = z.iter().map(|r| p.project(r)).collect::<Result<_, _>>()?;
        (Some(p), x)
    } else {
        (None, z)
    };
    let (svm, report) = train_svm(&x, &y, params, &options.smo)?;
    let bundle = ModelBundle::new(*config, *params, normalizer, pca, svm)?;
    Ok((bundle, report))
}
