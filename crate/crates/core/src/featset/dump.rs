use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureSetConfig, FeatureVector};
use crate::corpus::Label;

/// Sidecar describing a feature dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpMeta {
    pub config: FeatureSetConfig,
    pub dimension: usize,
    pub segment_id: String,
    pub speaker_id: String,
    pub label: Label,
    pub rows: usize,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn dump_err(path: &Path, message: impl ToString) -> FeatureError {
    FeatureError::Dump {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

/// Writes one segment's vectors as CSV (`frame_index,x0,x1,...`) plus a
/// `<path>.json` sidecar.
pub fn write_dump(
    path: impl AsRef<Path>,
    meta: &DumpMeta,
    vectors: &[FeatureVector],
) -> Result<(), FeatureError> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| dump_err(path, e))?;
    let header: Vec<String> = std::iter::once("frame_index".to_string())
        .chain((0..meta.dimension).map(|i| format!("x{i}")))
        .collect();
    w.write_record(&header).map_err(|e| dump_err(path, e))?;
    for v in vectors {
        if v.values.len() != meta.dimension {
            return Err(dump_err(
                path,
                format!("vector of length {} in a {}-dimensional dump", v.values.len(), meta.dimension),
            ));
        }
        let row: Vec<String> = std::iter::once(v.frame_index.to_string())
            .chain(v.values.iter().map(|x| format!("{x:?}")))
            .collect();
        w.write_record(&row).map_err(|e| dump_err(path, e))?;
    }
    w.flush().map_err(|e| dump_err(path, e))?;
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(meta).map_err(|e| dump_err(&side, e))?;
    std::fs::write(&side, json).map_err(|e| dump_err(&side, e))
}

/// Reads a dump written by [`write_dump`].
pub fn read_dump(path: impl AsRef<Path>) -> Result<(DumpMeta, Vec<FeatureVector>), FeatureError> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(|e| dump_err(&side, e))?;
    let meta: DumpMeta = serde_json::from_str(&text).map_err(|e| dump_err(&side, e))?;
    let mut r = csv::Reader::from_path(path).map_err(|e| dump_err(path, e))?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| dump_err(path, e))?;
        if rec.len() != meta.dimension + 1 {
            return Err(dump_err(path, format!("row {}: {} columns", i + 2, rec.len())));
        }
        let frame_index = rec[0]
            .parse()
            .map_err(|e| dump_err(path, format!("row {}: {e}", i + 2)))?;
        let values = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| dump_err(path, format!("row {}: {e}", i + 2)))?;
        out.push(FeatureVector {
            values,
            frame_index,
            kind: meta.config.kind,
        });
    }
    if out.len() != meta.rows {
        return Err(dump_err(path, format!("sidecar announces {} rows, found {}", meta.rows, out.len())));
    }
    Ok((meta, out))
}
