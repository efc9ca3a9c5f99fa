use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::wav::{load_wav, wav_len};
use super::{ms_to_samples, AudioSegment, CorpusError, Label, FRAME_LEN, SAMPLE_RATE};

pub const MANIFEST_HEADER: [&str; 5] = ["wav_path", "speaker_id", "start_ms", "end_ms", "label"];

const MIN_SEGMENT_MS: u64 = (FRAME_LEN as u64 * 1000) / SAMPLE_RATE as u64;

/// One manifest row. `wav_path` is kept exactly as written; relative paths
/// are resolved against the manifest's directory when audio is loaded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentDescriptor {
    pub wav_path: String,
    pub speaker_id: String,
    pub start_ms: u64,
    pub end_ms: u64,
    pub label: Label,
}

/// Parses manifest text. Row numbers in errors are 1-based file lines.
pub fn parse_manifest_str(text: &str) -> Result<Vec<SegmentDescriptor>, CorpusError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| CorpusError::ParseError {
        row: 1,
        message: e.to_string(),
    })?;
    if header.iter().ne(MANIFEST_HEADER.iter().copied()) {
        return Err(CorpusError::ParseError {
            row: 1,
            message: format!(
                "expected header `{}`, found `{}`",
                MANIFEST_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CorpusError::ParseError {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let err = |message: String| CorpusError::ParseError { row, message };
        if record.len() != MANIFEST_HEADER.len() {
            return Err(err(format!("expected 5 fields, found {}", record.len())));
        }
        let parse_ms = |field: &str, name: &str| {
            field
                .parse::<u64>()
                .map_err(|e| err(format!("{name} `{field}`: {e}")))
        };
        let start_ms = parse_ms(&record[2], "start_ms")?;
        let end_ms = parse_ms(&record[3], "end_ms")?;
        if end_ms <= start_ms {
            return Err(err(format!("end_ms {end_ms} not after start_ms {start_ms}")));
        }
        if end_ms - start_ms < MIN_SEGMENT_MS {
            return Err(err(format!(
                "segment of {} ms is shorter than one {MIN_SEGMENT_MS} ms frame",
                end_ms - start_ms
            )));
        }
        let label = record[4].parse::<Label>().map_err(err)?;
        if record[0].is_empty() || record[1].is_empty() {
            return Err(err("empty wav_path or speaker_id".into()));
        }
        out.push(SegmentDescriptor {
            wav_path: record[0].to_string(),
            speaker_id: record[1].to_string(),
            start_ms,
            end_ms,
            label,
        });
    }
    Ok(out)
}

/// Reads and validates a manifest, checking every row against the length of
/// its audio file.
pub fn parse_manifest(path: impl AsRef<Path>) -> Result<Vec<SegmentDescriptor>, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let rows = parse_manifest_str(&text)?;
    let base = manifest_dir(path);
    let mut lengths: HashMap<&str, usize> = HashMap::new();
    for (i, row) in rows.iter().enumerate() {
        let n = match lengths.get(row.wav_path.as_str()) {
            Some(&n) => n,
            None => {
                let n = wav_len(&resolve(&base, &row.wav_path))?;
                lengths.insert(&row.wav_path, n);
                n
            }
        };
        if ms_to_samples(row.end_ms) > n {
            return Err(CorpusError::RangeError {
                row: i + 2,
                end_ms: row.end_ms,
                audio_ms: super::samples_to_ms(n),
            });
        }
    }
    Ok(rows)
}

pub fn write_manifest_string(rows: &[SegmentDescriptor]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(MANIFEST_HEADER)
        .expect("writing to memory");
    for r in rows {
        writer
            .write_record([
                r.wav_path.as_str(),
                r.speaker_id.as_str(),
                &r.start_ms.to_string(),
                &r.end_ms.to_string(),
                r.label.as_str(),
            ])
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("utf-8 input")
}

pub fn write_manifest(
    path: impl AsRef<Path>,
    rows: &[SegmentDescriptor],
) -> Result<(), CorpusError> {
    let path = path.as_ref();
    std::fs::write(path, write_manifest_string(rows)).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads the audio behind each descriptor. Each WAV is read once.
pub fn load_segments(
    manifest_path: impl AsRef<Path>,
    rows: &[SegmentDescriptor],
) -> Result<Vec<AudioSegment>, CorpusError> {
    let base = manifest_dir(manifest_path.as_ref());
    let mut cache: HashMap<&str, Vec<f64>> = HashMap::new();
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if !cache.contains_key(row.wav_path.as_str()) {
            let audio = load_wav(resolve(&base, &row.wav_path))?;
            cache.insert(&row.wav_path, audio.into_samples());
        }
        let audio = &cache[row.wav_path.as_str()];
        let (start, end) = (ms_to_samples(row.start_ms), ms_to_samples(row.end_ms));
        if end > audio.len() {
            return Err(CorpusError::RangeError {
                row: i + 2,
                end_ms: row.end_ms,
                audio_ms: super::samples_to_ms(audio.len()),
            });
        }
        out.push(AudioSegment {
            source_id: row.wav_path.clone(),
            speaker_id: row.speaker_id.clone(),
            start_ms: row.start_ms,
            end_ms: row.end_ms,
            samples: audio[start..end].to_vec(),
            label: row.label,
        });
    }
    Ok(out)
}

/// Marks every segment overlapping a confirmation annotation `(start_ms,
/// end_ms)` as a confirmation; everything else stays a regular utterance.
pub fn annotate_segments(segments: &mut [AudioSegment], confirmations: &[(u64, u64)]) {
    for seg in segments {
        let hit = confirmations
            .iter()
            .any(|&(s, e)| s < seg.end_ms && e > seg.start_ms);
        seg.label = if hit { Label::Confirmation } else { Label::Other };
    }
}

fn manifest_dir(path: &Path) -> PathBuf {
    path.parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn resolve(base: &Path, wav_path: &str) -> PathBuf {
    let p = Path::new(wav_path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
