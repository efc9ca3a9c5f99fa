use std::path::Path;

use super::{AudioBuffer, CorpusError, SAMPLE_RATE};

const PCM16_SCALE: f64 = 32768.0;

/// Reads a 16 kHz mono PCM16 RIFF/WAVE file, scaling samples by 1/32768.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioBuffer, CorpusError> {
    let path = path.as_ref();
    let mut reader = hound::WavReader::open(path).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(CorpusError::UnsupportedFormat(format!(
            "{}: {}-bit {:?} samples, expected 16-bit PCM",
            path.display(),
            spec.bits_per_sample,
            spec.sample_format
        )));
    }
    if spec.channels != 1 {
        return Err(CorpusError::UnsupportedFormat(format!(
            "{}: {} channels, expected mono",
            path.display(),
            spec.channels
        )));
    }
    if spec.sample_rate != SAMPLE_RATE {
        return Err(CorpusError::UnsupportedFormat(format!(
            "{}: {} Hz, expected {SAMPLE_RATE} Hz",
            path.display(),
            spec.sample_rate
        )));
    }
    let expected = reader.len() as usize;
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| f64::from(v) / PCM16_SCALE))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| match e {
            // the header parsed, so a short read means the data chunk is cut off
            hound::Error::IoError(io) => {
                CorpusError::CorruptFile(format!("{}: truncated data ({io})", path.display()))
            }
            other => map_hound(path, other),
        })?;
    if samples.len() != expected {
        return Err(CorpusError::CorruptFile(format!(
            "{}: header announces {expected} samples, found {}",
            path.display(),
            samples.len()
        )));
    }
    AudioBuffer::new(samples, spec.sample_rate)
}

/// Writes samples as 16 kHz mono PCM16, clamping to the representable range.
pub fn write_wav(path: impl AsRef<Path>, samples: &[f64]) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: SAMPLE_RATE,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| map_hound(path, e))?;
    for &s in samples {
        let v = (s * PCM16_SCALE).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(|e| map_hound(path, e))?;
    }
    writer.finalize().map_err(|e| map_hound(path, e))
}

/// Reads only the header and returns the number of samples.
pub(crate) fn wav_len(path: &Path) -> Result<usize, CorpusError> {
    let reader = hound::WavReader::open(path).map_err(|e| map_hound(path, e))?;
    Ok(reader.len() as usize)
}

fn map_hound(path: &Path, err: hound::Error) -> CorpusError {
    match err {
        hound::Error::IoError(e)
            if matches!(
                e.kind(),
                std::io::ErrorKind::UnexpectedEof | std::io::ErrorKind::Other
            ) =>
        {
            CorpusError::CorruptFile(format!("{}: truncated ({e})", path.display()))
        }
        hound::Error::IoError(source) => CorpusError::Io {
            path: path.to_path_buf(),
            source,
        },
        hound::Error::FormatError(msg) => {
            CorpusError::CorruptFile(format!("{}: {msg}", path.display()))
        }
        hound::Error::UnfinishedSample => {
            CorpusError::CorruptFile(format!("{}: truncated sample", path.display()))
        }
        other => CorpusError::UnsupportedFormat(format!("{}: {other}", path.display())),
    }
}
