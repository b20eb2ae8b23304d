//! Raw sample file formats.
//!
//! * Symbol streams, fading magnitudes and baseband signals: headerless
//!   32-bit IEEE-754 little-endian floats.
//! * Speech: headerless signed 16-bit little-endian PCM, mono; integer full
//!   scale (32767) maps to the peak amplitude A.

use std::fs;
use std::path::Path;

use crate::{Error, Result};

pub const PCM_FULL_SCALE: f64 = 32767.0;

pub fn decode_f32(bytes: &[u8]) -> Result<Vec<f32>> {
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::Format(format!(
            "f32 stream length {} is not a multiple of 4 bytes",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

pub fn encode_f32(values: &[f32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn read_f32(path: impl AsRef<Path>) -> Result<Vec<f32>> {
    decode_f32(&fs::read(path)?)
}

pub fn write_f32(path: impl AsRef<Path>, values: &[f32]) -> Result<()> {
    Ok(fs::write(path, encode_f32(values))?)
}

/// PCM to samples in `[-A, A]`.
pub fn decode_pcm16(bytes: &[u8], peak_amplitude: f64) -> Result<Vec<f64>> {
    if !bytes.len().is_multiple_of(2) {
        return Err(Error::Format(format!(
            "PCM length {} is not a multiple of 2 bytes",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / PCM_FULL_SCALE * peak_amplitude)
        .collect())
}

/// Samples in `[-A, A]` to PCM, rounding and saturating.
pub fn encode_pcm16(samples: &[f64], peak_amplitude: f64) -> Vec<u8> {
    samples
        .iter()
        .flat_map(|&v| {
            let s = (v / peak_amplitude * PCM_FULL_SCALE)
                .round()
                .clamp(i16::MIN as f64, i16::MAX as f64) as i16;
            s.to_le_bytes()
        })
        .collect()
}

pub fn read_pcm16(path: impl AsRef<Path>, peak_amplitude: f64) -> Result<Vec<f64>> {
    decode_pcm16(&fs::read(path)?, peak_amplitude)
}

pub fn write_pcm16(path: impl AsRef<Path>, samples: &[f64], peak_amplitude: f64) -> Result<()> {
    Ok(fs::write(path, encode_pcm16(samples, peak_amplitude))?)
}
