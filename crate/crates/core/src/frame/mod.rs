//! Demonstration waveform: 4800 symbols/s in 40 ms frames of 192 symbols.
//!
//! Frame layout (symbol indices):
//!
//! | range     | content                                   |
//! |-----------|-------------------------------------------|
//! | 0..24     | unique word [`UNIQUE_WORD`] scaled by A   |
//! | 24..104   | 80 payload symbols                        |
//! | 104..192  | 88 filler symbols, pseudo-random ±A       |
//!
//! The unique word is a length-24 binary sequence with peak aperiodic
//! autocorrelation sidelobe 3 (the minimum for this length) and the lowest
//! sidelobe energy among those. The filler is drawn from ChaCha8 stream 0 of
//! [`FILLER_SEED`].

mod pulse;
mod sync;

pub use pulse::{
    add_awgn, add_link_noise, applied_delay, matched_filter, modulate, modulate_delayed, rrc_taps,
    BasebandSignal, PulseShape, DEFAULT_ROLLOFF, DEFAULT_SPAN_SYMBOLS, DEFAULT_SPS,
    DELAY_OVERSAMPLE, MIN_SPS,
};
pub use sync::{
    acquire_sync, FrameSynchronizer, SyncEvent, SyncEventKind, SyncReport, SyncState, SyncStatus,
    TrackedFrame, DEFAULT_SYNC_THRESHOLD, TIMING_HYPOTHESES,
};

use rand::Rng;

use crate::{noise, Error, Result};

pub const SYMBOL_RATE_HZ: f64 = 4800.0;
pub const FRAME_SYMBOLS: usize = 192;
pub const PAYLOAD_SYMBOLS: usize = 80;
pub const UW_SYMBOLS: usize = 24;
pub const FILLER_SYMBOLS: usize = 88;

/// Unique word polarity pattern.
pub const UNIQUE_WORD: [i8; UW_SYMBOLS] = [
    -1, 1, 1, -1, 1, 1, -1, 1, -1, 1, -1, 1, 1, 1, 1, 1, 1, -1, -1, -1, 1, 1, -1, -1,
];

pub const FILLER_SEED: u64 = 0x0BBF_F111;

/// Frame geometry and the fixed symbol content.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLayout {
    symbol_rate_hz: f64,
    peak_amplitude: f64,
    uw: Vec<f32>,
    filler: Vec<f32>,
}

impl Default for FrameLayout {
    fn default() -> Self {
        Self::new(1.0).expect("unit amplitude is valid")
    }
}

impl FrameLayout {
    pub fn new(peak_amplitude: f64) -> Result<Self> {
        if !(peak_amplitude > 0.0 && peak_amplitude <= 1.0) {
            return Err(Error::invalid("peak_amplitude", "must be in (0, 1]"));
        }
        const _: () = assert!(UW_SYMBOLS + PAYLOAD_SYMBOLS + FILLER_SYMBOLS == FRAME_SYMBOLS);
        let a = peak_amplitude as f32;
        let uw = UNIQUE_WORD.iter().map(|&b| b as f32 * a).collect();
        let mut rng = noise::rng(FILLER_SEED, 0);
        let filler = (0..FILLER_SYMBOLS)
            .map(|_| if rng.random_bool(0.5) { a } else { -a })
            .collect();
        Ok(Self {
            symbol_rate_hz: SYMBOL_RATE_HZ,
            peak_amplitude,
            uw,
            filler,
        })
    }

    pub fn symbol_rate_hz(&self) -> f64 {
        self.symbol_rate_hz
    }

    pub fn peak_amplitude(&self) -> f64 {
        self.peak_amplitude
    }

    pub fn frame_len(&self) -> usize {
        FRAME_SYMBOLS
    }

    pub fn payload_len(&self) -> usize {
        PAYLOAD_SYMBOLS
    }

    pub fn uw(&self) -> &[f32] {
        &self.uw
    }

    pub fn filler(&self) -> &[f32] {
        &self.filler
    }

    /// Index of the first payload symbol within a frame.
    pub fn payload_start(&self) -> usize {
        UW_SYMBOLS
    }

    pub fn frame_duration_s(&self) -> f64 {
        FRAME_SYMBOLS as f64 / self.symbol_rate_hz
    }
}

/// `[UW | payload | filler]`.
pub fn assemble_frame(payload: &[f32], layout: &FrameLayout) -> Result<Vec<f32>> {
    if payload.len() != PAYLOAD_SYMBOLS {
        return Err(Error::LengthMismatch {
            expected: PAYLOAD_SYMBOLS,
            actual: payload.len(),
        });
    }
    if let Some((index, v)) = payload
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || v.abs() as f64 > layout.peak_amplitude)
    {
        return Err(Error::AmplitudeExceeded {
            index,
            value: *v as f64,
            limit: layout.peak_amplitude,
        });
    }
    let mut frame = Vec::with_capacity(FRAME_SYMBOLS);
    frame.extend_from_slice(&layout.uw);
    frame.extend_from_slice(payload);
    frame.extend_from_slice(&layout.filler);
    Ok(frame)
}

/// Payload symbols of one frame.
pub fn disassemble_frame(frame: &[f32], layout: &FrameLayout) -> Result<Vec<f32>> {
    if frame.len() != FRAME_SYMBOLS {
        return Err(Error::LengthMismatch {
            expected: FRAME_SYMBOLS,
            actual: frame.len(),
        });
    }
    let start = layout.payload_start();
    Ok(frame[start..start + PAYLOAD_SYMBOLS].to_vec())
}

/// Frames a payload stream whose length is a multiple of 80 symbols.
pub fn assemble_frames(payload: &[f32], layout: &FrameLayout) -> Result<Vec<f32>> {
    if !payload.len().is_multiple_of(PAYLOAD_SYMBOLS) {
        return Err(Error::invalid(
            "payload",
            format!(
                "length {} is not a multiple of {PAYLOAD_SYMBOLS}",
                payload.len()
            ),
        ));
    }
    let mut out = Vec::with_capacity(payload.len() / PAYLOAD_SYMBOLS * FRAME_SYMBOLS);
    for chunk in payload.chunks(PAYLOAD_SYMBOLS) {
        out.extend(assemble_frame(chunk, layout)?);
    }
    Ok(out)
}

/// Extracts payloads from a frame-aligned stream (multiple of 192 symbols).
pub fn disassemble_frames(frames: &[f32], layout: &FrameLayout) -> Result<Vec<f32>> {
    if !frames.len().is_multiple_of(FRAME_SYMBOLS) {
        return Err(Error::invalid(
            "frames",
            format!(
                "length {} is not a multiple of {FRAME_SYMBOLS}",
                frames.len()
            ),
        ));
    }
    let mut out = Vec::with_capacity(frames.len() / FRAME_SYMBOLS * PAYLOAD_SYMBOLS);
    for chunk in frames.chunks(FRAME_SYMBOLS) {
        out.extend(disassemble_frame(chunk, layout)?);
    }
    Ok(out)
}
