//! Simulation toolkit for speech over baseband FM (BBFM) land mobile radio links.
//!
//! The crate is organised around the linearised FM channel:
//!
//! * [`link`] converts received power and fading into demodulator output SNR
//!   and a per-symbol noise scale.
//! * [`fading`] generates two-path Rayleigh magnitude fading at the symbol rate.
//! * [`channel`] applies the linearised channel to a stream of ASK symbols.
//! * [`analog`] is the analog FM comparison chain (band-pass, emphasis, limiter).
//! * [`frame`] is the 4800 symbol/s demonstration waveform with unique-word sync.
//!
//! Monte Carlo style loops go through [`exec`], which uses rayon when the
//! `parallel` feature is enabled and falls back to plain iteration otherwise.
//! Results never depend on which path runs.

pub mod analog;
pub mod channel;
pub mod dsp;
mod error;
pub mod exec;
pub mod fading;
pub mod frame;
pub mod golden;
pub mod io;
pub mod link;
pub mod montecarlo;
pub mod noise;
pub mod speech;

pub use error::{Error, Result};

/// Power ratio in dB.
pub fn power_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Linear power ratio from dB.
pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
