//! Two-path Rayleigh magnitude fading.
//!
//! Each path gain G₁, G₂ is a circularly-symmetric complex Gaussian process
//! with mean power 1/2, low-pass limited to the Doppler spread
//! `B = 2·f_c·v / 3e8`. The magnitude seen by the FM receiver is
//!
//! ```text
//! |H| = |G₁ + e^{-j·2π·d·F} G₂|
//! ```
//!
//! with `d` the path delay and `F` the output rate, so `E[|H|²] = 1` and the
//! set point stays the mean received power.
//!
//! Generation: white complex Gaussian at an internal rate `F / L` (at least
//! 16× the Doppler spread), a Kaiser-windowed linear-phase low-pass whose
//! stopband starts at the Doppler spread, then linear interpolation by `L`
//! up to the output rate. Each interpolated sample is rescaled so its
//! variance is exactly the tap power.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{dsp, noise, Error, Result};

/// Propagation speed used for the Doppler spread, m/s.
pub const PROPAGATION_SPEED: f64 = 3e8;

/// Magnitudes below this are clamped to [`MIN_FADING_DB`] when converted to dB.
pub const MIN_MAGNITUDE: f64 = 1e-10;
pub const MIN_FADING_DB: f64 = -200.0;

/// Internal tap rate relative to the Doppler spread.
const MIN_OVERSAMPLE: f64 = 16.0;
/// Low-pass passband edge as a fraction of the Doppler spread.
const PASS_EDGE: f64 = 0.93;
const STOPBAND_DB: f64 = 70.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingConfig {
    pub carrier_freq_hz: f64,
    pub velocity_mps: f64,
    pub delay_spread_s: f64,
    pub output_rate_hz: f64,
    pub seed: u64,
}

impl FadingConfig {
    /// Land mobile channel at 450 MHz with the given vehicle speed and path delay.
    pub fn lmr(velocity_kmh: f64, delay_us: f64, output_rate_hz: f64, seed: u64) -> Self {
        Self {
            carrier_freq_hz: 450e6,
            velocity_mps: velocity_kmh / 3.6,
            delay_spread_s: delay_us * 1e-6,
            output_rate_hz,
            seed,
        }
    }

    /// The `lmr60` channel: 60 km/h, 200 µs path delay.
    pub fn lmr60(output_rate_hz: f64, seed: u64) -> Self {
        Self::lmr(60.0, 200.0, output_rate_hz, seed)
    }

    pub fn doppler_spread_hz(&self) -> f64 {
        2.0 * self.carrier_freq_hz * self.velocity_mps / PROPAGATION_SPEED
    }

    /// Fixed rotation applied to the delayed path.
    pub fn delay_phasor(&self) -> Complex64 {
        Complex64::from_polar(1.0, -2.0 * PI * self.delay_spread_s * self.output_rate_hz)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_freq_hz.is_finite() && self.carrier_freq_hz > 0.0) {
            return Err(Error::invalid("carrier_freq_hz", "must be > 0"));
        }
        if !(self.velocity_mps.is_finite() && self.velocity_mps >= 0.0) {
            return Err(Error::invalid("velocity_mps", "must be >= 0"));
        }
        if !(self.delay_spread_s.is_finite() && self.delay_spread_s >= 0.0) {
            return Err(Error::invalid("delay_spread_s", "must be >= 0"));
        }
        if !(self.output_rate_hz.is_finite() && self.output_rate_hz > 0.0) {
            return Err(Error::invalid("output_rate_hz", "must be > 0"));
        }
        let doppler = self.doppler_spread_hz();
        if doppler >= self.output_rate_hz / 2.0 {
            return Err(Error::DopplerTooHigh {
                doppler_hz: doppler,
                nyquist_hz: self.output_rate_hz / 2.0,
            });
        }
        Ok(())
    }
}

/// Per-sample |H| at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingEnvelope {
    magnitudes: Vec<f32>,
    rate_hz: f64,
}

impl FadingEnvelope {
    pub fn new(magnitudes: Vec<f32>, rate_hz: f64) -> Result<Self> {
        if !(rate_hz.is_finite() && rate_hz > 0.0) {
            return Err(Error::invalid("rate_hz", "must be > 0"));
        }
        if let Some((i, v)) = magnitudes
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::Format(format!(
                "magnitude {i} is {v}, expected finite and >= 0"
            )));
        }
        Ok(Self {
            magnitudes,
            rate_hz,
        })
    }

    pub fn magnitudes(&self) -> &[f32] {
        &self.magnitudes
    }

    pub fn rate_hz(&self) -> f64 {
        self.rate_hz
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    pub fn into_magnitudes(self) -> Vec<f32> {
        self.magnitudes
    }
}

/// The two complex path-gain processes at the output rate.
#[derive(Debug, Clone)]
pub struct TapProcesses {
    pub g1: Vec<Complex64>,
    pub g2: Vec<Complex64>,
}

/// Generates `num_samples` of both path-gain processes.
pub fn generate_taps(config: &FadingConfig, num_samples: usize) -> Result<TapProcesses> {
    config.validate()?;
    if num_samples == 0 {
        return Err(Error::invalid("num_samples", "must be > 0"));
    }
    let g1 = tap_process(config, 0, num_samples);
    let g2 = tap_process(config, 1, num_samples);
    Ok(TapProcesses { g1, g2 })
}

/// Generates `num_samples` of |H| at `config.output_rate_hz`.
pub fn generate_envelope(config: &FadingConfig, num_samples: usize) -> Result<FadingEnvelope> {
    let taps = generate_taps(config, num_samples)?;
    let rot = config.delay_phasor();
    let magnitudes = taps
        .g1
        .iter()
        .zip(&taps.g2)
        .map(|(a, b)| (a + rot * b).norm() as f32)
        .collect();
    FadingEnvelope::new(magnitudes, config.output_rate_hz)
}

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `magnitudes` and a Rayleigh distribution with E|H|² = `mean_power`.
pub fn rayleigh_ks_statistic(magnitudes: &[f32], mean_power: f64) -> f64 {
    let mut r: Vec<f64> = magnitudes.iter().map(|&m| m as f64).collect();
    r.sort_by(f64::total_cmp);
    let n = r.len() as f64;
    r.iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = 1.0 - (-x * x / mean_power).exp();
            (cdf - i as f64 / n).max((i + 1) as f64 / n - cdf)
        })
        .fold(0.0, f64::max)
}

/// Element-wise 20·log10|H|, clamped at [`MIN_FADING_DB`].
pub fn envelope_to_db(env: &FadingEnvelope) -> Vec<f64> {
    env.magnitudes
        .iter()
        .map(|&m| magnitude_to_db(m as f64))
        .collect()
}

#[inline]
pub fn magnitude_to_db(m: f64) -> f64 {
    if m < MIN_MAGNITUDE {
        MIN_FADING_DB
    } else {
        20.0 * m.log10()
    }
}

/// Internal rate decimation factor and low-pass taps for a Doppler spread.
fn design(config: &FadingConfig) -> (usize, Vec<f64>) {
    let doppler = config.doppler_spread_hz();
    let rate = config.output_rate_hz;
    let factor = ((rate / (MIN_OVERSAMPLE * doppler)).floor() as usize).max(1);
    let internal = rate / factor as f64;
    let transition = (1.0 - PASS_EDGE) * doppler / internal;
    let cutoff = (1.0 + PASS_EDGE) / 2.0 * doppler / internal;
    let len = dsp::kaiser_len(STOPBAND_DB, transition);
    let mut taps = dsp::lowpass(cutoff, len, dsp::kaiser_beta(STOPBAND_DB));
    // unit noise gain: white input of power P gives output power P
    let energy: f64 = taps.iter().map(|t| t * t).sum();
    taps.iter_mut().for_each(|t| *t /= energy.sqrt());
    (factor, taps)
}

fn tap_process(config: &FadingConfig, path: u64, n: usize) -> Vec<Complex64> {
    let mut rng = noise::rng(config.seed, path);
    let power = 0.5;
    if config.doppler_spread_hz() == 0.0 {
        let held = noise::complex_normal(&mut rng, 1, power)[0];
        return vec![held; n];
    }
    let (factor, taps) = design(config);
    let internal_len = (n - 1) / factor + 2;
    let white = noise::complex_normal(&mut rng, internal_len + taps.len() - 1, power);
    let filtered = dsp::convolve_complex(&white, &taps);
    // drop the start-up transient, keep only fully overlapped outputs
    let slow = &filtered[taps.len() - 1..taps.len() - 1 + internal_len];
    if factor == 1 {
        return slow[..n].to_vec();
    }
    let lag1: f64 = taps.windows(2).map(|w| w[0] * w[1]).sum();
    let gains: Vec<f64> = (0..factor)
        .map(|k| {
            let t = k as f64 / factor as f64;
            let var = (1.0 - t).powi(2) + t * t + 2.0 * t * (1.0 - t) * lag1;
            1.0 / var.sqrt()
        })
        .collect();
    (0..n)
        .map(|i| {
            let j = i / factor;
            let k = i % factor;
            let t = k as f64 / factor as f64;
            (slow[j] * (1.0 - t) + slow[j + 1] * t) * gains[k]
        })
        .collect()
}
