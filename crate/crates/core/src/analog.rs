//! Analog FM comparison chain.
//!
//! ```text
//! BPF → pre-emphasis → limiter → BPF → de-emphasis → gain control → (+ noise) → BPF
//! ```
//!
//! The noise standard deviation comes from the same linearised link model as
//! the symbol channel. The link SNR is defined in a noise bandwidth of `f_m`;
//! white noise generated at `F_s` with the same density has variance
//! `σ_s² · (F_s / 2) / f_m`.
//!
//! Noise is added after de-emphasis, so it is not shaped by the receiver's
//! de-emphasis network.

use std::f64::consts::PI;

use serde::Serialize;

use crate::channel::ChannelFading;
use crate::dsp;
use crate::fading::magnitude_to_db;
use crate::link::{FmLinkParams, LinkEvaluator, ReceivedPowerDbm};
use crate::speech::{gain_control, mean_square, papr_db, SpeechBuffer, SPEECH_RATE_HZ};
use crate::{noise, Error, Result};

/// Corner frequency of the emphasis networks (530.5 µs time constant).
pub const EMPHASIS_CORNER_HZ: f64 = 300.0;

/// Default limiter clip level, dB above the RMS of the limiter input.
pub const DEFAULT_CLIP_DB: f64 = 5.0;

/// Band-pass transition width and stopband rejection.
pub const BPF_TRANSITION_HZ: f64 = 50.0;
pub const BPF_STOPBAND_DB: f64 = 65.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FmBaselineConfig {
    pub link: FmLinkParams,
    pub set_point: ReceivedPowerDbm,
    pub fading: ChannelFading,
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub bpf_enabled: bool,
    pub preemph_enabled: bool,
    pub limiter_enabled: bool,
    pub noise_enabled: bool,
    /// Envelope clip level relative to the limiter input RMS.
    pub clip_db: f64,
    pub seed: u64,
}

impl FmBaselineConfig {
    pub fn new(set_point: ReceivedPowerDbm, seed: u64) -> Self {
        Self {
            link: FmLinkParams::analog_fm(),
            set_point,
            fading: ChannelFading::Unity,
            band_low_hz: 300.0,
            band_high_hz: 3000.0,
            bpf_enabled: true,
            preemph_enabled: true,
            limiter_enabled: true,
            noise_enabled: true,
            clip_db: DEFAULT_CLIP_DB,
            seed,
        }
    }

    /// Every filter, nonlinearity and the noise switched off.
    pub fn bypass(mut self) -> Self {
        self.bpf_enabled = false;
        self.preemph_enabled = false;
        self.limiter_enabled = false;
        self.noise_enabled = false;
        self
    }

    fn validate(&self, sample_rate: f64) -> Result<()> {
        if !(self.band_low_hz > 0.0
            && self.band_low_hz < self.band_high_hz
            && self.band_high_hz < sample_rate / 2.0)
        {
            return Err(Error::invalid(
                "band",
                format!(
                    "need 0 < {} < {} < {}",
                    self.band_low_hz,
                    self.band_high_hz,
                    sample_rate / 2.0
                ),
            ));
        }
        if !self.clip_db.is_finite() {
            return Err(Error::invalid("clip_db", "must be finite"));
        }
        Ok(())
    }
}

/// Measurements taken along the chain. PAPR values are `None` for silent input.
#[derive(Debug, Clone, Serialize)]
pub struct FmBaselineReport {
    /// PAPR of the speech entering the chain.
    pub papr_before_compression_db: Option<f64>,
    /// PAPR at the limiter input, after band limiting and pre-emphasis.
    pub papr_limiter_input_db: Option<f64>,
    /// PAPR at the limiter output.
    pub papr_after_compression_db: Option<f64>,
    /// PAPR of the gain-controlled modulating signal.
    pub papr_modulating_db: Option<f64>,
    /// x̄² of the gain-controlled modulating signal.
    pub mean_mod_power: f64,
    /// σ_s with no fading at the configured set point.
    pub sigma_s: f64,
    /// Mean of σ_s² over the buffer (equals `sigma_s²` without fading).
    pub mean_sigma_sq: f64,
    /// Variance predicted for the injected noise at the sample rate.
    pub predicted_noise_power: f64,
    /// Measured mean square of the injected noise.
    pub injected_noise_power: f64,
}

#[derive(Debug, Clone)]
pub struct FmBaselineOutput {
    pub speech: SpeechBuffer,
    /// Gain-controlled modulating signal before noise.
    pub clean: SpeechBuffer,
    pub report: FmBaselineReport,
}

/// First-order pre-emphasis `y[n] = x[n] - α·x[n-1]`.
#[derive(Debug, Clone, Copy)]
pub struct Emphasis {
    alpha: f64,
}

impl Emphasis {
    pub fn new(corner_hz: f64, sample_rate: f64) -> Self {
        Self {
            alpha: (-2.0 * PI * corner_hz / sample_rate).exp(),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn pre(&self, x: &[f64]) -> Vec<f64> {
        let mut prev = 0.0;
        x.iter()
            .map(|&v| {
                let y = v - self.alpha * prev;
                prev = v;
                y
            })
            .collect()
    }

    /// Exact inverse of [`Emphasis::pre`]: `y[n] = x[n] + α·y[n-1]`.
    pub fn de(&self, x: &[f64]) -> Vec<f64> {
        let mut prev = 0.0;
        x.iter()
            .map(|&v| {
                prev = v + self.alpha * prev;
                prev
            })
            .collect()
    }
}

/// Hard clip of the analytic-signal envelope at `clip_db` above the input RMS.
pub fn hilbert_limiter(x: &[f64], clip_db: f64) -> Vec<f64> {
    let rms = mean_square(x).sqrt();
    if rms == 0.0 {
        return x.to_vec();
    }
    let clip = rms * 10f64.powf(clip_db / 20.0);
    dsp::analytic_signal(x)
        .iter()
        .zip(x)
        .map(|(a, &v)| {
            let env = a.norm();
            if env > clip {
                v * clip / env
            } else {
                v
            }
        })
        .collect()
}

/// Runs speech through the analog FM chain.
pub fn run_fm_baseline(
    speech: &SpeechBuffer,
    config: &FmBaselineConfig,
) -> Result<FmBaselineOutput> {
    if speech.is_empty() {
        return Err(Error::Empty);
    }
    if speech.sample_rate_hz() != SPEECH_RATE_HZ {
        return Err(Error::RateMismatch {
            expected: SPEECH_RATE_HZ,
            actual: speech.sample_rate_hz(),
        });
    }
    let fs = speech.sample_rate_hz();
    config.validate(fs)?;
    let n = speech.len();
    if let ChannelFading::Envelope(env) = &config.fading {
        if env.rate_hz() != fs {
            return Err(Error::RateMismatch {
                expected: fs,
                actual: env.rate_hz(),
            });
        }
        if env.len() < n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: env.len(),
            });
        }
    }

    let bpf = config.bpf_enabled.then(|| {
        dsp::bandpass(
            fs,
            config.band_low_hz,
            config.band_high_hz,
            BPF_TRANSITION_HZ,
            BPF_STOPBAND_DB,
        )
    });
    let band = |x: Vec<f64>| match &bpf {
        Some(taps) => dsp::filter_centered(&x, taps),
        None => x,
    };
    let emphasis = Emphasis::new(EMPHASIS_CORNER_HZ, fs);

    let papr_before_compression_db = papr_db(speech.samples()).ok();
    let mut x = band(speech.samples().to_vec());
    if config.preemph_enabled {
        x = emphasis.pre(&x);
    }
    let papr_limiter_input_db = papr_db(&x).ok();
    if config.limiter_enabled {
        x = hilbert_limiter(&x, config.clip_db);
    }
    let papr_after_compression_db = papr_db(&x).ok();
    x = band(x);
    if config.preemph_enabled {
        x = emphasis.de(&x);
    }
    let peak_amplitude = config.link.peak_amplitude();
    gain_control(&mut x, peak_amplitude);
    let clean = x.clone();
    let papr_modulating_db = papr_db(&clean).ok();
    let mean_mod_power = mean_square(&clean);

    let evaluator = LinkEvaluator::new(&config.link, config.set_point);
    let sigma_s = evaluator.sigma(0.0);
    // variance of white noise at fs with the density that gives σ_s² in f_m
    let density_scale = (fs / 2.0) / config.link.max_mod_freq_hz();
    let sigma_sq: Vec<f64> = match &config.fading {
        ChannelFading::Unity => vec![sigma_s * sigma_s; n],
        ChannelFading::Envelope(env) => env.magnitudes()[..n]
            .iter()
            .map(|&m| evaluator.sigma(magnitude_to_db(m as f64)).powi(2))
            .collect(),
    };
    let mean_sigma_sq = sigma_sq.iter().sum::<f64>() / n as f64;
    let predicted_noise_power = mean_sigma_sq * density_scale;

    let mut injected_noise_power = 0.0;
    if config.noise_enabled {
        let draws = noise::standard_normal(config.seed, n);
        let mut acc = 0.0;
        for ((v, &g), &s2) in x.iter_mut().zip(&draws).zip(&sigma_sq) {
            let w = (s2 * density_scale).sqrt() * g as f64;
            acc += w * w;
            *v += w;
        }
        injected_noise_power = acc / n as f64;
    }
    let out = band(x);

    Ok(FmBaselineOutput {
        speech: SpeechBuffer::new(out, fs)?,
        clean: SpeechBuffer::new(clean, fs)?,
        report: FmBaselineReport {
            papr_before_compression_db,
            papr_limiter_input_db,
            papr_after_compression_db,
            papr_modulating_db,
            mean_mod_power,
            sigma_s,
            mean_sigma_sq,
            predicted_noise_power,
            injected_noise_power,
        },
    })
}
