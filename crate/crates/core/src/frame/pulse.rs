//! Root-raised-cosine pulse shaping and matched filtering.
//!
//! Both ends use the same unit-energy RRC response `h`. The transmitter
//! filters the symbol impulse train with `h·√sps`, the receiver with `h/√sps`,
//! so at the ideal sampling instants the matched-filter output equals the
//! symbol value and white noise of per-sample variance `σ²·sps` comes out with
//! variance `σ²`.
//!
//! Sample `k·sps` of a modulated signal is the centre of symbol `k`; the
//! matched filter is applied with the same centring so its output lines up
//! with the input samples. [`modulate`] cuts the half-pulses that would fall
//! before the first and after the last symbol.

use std::f64::consts::PI;

use crate::channel::{ChannelFading, ChannelRun};
use crate::fading::magnitude_to_db;
use crate::link::{LinkEvaluator, SnrDb};
use crate::{dsp, noise, Error, Result};

pub const DEFAULT_ROLLOFF: f64 = 0.2;
pub const DEFAULT_SPAN_SYMBOLS: usize = 20;
pub const DEFAULT_SPS: usize = 10;
pub const MIN_SPS: usize = 4;

/// RRC impulse response sampled at `sps` per symbol over `span` symbols,
/// normalised to unit energy. Length is `span·sps + 1`.
pub fn rrc_taps(rolloff: f64, span: usize, sps: usize) -> Vec<f64> {
    let b = rolloff;
    let half = (span * sps / 2) as i64;
    let mut taps: Vec<f64> = (-half..=half)
        .map(|i| {
            let t = i as f64 / sps as f64;
            if t == 0.0 {
                1.0 - b + 4.0 * b / PI
            } else if b > 0.0 && ((4.0 * b * t).abs() - 1.0).abs() < 1e-9 {
                let a = PI / (4.0 * b);
                b / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos())
            } else {
                let num = (PI * t * (1.0 - b)).sin() + 4.0 * b * t * (PI * t * (1.0 + b)).cos();
                num / (PI * t * (1.0 - (4.0 * b * t).powi(2)))
            }
        })
        .collect();
    let e: f64 = taps.iter().map(|v| v * v).sum();
    taps.iter_mut().for_each(|v| *v /= e.sqrt());
    taps
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseShape {
    rolloff: f64,
    span: usize,
    sps: usize,
    taps: Vec<f64>,
}

impl Default for PulseShape {
    fn default() -> Self {
        Self::new(DEFAULT_ROLLOFF, DEFAULT_SPAN_SYMBOLS, DEFAULT_SPS).expect("defaults are valid")
    }
}

impl PulseShape {
    pub fn new(rolloff: f64, span: usize, sps: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&rolloff) {
            return Err(Error::invalid("rolloff", "must be in [0, 1]"));
        }
        if sps < MIN_SPS {
            return Err(Error::invalid("sps", format!("must be >= {MIN_SPS}")));
        }
        if span == 0 || !(span * sps).is_multiple_of(2) {
            return Err(Error::invalid("span", "span·sps must be even and nonzero"));
        }
        Ok(Self {
            rolloff,
            span,
            sps,
            taps: rrc_taps(rolloff, span, sps),
        })
    }

    /// Same rolloff and span at a different oversampling factor.
    pub fn with_sps(&self, sps: usize) -> Result<Self> {
        Self::new(self.rolloff, self.span, sps)
    }

    pub fn rolloff(&self) -> f64 {
        self.rolloff
    }

    pub fn span(&self) -> usize {
        self.span
    }

    pub fn sps(&self) -> usize {
        self.sps
    }

    /// Unit-energy response.
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Baseband samples for a symbol sequence, `symbols.len()·sps` long.
    pub fn shape(&self, symbols: &[f32]) -> Vec<f64> {
        let g = (self.sps as f64).sqrt();
        let mut up = vec![0.0; symbols.len() * self.sps];
        for (i, &s) in symbols.iter().enumerate() {
            up[i * self.sps] = s as f64 * g;
        }
        dsp::filter_centered(&up, &self.taps)
    }

    /// Matched-filter output aligned with `samples`.
    pub fn matched(&self, samples: &[f64]) -> Vec<f64> {
        let g = 1.0 / (self.sps as f64).sqrt();
        let mut y = dsp::filter_centered(samples, &self.taps);
        y.iter_mut().for_each(|v| *v *= g);
        y
    }
}

/// Oversampled real baseband.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSignal {
    samples: Vec<f32>,
    sample_rate_hz: f64,
    samples_per_symbol: usize,
}

impl BasebandSignal {
    pub fn new(samples: Vec<f32>, sample_rate_hz: f64, samples_per_symbol: usize) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::invalid("sample_rate_hz", "must be > 0"));
        }
        if samples_per_symbol < MIN_SPS {
            return Err(Error::invalid(
                "samples_per_symbol",
                format!("must be >= {MIN_SPS}"),
            ));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            samples_per_symbol,
        })
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.samples_per_symbol
    }

    pub fn symbol_rate_hz(&self) -> f64 {
        self.sample_rate_hz / self.samples_per_symbol as f64
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Length in whole symbols.
    pub fn num_symbols(&self) -> usize {
        self.samples.len() / self.samples_per_symbol
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }

    pub(crate) fn to_f64(&self) -> Vec<f64> {
        self.samples.iter().map(|&v| v as f64).collect()
    }
}

/// Pulse-shapes `symbols` at `symbol_rate_hz`.
pub fn modulate(
    symbols: &[f32],
    symbol_rate_hz: f64,
    pulse: &PulseShape,
) -> Result<BasebandSignal> {
    let samples = pulse.shape(symbols).into_iter().map(|v| v as f32).collect();
    BasebandSignal::new(samples, symbol_rate_hz * pulse.sps() as f64, pulse.sps())
}

/// Fine-delay resolution of [`modulate_delayed`] in sub-samples per sample.
pub const DELAY_OVERSAMPLE: usize = 4;

/// Delay that [`modulate_delayed`] actually applies for a requested delay.
pub fn applied_delay(pulse: &PulseShape, delay_symbols: f64) -> f64 {
    let fine = (pulse.sps() * DELAY_OVERSAMPLE) as f64;
    (delay_symbols * fine).round() / fine
}

/// Like [`modulate`], with the whole waveform delayed by `delay_symbols`
/// (quantised to `1 / (sps·DELAY_OVERSAMPLE)` of a symbol). The leading
/// half-pulses are kept as far as the delay leaves room for them, so the
/// first symbols are not distorted. The signal is synthesised at the finer
/// rate and decimated, so the delay is exact for the band-limited waveform
/// rather than an interpolation.
pub fn modulate_delayed(
    symbols: &[f32],
    symbol_rate_hz: f64,
    pulse: &PulseShape,
    delay_symbols: f64,
) -> Result<BasebandSignal> {
    if !(delay_symbols.is_finite() && delay_symbols >= 0.0) {
        return Err(Error::invalid("delay_symbols", "must be finite and >= 0"));
    }
    let fine_sps = pulse.sps() * DELAY_OVERSAMPLE;
    let fine = pulse.with_sps(fine_sps)?;
    let lead = (delay_symbols * fine_sps as f64).round() as usize;
    let g = (fine_sps as f64).sqrt();
    let mut up = vec![0.0; symbols.len() * fine_sps];
    for (i, &s) in symbols.iter().enumerate() {
        up[i * fine_sps] = s as f64 * g;
    }
    let full = dsp::convolve(&up, fine.taps());
    let half = fine.taps().len() / 2;
    // symbol 0 sits at index `half` of the full convolution; move it to `lead`
    let mut x = vec![0.0; lead.saturating_sub(half)];
    x.extend_from_slice(&full[half.saturating_sub(lead)..half + up.len()]);
    let samples = x
        .iter()
        .step_by(DELAY_OVERSAMPLE)
        .map(|&v| v as f32)
        .collect();
    BasebandSignal::new(samples, symbol_rate_hz * pulse.sps() as f64, pulse.sps())
}

/// Matched-filter output at the sample rate of `signal`.
pub fn matched_filter(signal: &BasebandSignal, pulse: &PulseShape) -> Result<Vec<f64>> {
    if signal.samples_per_symbol() != pulse.sps() {
        return Err(Error::invalid(
            "samples_per_symbol",
            format!(
                "signal has {}, pulse has {}",
                signal.samples_per_symbol(),
                pulse.sps()
            ),
        ));
    }
    Ok(pulse.matched(&signal.to_f64()))
}

/// Adds white Gaussian noise sized so that, after the matched filter, the
/// symbol-rate SNR against a peak amplitude `A` is `snr`.
pub fn add_awgn(
    signal: &BasebandSignal,
    snr: SnrDb,
    peak_amplitude: f64,
    seed: u64,
) -> BasebandSignal {
    let sigma_symbol = peak_amplitude / snr.linear().sqrt();
    add_scaled_noise(signal, seed, |_| sigma_symbol)
}

/// Adds noise from the linearised FM link at the baseband sample rate. A
/// fading envelope, if present, must be at the sample rate.
pub fn add_link_noise(signal: &BasebandSignal, run: &ChannelRun) -> Result<BasebandSignal> {
    let n = signal.len();
    if let ChannelFading::Envelope(env) = &run.fading {
        if env.rate_hz() != signal.sample_rate_hz() {
            return Err(Error::RateMismatch {
                expected: signal.sample_rate_hz(),
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
    let evaluator = LinkEvaluator::new(&run.link, run.set_point);
    Ok(match &run.fading {
        ChannelFading::Unity => {
            let s = evaluator.sigma(0.0);
            add_scaled_noise(signal, run.noise_seed, |_| s)
        }
        ChannelFading::Envelope(env) => {
            let m = env.magnitudes();
            add_scaled_noise(signal, run.noise_seed, |i| {
                evaluator.sigma(magnitude_to_db(m[i] as f64))
            })
        }
    })
}

fn add_scaled_noise(
    signal: &BasebandSignal,
    seed: u64,
    sigma_symbol: impl Fn(usize) -> f64,
) -> BasebandSignal {
    let root_sps = (signal.samples_per_symbol as f64).sqrt();
    let w = noise::standard_normal(seed, signal.len());
    let samples = signal
        .samples
        .iter()
        .zip(&w)
        .enumerate()
        .map(|(i, (&x, &g))| (x as f64 + sigma_symbol(i) * root_sps * g as f64) as f32)
        .collect();
    BasebandSignal {
        samples,
        sample_rate_hz: signal.sample_rate_hz,
        samples_per_symbol: signal.samples_per_symbol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power_db;
    use rand::Rng;

    fn random_symbols(n: usize, seed: u64) -> Vec<f32> {
        let mut rng = noise::rng(seed, 0);
        (0..n).map(|_| rng.random_range(-1.0f32..=1.0)).collect()
    }

    #[test]
    fn unit_energy_and_symmetry() {
        let h = rrc_taps(0.2, 20, 10);
        assert_eq!(h.len(), 201);
        let e: f64 = h.iter().map(|v| v * v).sum();
        assert!((e - 1.0).abs() < 1e-12);
        for i in 0..h.len() {
            assert!((h[i] - h[h.len() - 1 - i]).abs() < 1e-15);
        }
        // singular point t = ±1/(4β) lands on a sample for β = 0.25, sps = 4
        let s = rrc_taps(0.25, 8, 4);
        assert!(s.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn single_symbol_peak() {
        let p = PulseShape::default();
        let mut sym = vec![0.0f32; 41];
        sym[20] = 1.0;
        let sig = modulate(&sym, 4800.0, &p).unwrap();
        let y = matched_filter(&sig, &p).unwrap();
        let peak = y[20 * p.sps()];
        assert!((peak - 1.0).abs() < 0.01, "{peak}");
        let (imax, _) = y
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
        assert_eq!(imax, 20 * p.sps());
    }

    #[test]
    fn isi_below_minus_40_db() {
        let p = PulseShape::default();
        let sym = random_symbols(1000, 4);
        let sig = modulate(&sym, 4800.0, &p).unwrap();
        let y = matched_filter(&sig, &p).unwrap();
        // skip the edges where the pulses are truncated
        let guard = p.span();
        let (mut err, mut pow) = (0.0, 0.0);
        for k in guard..sym.len() - guard {
            err += (y[k * p.sps()] - sym[k] as f64).powi(2);
            pow += (sym[k] as f64).powi(2);
        }
        let isi = power_db(err / pow);
        assert!(isi <= -40.0, "{isi}");
    }

    #[test]
    fn occupied_bandwidth_of_alternating_symbols() {
        let p = PulseShape::default();
        let sym: Vec<f32> = (0..4000)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let sig = modulate(&sym, 4800.0, &p).unwrap();
        let psd = dsp::welch_psd_real(&sig.to_f64(), 4096);
        let bw = dsp::occupied_bandwidth(&psd, sig.sample_rate_hz(), 0.99);
        assert!(bw <= 1.2 * 2400.0, "{bw}");
        assert_eq!(sig.sample_rate_hz(), 48_000.0);
    }

    #[test]
    fn occupied_bandwidth_of_random_symbols() {
        let p = PulseShape::default();
        let sig = modulate(&random_symbols(8000, 8), 4800.0, &p).unwrap();
        let psd = dsp::welch_psd_real(&sig.to_f64(), 4096);
        let bw = dsp::occupied_bandwidth(&psd, sig.sample_rate_hz(), 0.99);
        assert!(bw <= 1.2 * 2400.0, "{bw}");
    }

    #[test]
    fn awgn_is_calibrated_at_matched_filter_output() {
        let p = PulseShape::default();
        let zeros = BasebandSignal::new(vec![0.0; 200_000], 48_000.0, 10).unwrap();
        let noisy = add_awgn(&zeros, SnrDb::new(12.0).unwrap(), 1.0, 3);
        let y = matched_filter(&noisy, &p).unwrap();
        let var = y.iter().step_by(10).map(|v| v * v).sum::<f64>() / (y.len() / 10) as f64;
        let expected = 1.0 / 10f64.powf(1.2);
        assert!(
            (power_db(var / expected)).abs() < 0.2,
            "{var} vs {expected}"
        );
    }

    #[test]
    fn delayed_modulation_matches_integer_shift() {
        let p = PulseShape::default();
        let sym = random_symbols(300, 6);
        let base = modulate(&sym, 4800.0, &p).unwrap();
        let d = modulate_delayed(&sym, 4800.0, &p, 3.0).unwrap();
        for i in 200..base.len() - 200 {
            assert!((d.samples()[i + 30] - base.samples()[i]).abs() < 1e-3);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PulseShape::new(0.2, 8, 3).is_err());
        assert!(PulseShape::new(1.5, 8, 10).is_err());
        assert!(PulseShape::new(0.2, 3, 5).is_err());
        assert!(BasebandSignal::new(vec![f32::NAN], 48_000.0, 10).is_err());
        let p = PulseShape::default();
        let s = BasebandSignal::new(vec![0.0; 100], 9600.0, 4).unwrap();
        assert!(matched_filter(&s, &p).is_err());
    }
}
