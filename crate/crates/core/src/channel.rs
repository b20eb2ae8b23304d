//! Linearised BBFM channel at the symbol rate.
//!
//! The FM demodulator output is modelled as the transmitted symbol plus
//! Gaussian noise whose standard deviation tracks the fading:
//!
//! 1. pick a set point `R_dBm` (and a fading channel),
//! 2. take one |H| sample per symbol,
//! 3. per symbol, `SNR = snr_db(R_dBm + 20·log10|H|)`,
//! 4. `σ_s = A / sqrt(SNR)`,
//! 5. `ẑ = z + σ_s·N(0,1)`.
//!
//! Symbol amplitudes are not scaled by |H|: the demodulated level is set by
//! the deviation, only the noise moves with the channel.
//!
//! Arithmetic for the received stream is done in `f32` as
//! `rx = tx + sigma * noise` with all three operands stored as `f32`, so a
//! saved trace reproduces `rx` exactly. Noise comes from
//! [`noise::fill_block`] in blocks of [`noise::NOISE_BLOCK`] symbols.

use crate::exec::{self, Execution};
use crate::fading::{magnitude_to_db, FadingEnvelope};
use crate::link::{FmLinkParams, LinkEvaluator, ReceivedPowerDbm, SnrDb};
use crate::{noise, power_db, Error, Result};

/// Upper cap returned by [`measure_snr`] for noiseless input.
pub const MAX_MEASURED_SNR_DB: f64 = 200.0;

/// Minimum stream length accepted by [`measure_snr`].
pub const MIN_MEASURE_LEN: usize = 1000;

/// Continuously valued ASK symbols at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolStream {
    symbols: Vec<f32>,
    symbol_rate_hz: f64,
}

impl SymbolStream {
    pub fn new(symbols: Vec<f32>, symbol_rate_hz: f64) -> Result<Self> {
        if !(symbol_rate_hz.is_finite() && symbol_rate_hz > 0.0) {
            return Err(Error::invalid("symbol_rate_hz", "must be > 0"));
        }
        if let Some(i) = symbols.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!("symbol {i} is not finite")));
        }
        Ok(Self {
            symbols,
            symbol_rate_hz,
        })
    }

    pub fn symbols(&self) -> &[f32] {
        &self.symbols
    }

    pub fn symbol_rate_hz(&self) -> f64 {
        self.symbol_rate_hz
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn into_symbols(self) -> Vec<f32> {
        self.symbols
    }

    /// Checks every symbol against the peak amplitude of the link.
    pub fn check_peak(&self, peak_amplitude: f64) -> Result<()> {
        match self
            .symbols
            .iter()
            .enumerate()
            .find(|(_, v)| v.abs() as f64 > peak_amplitude)
        {
            Some((index, v)) => Err(Error::AmplitudeExceeded {
                index,
                value: *v as f64,
                limit: peak_amplitude,
            }),
            None => Ok(()),
        }
    }
}

/// Fading applied during a channel run.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ChannelFading {
    /// |H| = 1 for every symbol (AWGN channel).
    #[default]
    Unity,
    Envelope(FadingEnvelope),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRun {
    pub link: FmLinkParams,
    pub set_point: ReceivedPowerDbm,
    pub fading: ChannelFading,
    pub noise_seed: u64,
}

impl ChannelRun {
    pub fn awgn(link: FmLinkParams, set_point: ReceivedPowerDbm, noise_seed: u64) -> Self {
        Self {
            link,
            set_point,
            fading: ChannelFading::Unity,
            noise_seed,
        }
    }

    pub fn faded(
        link: FmLinkParams,
        set_point: ReceivedPowerDbm,
        fading: FadingEnvelope,
        noise_seed: u64,
    ) -> Self {
        Self {
            link,
            set_point,
            fading: ChannelFading::Envelope(fading),
            noise_seed,
        }
    }
}

/// Intermediate arrays of a channel run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace {
    /// σ_s per symbol.
    pub sigma: Vec<f32>,
    /// Unit-variance draws per symbol.
    pub noise: Vec<f32>,
    pub rx: SymbolStream,
}

/// Applies the channel and returns the received stream.
pub fn apply_channel(stream: &SymbolStream, run: &ChannelRun) -> Result<SymbolStream> {
    apply_channel_traced(stream, run, Execution::default()).map(|t| t.rx)
}

/// Applies the channel and keeps σ_s and the noise draws.
pub fn apply_channel_traced(
    stream: &SymbolStream,
    run: &ChannelRun,
    exec: Execution,
) -> Result<ChannelTrace> {
    let n = stream.len();
    if let ChannelFading::Envelope(env) = &run.fading {
        if env.rate_hz() != stream.symbol_rate_hz() {
            return Err(Error::RateMismatch {
                expected: stream.symbol_rate_hz(),
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
    stream.check_peak(run.link.peak_amplitude())?;

    let evaluator = LinkEvaluator::new(&run.link, run.set_point);
    let sigma: Vec<f32> = match &run.fading {
        ChannelFading::Unity => vec![evaluator.sigma(0.0) as f32; n],
        ChannelFading::Envelope(env) => env.magnitudes()[..n]
            .iter()
            .map(|&m| evaluator.sigma(magnitude_to_db(m as f64)) as f32)
            .collect(),
    };

    let mut noise = vec![0.0f32; n];
    exec::for_each_chunk_mut(exec, &mut noise, noise::NOISE_BLOCK, |block, chunk| {
        noise::fill_block(run.noise_seed, block as u64, chunk)
    });

    let rx: Vec<f32> = stream
        .symbols()
        .iter()
        .zip(&sigma)
        .zip(&noise)
        .map(|((&z, &s), &g)| z + s * g)
        .collect();

    Ok(ChannelTrace {
        sigma,
        noise,
        rx: SymbolStream::new(rx, stream.symbol_rate_hz())?,
    })
}

/// SNR of `rx` against `tx`, referenced to a signal power of A².
pub fn measure_snr(tx: &SymbolStream, rx: &SymbolStream, peak_amplitude: f64) -> Result<SnrDb> {
    if tx.len() != rx.len() {
        return Err(Error::LengthMismatch {
            expected: tx.len(),
            actual: rx.len(),
        });
    }
    if tx.len() < MIN_MEASURE_LEN {
        return Err(Error::invalid(
            "stream length",
            format!("need at least {MIN_MEASURE_LEN} symbols, got {}", tx.len()),
        ));
    }
    let err = tx
        .symbols()
        .iter()
        .zip(rx.symbols())
        .map(|(&a, &b)| (b as f64 - a as f64).powi(2))
        .sum::<f64>()
        / tx.len() as f64;
    let snr = if err == 0.0 {
        MAX_MEASURED_SNR_DB
    } else {
        power_db(peak_amplitude * peak_amplitude / err).min(MAX_MEASURED_SNR_DB)
    };
    SnrDb::new(snr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::{snr_db, threshold_dbm};
    use approx::assert_abs_diff_eq;

    fn dbm(v: f64) -> ReceivedPowerDbm {
        ReceivedPowerDbm::new(v).unwrap()
    }

    fn zeros(n: usize) -> SymbolStream {
        SymbolStream::new(vec![0.0; n], 2000.0).unwrap()
    }

    fn std_dev(x: &[f32]) -> f64 {
        let n = x.len() as f64;
        let mean = x.iter().map(|&v| v as f64).sum::<f64>() / n;
        (x.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n).sqrt()
    }

    #[test]
    fn threshold_awgn_noise_level() {
        let link = FmLinkParams::analog_fm();
        let run = ChannelRun::awgn(link, threshold_dbm(&link), 3);
        let rx = apply_channel(&zeros(100_000), &run).unwrap();
        let expected = 1.0 / 10f64.powf(1.2).sqrt();
        assert_abs_diff_eq!(expected, 0.2512, epsilon = 1e-4);
        let measured = std_dev(rx.symbols());
        assert!((measured / expected - 1.0).abs() < 0.02, "{measured}");
    }

    #[test]
    fn strong_signal_is_nearly_transparent() {
        let link = FmLinkParams::rade();
        let tx: Vec<f32> = (0..5000).map(|i| ((i as f32) * 0.37).sin()).collect();
        let tx = SymbolStream::new(tx, 2000.0).unwrap();
        let trace = apply_channel_traced(
            &tx,
            &ChannelRun::awgn(link, dbm(-40.0), 1),
            Execution::Sequential,
        )
        .unwrap();
        assert!(trace.sigma.iter().all(|&s| s < 1e-4));
        let worst = tx
            .symbols()
            .iter()
            .zip(trace.rx.symbols())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(worst < 1e-3);
    }

    #[test]
    fn unity_fading_on_zeros_is_pure_noise() {
        let link = FmLinkParams::rade();
        let run = ChannelRun::awgn(link, dbm(-120.0), 8);
        let trace = apply_channel_traced(&zeros(3000), &run, Execution::Sequential).unwrap();
        for ((r, s), g) in trace
            .rx
            .symbols()
            .iter()
            .zip(&trace.sigma)
            .zip(&trace.noise)
        {
            assert_eq!(*r, s * g);
        }
        assert!(apply_channel(&zeros(0), &run).unwrap().is_empty());
    }

    #[test]
    fn sigma_follows_each_fading_sample() {
        let link = FmLinkParams::rade();
        let mags = vec![1.0f32, 0.5, 0.01, 2.0, 0.0];
        let env = FadingEnvelope::new(mags.clone(), 2000.0).unwrap();
        let run = ChannelRun::faded(link, dbm(-110.0), env, 4);
        let trace = apply_channel_traced(&zeros(5), &run, Execution::Sequential).unwrap();
        for (m, s) in mags.iter().zip(&trace.sigma) {
            let snr = snr_db(&link, dbm(-110.0), magnitude_to_db(*m as f64));
            let expect = crate::link::noise_sigma(&link, snr) as f32;
            assert_eq!(*s, expect);
        }
        assert!(trace.sigma[4] > trace.sigma[2] && trace.sigma[2] > trace.sigma[0]);
        assert!(trace.sigma.iter().all(|s| s.is_finite()));
    }

    #[test]
    fn rejects_bad_runs() {
        let link = FmLinkParams::rade();
        let env = FadingEnvelope::new(vec![1.0; 10], 4800.0).unwrap();
        let run = ChannelRun::faded(link, dbm(-110.0), env, 1);
        assert!(matches!(
            apply_channel(&zeros(10), &run),
            Err(Error::RateMismatch { .. })
        ));

        let env = FadingEnvelope::new(vec![1.0; 9], 2000.0).unwrap();
        let run = ChannelRun::faded(link, dbm(-110.0), env, 1);
        assert!(matches!(
            apply_channel(&zeros(10), &run),
            Err(Error::LengthMismatch { .. })
        ));

        let loud = SymbolStream::new(vec![0.5, 1.2], 2000.0).unwrap();
        let run = ChannelRun::awgn(link, dbm(-110.0), 1);
        assert!(matches!(
            apply_channel(&loud, &run),
            Err(Error::AmplitudeExceeded { index: 1, .. })
        ));
    }

    #[test]
    fn parallel_and_sequential_identical() {
        let link = FmLinkParams::rade();
        let tx = SymbolStream::new(
            (0..20_000).map(|i| ((i % 7) as f32 - 3.0) / 3.0).collect(),
            2000.0,
        )
        .unwrap();
        let run = ChannelRun::awgn(link, dbm(-118.0), 21);
        let a = apply_channel_traced(&tx, &run, Execution::Sequential).unwrap();
        let b = apply_channel_traced(&tx, &run, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn measure_snr_edge_cases() {
        let tx = zeros(100_000);
        assert_eq!(
            measure_snr(&tx, &tx, 1.0).unwrap().value(),
            MAX_MEASURED_SNR_DB
        );
        let noise = SymbolStream::new(noise::standard_normal(99, 100_000), 2000.0).unwrap();
        let snr = measure_snr(&tx, &noise, 1.0).unwrap().value();
        assert!(snr.abs() < 0.2, "{snr}");
        assert!(measure_snr(&tx, &zeros(10), 1.0).is_err());
        assert!(measure_snr(&zeros(10), &zeros(10), 1.0).is_err());
    }
}
