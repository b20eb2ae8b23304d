//! Reference channel runs with every intermediate array kept, for checking
//! other implementations of the symbol channel element by element.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_channel_traced, ChannelFading, ChannelRun, SymbolStream};
use crate::exec::Execution;
use crate::fading::{generate_envelope, FadingConfig};
use crate::link::{FmLinkParams, ReceivedPowerDbm};
use crate::{noise, Result};

/// Symbol rate of the golden runs (80 symbols per 40 ms frame).
pub const GOLDEN_SYMBOL_RATE_HZ: f64 = 2000.0;
pub const GOLDEN_LEN: usize = 4000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenSpec {
    pub name: String,
    pub link: FmLinkParams,
    pub set_point_dbm: f64,
    /// `None` for AWGN.
    pub fading: Option<FadingConfig>,
    pub num_symbols: usize,
    pub symbol_rate_hz: f64,
    pub seed: u64,
}

impl GoldenSpec {
    pub fn tx_seed(&self) -> u64 {
        noise::trial_seed(self.seed, 0)
    }

    pub fn fading_seed(&self) -> u64 {
        noise::trial_seed(self.seed, 1)
    }

    pub fn noise_seed(&self) -> u64 {
        noise::trial_seed(self.seed, 2)
    }

    /// The fixed reference set: AWGN near threshold and `lmr60` at two set points above it.
    pub fn reference_set() -> Vec<GoldenSpec> {
        let link = FmLinkParams::rade();
        let lmr60 = |seed| FadingConfig::lmr60(GOLDEN_SYMBOL_RATE_HZ, seed);
        let mk = |name: &str, set_point_dbm: f64, fading: Option<FadingConfig>, seed: u64| {
            let mut s = GoldenSpec {
                name: name.to_string(),
                link,
                set_point_dbm,
                fading,
                num_symbols: GOLDEN_LEN,
                symbol_rate_hz: GOLDEN_SYMBOL_RATE_HZ,
                seed,
            };
            let fading_seed = s.fading_seed();
            if let Some(f) = s.fading.as_mut() {
                f.seed = fading_seed;
            }
            s
        };
        vec![
            mk("awgn_m120", -120.0, None, 1),
            mk("lmr60_m115", -115.0, Some(lmr60(0)), 2),
            mk("lmr60_m105", -105.0, Some(lmr60(0)), 3),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenBundle {
    pub spec: GoldenSpec,
    pub tx: Vec<f32>,
    /// |H| per symbol (all ones for AWGN).
    pub fading: Vec<f32>,
    pub sigma: Vec<f32>,
    pub noise: Vec<f32>,
    pub rx: Vec<f32>,
}

/// Runs the channel for `spec` with uniformly distributed symbols in `[-A, A]`.
pub fn generate_golden(spec: &GoldenSpec) -> Result<GoldenBundle> {
    let a = spec.link.peak_amplitude() as f32;
    let mut rng = noise::rng(spec.tx_seed(), 0);
    let tx: Vec<f32> = (0..spec.num_symbols)
        .map(|_| rng.random_range(-a..=a))
        .collect();
    let stream = SymbolStream::new(tx.clone(), spec.symbol_rate_hz)?;
    let set_point = ReceivedPowerDbm::new(spec.set_point_dbm)?;
    let fading = match &spec.fading {
        Some(cfg) => ChannelFading::Envelope(generate_envelope(cfg, spec.num_symbols)?),
        None => ChannelFading::Unity,
    };
    let magnitudes = match &fading {
        ChannelFading::Envelope(env) => env.magnitudes().to_vec(),
        ChannelFading::Unity => vec![1.0; spec.num_symbols],
    };
    let run = ChannelRun {
        link: spec.link,
        set_point,
        fading,
        noise_seed: spec.noise_seed(),
    };
    let trace = apply_channel_traced(&stream, &run, Execution::default())?;
    Ok(GoldenBundle {
        spec: spec.clone(),
        tx,
        fading: magnitudes,
        sigma: trace.sigma,
        noise: trace.noise,
        rx: trace.rx.into_symbols(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::magnitude_to_db;
    use crate::link::{noise_sigma, snr_db};

    #[test]
    fn bundle_is_reproducible_and_consistent() {
        for spec in GoldenSpec::reference_set() {
            let a = generate_golden(&spec).unwrap();
            let b = generate_golden(&spec).unwrap();
            assert_eq!(a, b);
            for i in 0..a.tx.len() {
                assert_eq!(
                    a.rx[i].to_bits(),
                    (a.tx[i] + a.sigma[i] * a.noise[i]).to_bits()
                );
            }
            let sp = ReceivedPowerDbm::new(spec.set_point_dbm).unwrap();
            for i in (0..a.tx.len()).step_by(37) {
                let s = noise_sigma(
                    &spec.link,
                    snr_db(&spec.link, sp, magnitude_to_db(a.fading[i] as f64)),
                );
                assert!(((a.sigma[i] as f64 - s) / s).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn reference_set_names_are_unique() {
        let set = GoldenSpec::reference_set();
        let mut names: Vec<&str> = set.iter().map(|s| s.name.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), set.len());
        assert!(set
            .iter()
            .filter_map(|s| s.fading)
            .all(|f| (f.doppler_spread_hz() - 50.0).abs() < 1e-9));
    }
}
