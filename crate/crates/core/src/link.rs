//! FM demodulator link budget.
//!
//! Above threshold the demodulator output SNR is `R_dBm + G_FM`, with
//!
//! ```text
//! G_FM = 10 log10( 3 β² x̄² / (10³ k T f_m) ) - NF_dB,   β = f_d / f_m
//! ```
//!
//! Below the threshold power `T_dBm = 12 - G_FM` the output SNR falls three
//! dB for every dB of received power. Fading enters as an additive dB offset
//! on the set point.

use serde::{Deserialize, Serialize};

use crate::{db_to_power, Error, Result};

/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Demodulator output SNR that defines the FM threshold.
pub const THRESHOLD_SNR_DB: f64 = 12.0;

/// dB of output SNR lost per dB of received power below threshold.
pub const SUB_THRESHOLD_SLOPE: f64 = 3.0;

/// Default receiver temperature, kelvin.
pub const DEFAULT_TEMPERATURE_K: f64 = 274.0;

/// FM link budget constants.
///
/// The modulation index is always derived from the deviation and the maximum
/// modulating frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FmLinkParams {
    deviation_hz: f64,
    max_mod_freq_hz: f64,
    noise_figure_db: f64,
    temperature_k: f64,
    peak_amplitude: f64,
    mean_mod_power: f64,
}

impl FmLinkParams {
    pub fn new(
        deviation_hz: f64,
        max_mod_freq_hz: f64,
        noise_figure_db: f64,
        temperature_k: f64,
        peak_amplitude: f64,
        mean_mod_power: f64,
    ) -> Result<Self> {
        let params = Self {
            deviation_hz,
            max_mod_freq_hz,
            noise_figure_db,
            temperature_k,
            peak_amplitude,
            mean_mod_power,
        };
        params.validate()?;
        Ok(params)
    }

    /// Analog FM column of the channel model table: f_d = 2500 Hz,
    /// f_m = 3000 Hz, NF = 5 dB, sinusoidal reference modulation (A = 1, x̄² = 0.5).
    pub fn analog_fm() -> Self {
        Self::new(2500.0, 3000.0, 5.0, DEFAULT_TEMPERATURE_K, 1.0, 0.5)
            .expect("analog FM defaults are valid")
    }

    /// RADE column of the channel model table: f_d = 1800 Hz, f_m = 2880 Hz,
    /// NF = 5 dB. A = 1 and x̄² = 0.5 (sinusoidal reference) unless overridden.
    pub fn rade() -> Self {
        Self::new(1800.0, 2880.0, 5.0, DEFAULT_TEMPERATURE_K, 1.0, 0.5)
            .expect("RADE defaults are valid")
    }

    fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        };
        positive("deviation_hz", self.deviation_hz)?;
        positive("max_mod_freq_hz", self.max_mod_freq_hz)?;
        positive("temperature_k", self.temperature_k)?;
        positive("peak_amplitude", self.peak_amplitude)?;
        positive("mean_mod_power", self.mean_mod_power)?;
        if !self.noise_figure_db.is_finite() {
            return Err(Error::invalid("noise_figure_db", "must be finite"));
        }
        if self.peak_amplitude > 1.0 {
            return Err(Error::invalid(
                "peak_amplitude",
                format!("must be <= 1, got {}", self.peak_amplitude),
            ));
        }
        if self.mean_mod_power > self.peak_amplitude * self.peak_amplitude {
            return Err(Error::invalid(
                "mean_mod_power",
                format!(
                    "must not exceed peak_amplitude² = {}, got {}",
                    self.peak_amplitude * self.peak_amplitude,
                    self.mean_mod_power
                ),
            ));
        }
        Ok(())
    }

    pub fn with_deviation_hz(mut self, v: f64) -> Result<Self> {
        self.deviation_hz = v;
        self.validate().map(|_| self)
    }

    pub fn with_max_mod_freq_hz(mut self, v: f64) -> Result<Self> {
        self.max_mod_freq_hz = v;
        self.validate().map(|_| self)
    }

    pub fn with_noise_figure_db(mut self, v: f64) -> Result<Self> {
        self.noise_figure_db = v;
        self.validate().map(|_| self)
    }

    pub fn with_temperature_k(mut self, v: f64) -> Result<Self> {
        self.temperature_k = v;
        self.validate().map(|_| self)
    }

    pub fn with_peak_amplitude(mut self, v: f64) -> Result<Self> {
        self.peak_amplitude = v;
        self.validate().map(|_| self)
    }

    pub fn with_mean_mod_power(mut self, v: f64) -> Result<Self> {
        self.mean_mod_power = v;
        self.validate().map(|_| self)
    }

    pub fn deviation_hz(&self) -> f64 {
        self.deviation_hz
    }

    pub fn max_mod_freq_hz(&self) -> f64 {
        self.max_mod_freq_hz
    }

    pub fn noise_figure_db(&self) -> f64 {
        self.noise_figure_db
    }

    pub fn temperature_k(&self) -> f64 {
        self.temperature_k
    }

    pub fn peak_amplitude(&self) -> f64 {
        self.peak_amplitude
    }

    pub fn mean_mod_power(&self) -> f64 {
        self.mean_mod_power
    }

    /// β = f_d / f_m
    pub fn modulation_index(&self) -> f64 {
        self.deviation_hz / self.max_mod_freq_hz
    }
}

/// Received signal power in dBm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ReceivedPowerDbm(f64);

impl ReceivedPowerDbm {
    pub fn new(dbm: f64) -> Result<Self> {
        if dbm.is_finite() {
            Ok(Self(dbm))
        } else {
            Err(Error::invalid("received_power_dbm", "must be finite"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Demodulator output SNR in dB, noise measured in a bandwidth of f_m.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SnrDb(f64);

impl SnrDb {
    pub fn new(db: f64) -> Result<Self> {
        if db.is_finite() {
            Ok(Self(db))
        } else {
            Err(Error::invalid("snr_db", "must be finite"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn linear(self) -> f64 {
        db_to_power(self.0)
    }
}

/// FM gain G_FM such that `SNR_dB = R_dBm + G_FM` above threshold.
pub fn fm_gain_db(params: &FmLinkParams) -> f64 {
    let beta = params.modulation_index();
    let numerator = 3.0 * beta * beta * params.mean_mod_power;
    // 10³ converts kT from watts to milliwatts
    let denominator = 1e3 * BOLTZMANN * params.temperature_k * params.max_mod_freq_hz;
    10.0 * (numerator / denominator).log10() - params.noise_figure_db
}

/// Received power at which the output SNR equals [`THRESHOLD_SNR_DB`].
pub fn threshold_dbm(params: &FmLinkParams) -> ReceivedPowerDbm {
    ReceivedPowerDbm(THRESHOLD_SNR_DB - fm_gain_db(params))
}

/// Piecewise-linear demodulator output SNR for a set point and a fading
/// offset `fading_db` (20·log10|H|).
///
/// There is no floor: deep fades drive the SNR strongly negative.
pub fn snr_db(params: &FmLinkParams, set_point: ReceivedPowerDbm, fading_db: f64) -> SnrDb {
    let gain = fm_gain_db(params);
    let threshold = THRESHOLD_SNR_DB - gain;
    SnrDb(piecewise_snr(set_point.0 + fading_db, gain, threshold))
}

#[inline]
pub(crate) fn piecewise_snr(received_dbm: f64, gain_db: f64, threshold_dbm: f64) -> f64 {
    if received_dbm >= threshold_dbm {
        received_dbm + gain_db
    } else {
        SUB_THRESHOLD_SLOPE * received_dbm + gain_db - (SUB_THRESHOLD_SLOPE - 1.0) * threshold_dbm
    }
}

/// Noise standard deviation per symbol, σ_s = A / sqrt(SNR).
pub fn noise_sigma(params: &FmLinkParams, snr: SnrDb) -> f64 {
    params.peak_amplitude / snr.linear().sqrt()
}

/// Precomputed link quantities for per-symbol evaluation in hot loops.
#[derive(Debug, Clone, Copy)]
pub struct LinkEvaluator {
    gain_db: f64,
    threshold_dbm: f64,
    peak_amplitude: f64,
    set_point_dbm: f64,
}

impl LinkEvaluator {
    pub fn new(params: &FmLinkParams, set_point: ReceivedPowerDbm) -> Self {
        let gain_db = fm_gain_db(params);
        Self {
            gain_db,
            threshold_dbm: THRESHOLD_SNR_DB - gain_db,
            peak_amplitude: params.peak_amplitude,
            set_point_dbm: set_point.0,
        }
    }

    pub fn snr_db(&self, fading_db: f64) -> f64 {
        piecewise_snr(
            self.set_point_dbm + fading_db,
            self.gain_db,
            self.threshold_dbm,
        )
    }

    pub fn sigma(&self, fading_db: f64) -> f64 {
        self.peak_amplitude / db_to_power(self.snr_db(fading_db)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dbm(v: f64) -> ReceivedPowerDbm {
        ReceivedPowerDbm::new(v).unwrap()
    }

    #[test]
    fn gain_matches_direct_substitution() {
        // 40-digit evaluation of the gain expression with k = 1.380649e-23, T = 274 K
        let g = fm_gain_db(&FmLinkParams::analog_fm());
        assert_abs_diff_eq!(g, 134.627_736_667_421_5, epsilon = 1e-9);
        // published figure is 134.41; the 0.22 dB gap corresponds to T ≈ 288 K
        assert!((g - 134.41).abs() <= 0.25);
        let g288 = fm_gain_db(
            &FmLinkParams::analog_fm()
                .with_temperature_k(288.087_377_105)
                .unwrap(),
        );
        assert_abs_diff_eq!(g288, 134.41, epsilon = 1e-6);
    }

    #[test]
    fn rade_gain() {
        assert_abs_diff_eq!(
            fm_gain_db(&FmLinkParams::rade()),
            132.306_249_604_859_8,
            epsilon = 1e-9
        );
    }

    #[test]
    fn doubling_mean_power_adds_3db() {
        let quarter = FmLinkParams::analog_fm().with_mean_mod_power(0.25).unwrap();
        let half = FmLinkParams::analog_fm();
        assert_abs_diff_eq!(
            fm_gain_db(&half) - fm_gain_db(&quarter),
            10.0 * 2f64.log10(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn threshold_is_12_minus_gain() {
        let p = FmLinkParams::analog_fm();
        assert_abs_diff_eq!(
            threshold_dbm(&p).value(),
            12.0 - fm_gain_db(&p),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            threshold_dbm(&p).value(),
            -122.627_736_667_421_48,
            epsilon = 1e-9
        );
    }

    #[test]
    fn threshold_of_unit_gain_link_is_0dbm() {
        // G_FM = 12 dB: pick NF so the gain lands exactly on 12
        let p = FmLinkParams::analog_fm();
        let p = p
            .with_noise_figure_db(p.noise_figure_db() + fm_gain_db(&p) - 12.0)
            .unwrap();
        assert_abs_diff_eq!(threshold_dbm(&p).value(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn snr_at_threshold_and_one_db_below() {
        let p = FmLinkParams::analog_fm();
        let t = threshold_dbm(&p).value();
        assert_abs_diff_eq!(snr_db(&p, dbm(t), 0.0).value(), 12.0, epsilon = 1e-9);
        assert_abs_diff_eq!(snr_db(&p, dbm(t - 1.0), 0.0).value(), 9.0, epsilon = 1e-9);
        // both clauses agree at the breakpoint
        let gain = fm_gain_db(&p);
        let upper = t + gain;
        let lower = 3.0 * t + gain - 2.0 * t;
        assert!((upper - lower).abs() <= 1e-9);
    }

    #[test]
    fn snr_with_published_gain() {
        // with the published gain of 134.41 dB the threshold is -122.41 dBm
        let p = FmLinkParams::analog_fm();
        let gain = fm_gain_db(&p);
        let p = p
            .with_noise_figure_db(p.noise_figure_db() + gain - 134.41)
            .unwrap();
        assert_abs_diff_eq!(threshold_dbm(&p).value(), -122.41, epsilon = 1e-9);
        assert_abs_diff_eq!(snr_db(&p, dbm(-122.41), 0.0).value(), 12.0, epsilon = 1e-9);
    }

    #[test]
    fn sigma_examples() {
        let p = FmLinkParams::analog_fm();
        assert_abs_diff_eq!(
            noise_sigma(&p, SnrDb::new(0.0).unwrap()),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            noise_sigma(&p, SnrDb::new(20.0).unwrap()),
            0.1,
            epsilon = 1e-15
        );
        let half = FmLinkParams::new(2500.0, 3000.0, 5.0, 274.0, 0.5, 0.125).unwrap();
        let snr = SnrDb::new(10.0 * 4f64.log10()).unwrap();
        assert_abs_diff_eq!(noise_sigma(&half, snr), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(FmLinkParams::new(0.0, 3000.0, 5.0, 274.0, 1.0, 0.5).is_err());
        assert!(FmLinkParams::new(2500.0, -1.0, 5.0, 274.0, 1.0, 0.5).is_err());
        assert!(FmLinkParams::new(2500.0, 3000.0, 5.0, 274.0, 1.5, 0.5).is_err());
        assert!(FmLinkParams::new(2500.0, 3000.0, 5.0, 274.0, 0.6, 0.5).is_err());
        assert!(FmLinkParams::new(2500.0, 3000.0, f64::NAN, 274.0, 1.0, 0.5).is_err());
        assert!(ReceivedPowerDbm::new(f64::INFINITY).is_err());
    }

    #[test]
    fn evaluator_matches_free_functions() {
        let p = FmLinkParams::rade();
        let ev = LinkEvaluator::new(&p, dbm(-118.0));
        for h in [-30.0, -3.0, 0.0, 4.5] {
            let snr = snr_db(&p, dbm(-118.0), h);
            assert_eq!(ev.snr_db(h), snr.value());
            assert_eq!(ev.sigma(h), noise_sigma(&p, snr));
        }
    }

    proptest! {
        #[test]
        fn slope_is_one_or_three(r in -200.0f64..-40.0) {
            let p = FmLinkParams::analog_fm();
            let t = threshold_dbm(&p).value();
            prop_assume!((r - t).abs() > 0.01);
            let d = 1e-3;
            let slope = (snr_db(&p, dbm(r + d), 0.0).value() - snr_db(&p, dbm(r - d), 0.0).value()) / (2.0 * d);
            let expected = if r > t { 1.0 } else { 3.0 };
            prop_assert!((slope - expected).abs() < 1e-6);
        }

        #[test]
        fn continuous_at_threshold(eps in 0.0f64..0.01) {
            let p = FmLinkParams::rade();
            let t = threshold_dbm(&p).value();
            let jump = snr_db(&p, dbm(t + eps), 0.0).value() - snr_db(&p, dbm(t - eps), 0.0).value();
            prop_assert!(jump.abs() <= 8.0 * eps + 1e-9);
        }

        #[test]
        fn fading_adds_to_set_point(r in -150.0f64..-60.0, h in -60.0f64..10.0) {
            let p = FmLinkParams::analog_fm();
            let a = snr_db(&p, dbm(r), h).value();
            let b = snr_db(&p, dbm(r + h), 0.0).value();
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn sigma_round_trip(snr in -60.0f64..120.0, amp in 0.05f64..1.0) {
            let p = FmLinkParams::rade().with_mean_mod_power(amp * amp / 2.0).unwrap().with_peak_amplitude(amp).unwrap();
            let sigma = noise_sigma(&p, SnrDb::new(snr).unwrap());
            prop_assert!(sigma > 0.0);
            let measured = 20.0 * (amp / sigma).log10();
            prop_assert!((measured - snr).abs() < 1e-9);
        }
    }
}
