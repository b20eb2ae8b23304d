//! Resolution of command-line and config-file parameters into simulator types.

use std::collections::BTreeMap;
use std::fs;

use anyhow::{Context, Result};
use serde::Deserialize;

use bbfm::fading::FadingConfig;
use bbfm::frame::{FrameLayout, PulseShape};
use bbfm::link::FmLinkParams;

use crate::cli::{ChannelArgs, ChannelKind, LinkArgs, Profile, PulseArgs};
use crate::failure::fail;

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::AnalogFm => "analog-fm",
            Profile::Rade => "rade",
        }
    }

    pub fn params(self) -> FmLinkParams {
        match self {
            Profile::AnalogFm => FmLinkParams::analog_fm(),
            Profile::Rade => FmLinkParams::rade(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkFile {
    profile: Option<Profile>,
    deviation_hz: Option<f64>,
    max_mod_freq_hz: Option<f64>,
    noise_figure_db: Option<f64>,
    temperature_k: Option<f64>,
    peak_amplitude: Option<f64>,
    mean_mod_power: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ResolvedLink {
    pub profile: Profile,
    pub params: FmLinkParams,
    /// Parameters that differ from the profile, by name.
    pub overrides: BTreeMap<&'static str, f64>,
}

const LINK_KEYS: [&str; 6] = [
    "deviation_hz",
    "max_mod_freq_hz",
    "noise_figure_db",
    "temperature_k",
    "peak_amplitude",
    "mean_mod_power",
];

fn values(p: &FmLinkParams) -> [f64; 6] {
    [
        p.deviation_hz(),
        p.max_mod_freq_hz(),
        p.noise_figure_db(),
        p.temperature_k(),
        p.peak_amplitude(),
        p.mean_mod_power(),
    ]
}

impl LinkArgs {
    /// Profile defaults, then the config file, then flags.
    pub fn resolve(&self, default: Profile) -> Result<ResolvedLink> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading link config {}", path.display()))?;
                toml::from_str::<LinkFile>(&text)
                    .with_context(|| format!("parsing link config {}", path.display()))?
            }
            None => LinkFile::default(),
        };
        let profile = self.profile.or(file.profile).unwrap_or(default);
        let base = values(&profile.params());
        let file_vals = [
            file.deviation_hz,
            file.max_mod_freq_hz,
            file.noise_figure_db,
            file.temperature_k,
            file.peak_amplitude,
            file.mean_mod_power,
        ];
        let flag_vals = [
            self.deviation_hz,
            self.max_mod_freq_hz,
            self.noise_figure_db,
            self.temperature_k,
            self.peak_amplitude,
            self.mean_mod_power,
        ];
        let mut v = base;
        let mut overrides = BTreeMap::new();
        for i in 0..v.len() {
            if let Some(x) = flag_vals[i].or(file_vals[i]) {
                v[i] = x;
                if x != base[i] {
                    overrides.insert(LINK_KEYS[i], x);
                }
            }
        }
        let params = FmLinkParams::new(v[0], v[1], v[2], v[3], v[4], v[5])?;
        Ok(ResolvedLink {
            profile,
            params,
            overrides,
        })
    }
}

impl ResolvedLink {
    pub fn entries(&self) -> impl Iterator<Item = (&'static str, f64)> {
        LINK_KEYS.into_iter().zip(values(&self.params))
    }
}

impl ChannelArgs {
    /// `None` for AWGN.
    pub fn fading(&self, rate_hz: f64, seed: u64) -> Result<Option<FadingConfig>> {
        match self.channel {
            ChannelKind::Awgn => Ok(None),
            ChannelKind::Lmr => fading_config(
                self.carrier_mhz,
                self.velocity_kmh,
                self.delay_us,
                rate_hz,
                seed,
            )
            .map(Some),
        }
    }
}

pub fn fading_config(
    carrier_mhz: f64,
    velocity_kmh: f64,
    delay_us: f64,
    rate_hz: f64,
    seed: u64,
) -> Result<FadingConfig> {
    let mut cfg = FadingConfig::lmr(velocity_kmh, delay_us, rate_hz, seed);
    cfg.carrier_freq_hz = carrier_mhz * 1e6;
    cfg.validate()?;
    Ok(cfg)
}

impl PulseArgs {
    pub fn build(&self, peak_amplitude: f64) -> Result<(FrameLayout, PulseShape)> {
        let layout = FrameLayout::new(peak_amplitude)?;
        let pulse = PulseShape::new(self.rolloff, self.span, self.sps)?;
        Ok((layout, pulse))
    }
}

pub fn require_finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(fail(
            "invalid-argument",
            format!("{name} must be finite, got {v}"),
        ))
    }
}
