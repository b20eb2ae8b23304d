use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "bbfm-sim",
    version,
    about = "Baseband FM land mobile radio simulator"
)]
pub struct Cli {
    /// Log warnings and errors only.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    /// Where to write the run manifest. Defaults to `<output>.manifest.toml`.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Demodulator output SNR against received power, as CSV.
    SnrCurve(SnrCurveArgs),
    /// Two-path fading magnitude file.
    FadingGen(FadingGenArgs),
    /// Symbol channel run on a float32 symbol file.
    Chsim(ChsimArgs),
    /// Analog FM reference chain on 8 kHz PCM speech.
    FmBaseline(FmBaselineArgs),
    /// Peak to average power ratio of PCM speech.
    Papr(PaprArgs),
    /// Payload symbols to frames, optionally pulse shaped.
    Frame(FrameArgs),
    /// Frame sync and payload extraction.
    Deframe(DeframeArgs),
    /// Frame modem round trip through a noisy link.
    ModemLoop(ModemLoopArgs),
    /// Reference channel bundles for cross-checking other implementations.
    Golden(GoldenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    AnalogFm,
    Rade,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelKind {
    Awgn,
    Lmr,
}

/// Link parameters: a profile, an optional TOML config file, then flag overrides.
#[derive(Debug, Clone, Default, Args)]
pub struct LinkArgs {
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,

    /// TOML file with `profile` and link parameter keys.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[arg(long, value_name = "HZ")]
    pub deviation_hz: Option<f64>,

    #[arg(long, value_name = "HZ")]
    pub max_mod_freq_hz: Option<f64>,

    #[arg(long, value_name = "DB", allow_hyphen_values = true)]
    pub noise_figure_db: Option<f64>,

    #[arg(long, value_name = "K")]
    pub temperature_k: Option<f64>,

    /// Peak amplitude A of the modulating signal.
    #[arg(long, value_name = "A")]
    pub peak_amplitude: Option<f64>,

    /// Mean modulating power x̄².
    #[arg(long, value_name = "POWER")]
    pub mean_mod_power: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    #[arg(long, value_enum, default_value = "awgn")]
    pub channel: ChannelKind,

    #[arg(long, value_name = "KMH", default_value_t = 60.0)]
    pub velocity_kmh: f64,

    /// Delay of the second path.
    #[arg(long, value_name = "US", default_value_t = 200.0)]
    pub delay_us: f64,

    #[arg(long, value_name = "MHZ", default_value_t = 450.0)]
    pub carrier_mhz: f64,
}

#[derive(Debug, Args)]
pub struct SnrCurveArgs {
    #[command(flatten)]
    pub link: LinkArgs,

    #[arg(long, value_name = "DBM", allow_hyphen_values = true, default_value_t = -130.0)]
    pub from: f64,

    #[arg(long, value_name = "DBM", allow_hyphen_values = true, default_value_t = -100.0)]
    pub to: f64,

    #[arg(long, value_name = "DB", default_value_t = 0.5)]
    pub step: f64,

    /// Fading gain |H| in dB applied to every point.
    #[arg(
        long,
        value_name = "DB",
        allow_hyphen_values = true,
        default_value_t = 0.0
    )]
    pub fading_db: f64,

    /// CSV output file. Stdout if omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FadingGenArgs {
    #[arg(long, value_name = "KMH", default_value_t = 60.0)]
    pub velocity_kmh: f64,

    #[arg(long, value_name = "US", default_value_t = 200.0)]
    pub delay_us: f64,

    #[arg(long, value_name = "MHZ", default_value_t = 450.0)]
    pub carrier_mhz: f64,

    /// Output sample rate.
    #[arg(long, value_name = "HZ", default_value_t = 2000.0)]
    pub rate: f64,

    #[arg(long, short = 'n')]
    pub samples: usize,

    #[arg(long)]
    pub seed: u64,

    /// |H| as float32 little endian.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ChsimArgs {
    #[command(flatten)]
    pub link: LinkArgs,

    #[command(flatten)]
    pub channel: ChannelArgs,

    /// Received power at the set point.
    #[arg(long, value_name = "DBM", allow_hyphen_values = true)]
    pub set_point: f64,

    /// Symbol rate of the input stream.
    #[arg(long, value_name = "HZ", default_value_t = 2000.0)]
    pub rate: f64,

    /// Precomputed |H| file. Its rate comes from `--fading-rate` or its manifest.
    #[arg(long, value_name = "PATH")]
    pub fading_file: Option<PathBuf>,

    #[arg(long, value_name = "HZ")]
    pub fading_rate: Option<f64>,

    #[arg(long)]
    pub seed: u64,

    /// Transmitted symbols, float32 little endian.
    #[arg(long = "in", short, value_name = "PATH")]
    pub input: PathBuf,

    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpeechSource {
    /// Raw signed 16-bit little endian mono PCM at 8 kHz.
    #[arg(long = "in", short, value_name = "PATH", conflicts_with = "synthetic")]
    pub input: Option<PathBuf>,

    /// Use this many seconds of synthetic speech instead of a file.
    #[arg(long, value_name = "SECONDS")]
    pub synthetic: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FmBaselineArgs {
    #[command(flatten)]
    pub link: LinkArgs,

    #[command(flatten)]
    pub channel: ChannelArgs,

    #[command(flatten)]
    pub source: SpeechSource,

    #[arg(long, value_name = "DBM", allow_hyphen_values = true)]
    pub set_point: f64,

    #[arg(long)]
    pub seed: u64,

    /// Limiter clip level above the RMS at its input.
    #[arg(long, value_name = "DB", allow_hyphen_values = true, default_value_t = bbfm::analog::DEFAULT_CLIP_DB)]
    pub clip_db: f64,

    #[arg(long, value_name = "HZ", default_value_t = 300.0)]
    pub band_low_hz: f64,

    #[arg(long, value_name = "HZ", default_value_t = 3000.0)]
    pub band_high_hz: f64,

    #[arg(long)]
    pub no_bpf: bool,

    #[arg(long)]
    pub no_preemph: bool,

    #[arg(long)]
    pub no_limiter: bool,

    #[arg(long)]
    pub no_noise: bool,

    /// Output PCM.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PaprArgs {
    #[command(flatten)]
    pub source: SpeechSource,

    /// Needed with `--synthetic`.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Amplitude that PCM full scale maps to.
    #[arg(long, value_name = "A", default_value_t = 1.0)]
    pub peak_amplitude: f64,

    /// Write the synthetic clip as PCM.
    #[arg(long, value_name = "PATH")]
    pub write_speech: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PulseArgs {
    #[arg(long, value_name = "N", default_value_t = bbfm::frame::DEFAULT_SPS)]
    pub sps: usize,

    #[arg(long, default_value_t = bbfm::frame::DEFAULT_ROLLOFF)]
    pub rolloff: f64,

    #[arg(long, value_name = "SYMBOLS", default_value_t = bbfm::frame::DEFAULT_SPAN_SYMBOLS)]
    pub span: usize,
}

#[derive(Debug, Args)]
pub struct FrameArgs {
    #[command(flatten)]
    pub pulse: PulseArgs,

    #[arg(long, value_name = "A", default_value_t = 1.0)]
    pub peak_amplitude: f64,

    /// Write the pulse-shaped baseband instead of frame symbols.
    #[arg(long)]
    pub baseband: bool,

    /// Payload symbols, float32 little endian, a whole number of frames.
    #[arg(long = "in", short, value_name = "PATH")]
    pub input: PathBuf,

    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DeframeArgs {
    #[command(flatten)]
    pub pulse: PulseArgs,

    #[arg(long, value_name = "A", default_value_t = 1.0)]
    pub peak_amplitude: f64,

    /// Input is frame-aligned symbols rather than baseband samples.
    #[arg(long)]
    pub aligned: bool,

    #[arg(long, default_value_t = bbfm::frame::DEFAULT_SYNC_THRESHOLD)]
    pub threshold: f64,

    #[arg(long = "in", short, value_name = "PATH")]
    pub input: PathBuf,

    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModemLoopArgs {
    #[command(flatten)]
    pub pulse: PulseArgs,

    #[command(flatten)]
    pub link: LinkArgs,

    #[command(flatten)]
    pub channel: ChannelArgs,

    #[arg(long, default_value_t = 20)]
    pub frames: usize,

    /// Lead-in before the first frame, in symbols. Drawn from the seed if omitted.
    #[arg(long, value_name = "SYMBOLS")]
    pub delay: Option<f64>,

    /// Symbol-rate AWGN SNR. Conflicts with `--set-point`.
    #[arg(
        long,
        value_name = "DB",
        allow_hyphen_values = true,
        conflicts_with = "set_point"
    )]
    pub snr_db: Option<f64>,

    /// Received power through the FM link model.
    #[arg(long, value_name = "DBM", allow_hyphen_values = true)]
    pub set_point: Option<f64>,

    #[arg(long, default_value_t = bbfm::frame::DEFAULT_SYNC_THRESHOLD)]
    pub threshold: f64,

    #[arg(long)]
    pub seed: u64,

    /// Directory for payload, baseband and manifest files.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GoldenArgs {
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}
