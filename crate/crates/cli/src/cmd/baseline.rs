use std::path::Path;

use anyhow::{Context, Result};

use bbfm::analog::{run_fm_baseline, FmBaselineConfig, FmBaselineReport};
use bbfm::channel::ChannelFading;
use bbfm::fading::generate_envelope;
use bbfm::io::{read_pcm16, write_pcm16};
use bbfm::link::ReceivedPowerDbm;
use bbfm::noise::trial_seed;
use bbfm::speech::{
    measure_mean_power, measure_papr_db, synthetic_speech, SpeechBuffer, SPEECH_RATE_HZ,
};

use crate::cli::{FmBaselineArgs, PaprArgs, Profile, SpeechSource};
use crate::failure::fail;
use crate::manifest::{Manifest, PCM_FORMAT};

/// Loads the PCM file or synthesises speech from `seed`, recording which in `m`.
fn load_speech(
    src: &SpeechSource,
    peak_amplitude: f64,
    seed: Option<u64>,
    m: &mut Manifest,
) -> Result<SpeechBuffer> {
    let speech = match (&src.input, src.synthetic) {
        (Some(path), _) => {
            let samples = read_pcm16(path, peak_amplitude)
                .with_context(|| format!("reading {}", path.display()))?;
            m.input(
                "speech",
                path,
                PCM_FORMAT,
                samples.len(),
                Some(SPEECH_RATE_HZ),
            );
            SpeechBuffer::new(samples, SPEECH_RATE_HZ)?
        }
        (None, Some(seconds)) => {
            if !(seconds.is_finite() && seconds > 0.0) {
                return Err(fail(
                    "invalid-argument",
                    format!("synthetic duration must be > 0, got {seconds}"),
                ));
            }
            let seed = seed.ok_or_else(|| fail("missing-seed", "--synthetic needs --seed"))?;
            m.param("synthetic_seconds", seconds).seed("speech", seed);
            synthetic_speech(seconds, seed)
        }
        (None, None) => return Err(fail("invalid-argument", "need --in or --synthetic")),
    };
    if speech.is_empty() {
        return Err(bbfm::Error::Empty.into());
    }
    Ok(speech)
}

fn report_entries(r: &FmBaselineReport) -> Vec<(&'static str, Option<f64>)> {
    vec![
        ("papr_before_compression_db", r.papr_before_compression_db),
        ("papr_limiter_input_db", r.papr_limiter_input_db),
        ("papr_after_compression_db", r.papr_after_compression_db),
        ("papr_modulating_db", r.papr_modulating_db),
        ("mean_mod_power", Some(r.mean_mod_power)),
        ("sigma_s", Some(r.sigma_s)),
        ("mean_sigma_sq", Some(r.mean_sigma_sq)),
        ("predicted_noise_power", Some(r.predicted_noise_power)),
        ("injected_noise_power", Some(r.injected_noise_power)),
    ]
}

pub fn run_fm(args: &FmBaselineArgs, manifest_path: Option<&Path>) -> Result<()> {
    let link = args.link.resolve(Profile::AnalogFm)?;
    let set_point = ReceivedPowerDbm::new(args.set_point)?;
    let a = link.params.peak_amplitude();
    let mut m = Manifest::new("fm-baseline");
    let speech = load_speech(&args.source, a, Some(args.seed), &mut m)?;
    // rejects all-zero input with a silent-input error
    measure_papr_db(&speech)?;

    let noise_seed = trial_seed(args.seed, 2);
    let mut config = FmBaselineConfig::new(set_point, noise_seed);
    config.link = link.params;
    config.band_low_hz = args.band_low_hz;
    config.band_high_hz = args.band_high_hz;
    config.clip_db = args.clip_db;
    config.bpf_enabled = !args.no_bpf;
    config.preemph_enabled = !args.no_preemph;
    config.limiter_enabled = !args.no_limiter;
    config.noise_enabled = !args.no_noise;
    if let Some(cfg) = args
        .channel
        .fading(SPEECH_RATE_HZ, trial_seed(args.seed, 1))?
    {
        m.fading(&cfg);
        config.fading = ChannelFading::Envelope(generate_envelope(&cfg, speech.len())?);
    }

    let out = run_fm_baseline(&speech, &config)?;
    write_pcm16(&args.out, out.speech.samples(), a)
        .with_context(|| format!("writing {}", args.out.display()))?;

    m.link(&link)
        .param("set_point_dbm", set_point.value())
        .param(
            "channel",
            if config.fading == ChannelFading::Unity {
                "awgn"
            } else {
                "lmr"
            },
        )
        .param("clip_db", config.clip_db)
        .param("band_low_hz", config.band_low_hz)
        .param("band_high_hz", config.band_high_hz)
        .param("bpf", config.bpf_enabled)
        .param("preemphasis", config.preemph_enabled)
        .param("limiter", config.limiter_enabled)
        .param("noise", config.noise_enabled)
        .seed("base", args.seed)
        .seed("noise", noise_seed)
        .output(
            "speech",
            &args.out,
            PCM_FORMAT,
            out.speech.len(),
            Some(SPEECH_RATE_HZ),
        );
    let mut line = Vec::new();
    for (k, v) in report_entries(&out.report) {
        if let Some(v) = v {
            m.result(k, v);
            line.push(format!("{k}={v:.6}"));
        }
    }
    println!("{}", line.join(" "));
    m.write_for(manifest_path, &args.out)?;
    Ok(())
}

pub fn run_papr(args: &PaprArgs, manifest_path: Option<&Path>) -> Result<()> {
    let mut m = Manifest::new("papr");
    m.param("peak_amplitude", args.peak_amplitude);
    if !(args.peak_amplitude.is_finite() && args.peak_amplitude > 0.0) {
        return Err(fail("invalid-argument", "peak amplitude must be > 0"));
    }
    let speech = load_speech(&args.source, args.peak_amplitude, args.seed, &mut m)?;
    let papr = measure_papr_db(&speech)?;
    let power = measure_mean_power(&speech)?;
    println!(
        "samples={} papr_db={papr:.4} mean_power={power:.6}",
        speech.len()
    );
    m.result("papr_db", papr).result("mean_power", power);
    if let Some(path) = &args.write_speech {
        write_pcm16(path, speech.samples(), args.peak_amplitude)
            .with_context(|| format!("writing {}", path.display()))?;
        m.output(
            "speech",
            path,
            PCM_FORMAT,
            speech.len(),
            Some(SPEECH_RATE_HZ),
        );
        m.write_for(manifest_path, path)?;
    } else if let Some(p) = manifest_path {
        m.write(p)?;
    }
    Ok(())
}
