use std::path::Path;

use anyhow::{Context, Result};

use bbfm::channel::{
    apply_channel_traced, measure_snr, ChannelFading, ChannelRun, SymbolStream, MIN_MEASURE_LEN,
};
use bbfm::exec::Execution;
use bbfm::fading::{generate_envelope, FadingEnvelope};
use bbfm::link::{snr_db, ReceivedPowerDbm};
use bbfm::noise::trial_seed;

use crate::cli::{ChsimArgs, Profile};
use crate::cmd::{read_f32, write_f32};
use crate::failure::fail;
use crate::manifest::{companion_fading_rate, Manifest, F32_FORMAT};

pub fn run(args: &ChsimArgs, manifest_path: Option<&Path>) -> Result<()> {
    let link = args.link.resolve(Profile::Rade)?;
    let set_point = ReceivedPowerDbm::new(args.set_point)?;
    let tx = SymbolStream::new(read_f32(&args.input)?, args.rate)
        .with_context(|| format!("loading {}", args.input.display()))?;
    let noise_seed = trial_seed(args.seed, 2);

    let mut m = Manifest::new("chsim");
    m.link(&link)
        .param("set_point_dbm", set_point.value())
        .param("symbol_rate_hz", args.rate)
        .seed("base", args.seed)
        .seed("noise", noise_seed)
        .input("tx", &args.input, F32_FORMAT, tx.len(), Some(args.rate));

    let fading = if let Some(path) = &args.fading_file {
        let rate = match args.fading_rate {
            Some(r) => r,
            None => companion_fading_rate(path)?.ok_or_else(|| {
                fail(
                    "missing-rate",
                    format!(
                        "no --fading-rate given and no rate in the manifest of {}",
                        path.display()
                    ),
                )
            })?,
        };
        let mag = read_f32(path)?;
        m.param("channel", "file")
            .input("fading", path, F32_FORMAT, mag.len(), Some(rate));
        ChannelFading::Envelope(FadingEnvelope::new(mag, rate)?)
    } else {
        match args.channel.fading(args.rate, trial_seed(args.seed, 1))? {
            Some(cfg) => {
                m.param("channel", "lmr").fading(&cfg);
                ChannelFading::Envelope(generate_envelope(&cfg, tx.len())?)
            }
            None => {
                m.param("channel", "awgn");
                ChannelFading::Unity
            }
        }
    };
    let awgn = matches!(fading, ChannelFading::Unity);

    let run = ChannelRun {
        link: link.params,
        set_point,
        fading,
        noise_seed,
    };
    let trace = apply_channel_traced(&tx, &run, Execution::default())?;
    write_f32(&args.out, trace.rx.symbols())?;
    m.output("rx", &args.out, F32_FORMAT, trace.rx.len(), Some(args.rate));

    let a = link.params.peak_amplitude();
    let mean_sigma_sq =
        trace.sigma.iter().map(|&s| (s as f64).powi(2)).sum::<f64>() / trace.sigma.len() as f64;
    let max_dev = tx
        .symbols()
        .iter()
        .zip(trace.rx.symbols())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f32, f32::max);
    m.result("mean_sigma_sq", mean_sigma_sq)
        .result("max_abs_deviation", max_dev as f64);
    if awgn {
        m.result(
            "requested_snr_db",
            snr_db(&link.params, set_point, 0.0).value(),
        );
    }
    if tx.len() >= MIN_MEASURE_LEN {
        let measured = measure_snr(&tx, &trace.rx, a)?.value();
        m.result("measured_snr_db", measured);
        log::info!(target: "chsim", "symbols={} measured_snr_db={measured:.3}", tx.len());
    }
    m.write_for(manifest_path, &args.out)?;
    Ok(())
}
