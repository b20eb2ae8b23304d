use std::path::Path;

use anyhow::Result;

use bbfm::fading::generate_envelope;

use crate::cli::FadingGenArgs;
use crate::cmd::write_f32;
use crate::config::fading_config;
use crate::failure::fail;
use crate::manifest::{Manifest, F32_FORMAT};

pub fn run(args: &FadingGenArgs, manifest_path: Option<&Path>) -> Result<()> {
    if args.samples == 0 {
        return Err(fail("invalid-argument", "samples must be > 0"));
    }
    let cfg = fading_config(
        args.carrier_mhz,
        args.velocity_kmh,
        args.delay_us,
        args.rate,
        args.seed,
    )?;
    let env = generate_envelope(&cfg, args.samples)?;
    let mag = env.magnitudes();
    write_f32(&args.out, mag)?;
    let power = mag.iter().map(|&m| (m as f64).powi(2)).sum::<f64>() / mag.len() as f64;
    log::info!(
        target: "fading",
        "samples={} rate_hz={} doppler_spread_hz={:.3} mean_power={:.4}",
        mag.len(),
        cfg.output_rate_hz,
        cfg.doppler_spread_hz(),
        power
    );
    let mut m = Manifest::new("fading-gen");
    m.fading(&cfg)
        .output(
            "magnitude",
            &args.out,
            F32_FORMAT,
            mag.len(),
            Some(cfg.output_rate_hz),
        )
        .result("mean_power", power);
    m.write_for(manifest_path, &args.out)?;
    Ok(())
}
