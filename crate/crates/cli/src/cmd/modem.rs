use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use rand::Rng;

use bbfm::channel::{ChannelFading, ChannelRun};
use bbfm::fading::generate_envelope;
use bbfm::frame::{
    add_awgn, add_link_noise, applied_delay, assemble_frames, disassemble_frames, modulate,
    modulate_delayed, BasebandSignal, FrameSynchronizer, PulseShape, SyncReport, FRAME_SYMBOLS,
    PAYLOAD_SYMBOLS, SYMBOL_RATE_HZ,
};
use bbfm::link::{ReceivedPowerDbm, SnrDb};
use bbfm::montecarlo::random_symbols;
use bbfm::noise::{self, trial_seed};
use bbfm::power_db;

use crate::cli::{DeframeArgs, FrameArgs, ModemLoopArgs, Profile, PulseArgs};
use crate::cmd::{read_f32, write_f32};
use crate::failure::fail;
use crate::manifest::{Manifest, F32_FORMAT};

fn record_pulse(m: &mut Manifest, args: &PulseArgs, peak_amplitude: f64) {
    m.param("symbol_rate_hz", SYMBOL_RATE_HZ)
        .param("sps", args.sps as i64)
        .param("rolloff", args.rolloff)
        .param("span_symbols", args.span as i64)
        .param("peak_amplitude", peak_amplitude);
}

fn sample_rate(pulse: &PulseShape) -> f64 {
    SYMBOL_RATE_HZ * pulse.sps() as f64
}

/// Logs every sync event as one structured line.
fn log_events(report: &SyncReport) {
    for e in &report.events {
        let offset = e.position.floor();
        log::info!(
            target: "sync",
            "event={} offset={} timing={:.4} confidence={:.4}",
            format!("{:?}", e.kind).to_lowercase(),
            offset as i64,
            e.position - offset,
            e.confidence
        );
    }
}

fn record_sync(m: &mut Manifest, report: &SyncReport) {
    let s = &report.first_lock;
    m.result("synced", s.is_synced())
        .result("frames_recovered", report.frames.len() as i64);
    if s.is_synced() {
        m.result("first_lock_position", s.position())
            .result("first_lock_confidence", s.confidence);
        if let Some(at) = s.locked_at_symbol {
            m.result("locked_at_symbol", at as i64);
        }
    }
}

pub fn run_frame(args: &FrameArgs, manifest_path: Option<&Path>) -> Result<()> {
    let (layout, pulse) = args.pulse.build(args.peak_amplitude)?;
    let payload = read_f32(&args.input)?;
    let frames = assemble_frames(&payload, &layout)?;
    let mut m = Manifest::new("frame");
    record_pulse(&mut m, &args.pulse, args.peak_amplitude);
    m.input("payload", &args.input, F32_FORMAT, payload.len(), None);
    if args.baseband {
        let sig = modulate(&frames, SYMBOL_RATE_HZ, &pulse)?;
        write_f32(&args.out, sig.samples())?;
        m.param("output", "baseband").output(
            "baseband",
            &args.out,
            F32_FORMAT,
            sig.len(),
            Some(sig.sample_rate_hz()),
        );
    } else {
        write_f32(&args.out, &frames)?;
        m.param("output", "symbols").output(
            "symbols",
            &args.out,
            F32_FORMAT,
            frames.len(),
            Some(SYMBOL_RATE_HZ),
        );
    }
    m.write_for(manifest_path, &args.out)?;
    Ok(())
}

pub fn run_deframe(args: &DeframeArgs, manifest_path: Option<&Path>) -> Result<()> {
    let (layout, pulse) = args.pulse.build(args.peak_amplitude)?;
    let input = read_f32(&args.input)?;
    let mut m = Manifest::new("deframe");
    record_pulse(&mut m, &args.pulse, args.peak_amplitude);
    let payload = if args.aligned {
        m.param("input", "symbols").input(
            "symbols",
            &args.input,
            F32_FORMAT,
            input.len(),
            Some(SYMBOL_RATE_HZ),
        );
        disassemble_frames(&input, &layout)?
    } else {
        let rate = sample_rate(&pulse);
        m.param("input", "baseband")
            .param("sync_threshold", args.threshold)
            .input("baseband", &args.input, F32_FORMAT, input.len(), Some(rate));
        let sig = BasebandSignal::new(input, rate, pulse.sps())?;
        let sync = FrameSynchronizer::new(layout, pulse).with_threshold(args.threshold)?;
        let report = sync.process(&sig)?;
        log_events(&report);
        record_sync(&mut m, &report);
        report.frames.into_iter().flat_map(|f| f.payload).collect()
    };
    write_f32(&args.out, &payload)?;
    m.output("payload", &args.out, F32_FORMAT, payload.len(), None);
    m.write_for(manifest_path, &args.out)?;
    Ok(())
}

/// Recovered frames matched to transmitted ones, as (frame index, payload).
/// Lock position minus the delay, relative to the nearest frame start. The
/// first lock can land frames late when the early frames are faded.
fn frame_timing_error(position: f64, delay: f64) -> f64 {
    let frame = FRAME_SYMBOLS as f64;
    let d = (position - delay).rem_euclid(frame);
    if d > frame / 2.0 {
        d - frame
    } else {
        d
    }
}

fn match_frames(report: &SyncReport, delay: f64, frames: usize) -> Vec<(usize, &[f32])> {
    report
        .frames
        .iter()
        .filter_map(|f| {
            let rel = (f.position - delay) / FRAME_SYMBOLS as f64;
            let idx = rel.round();
            let aligned = (rel - idx).abs() * (FRAME_SYMBOLS as f64) < 0.5;
            (aligned && idx >= 0.0 && (idx as usize) < frames)
                .then_some((idx as usize, f.payload.as_slice()))
        })
        .collect()
}

pub fn run_loop(args: &ModemLoopArgs, manifest_path: Option<&Path>) -> Result<()> {
    if args.frames < 2 {
        return Err(fail(
            "invalid-argument",
            "need at least 2 frames to confirm a lock",
        ));
    }
    let link = args.link.resolve(Profile::Rade)?;
    let a = link.params.peak_amplitude();
    let (layout, pulse) = args.pulse.build(a)?;
    let sync =
        FrameSynchronizer::new(layout.clone(), pulse.clone()).with_threshold(args.threshold)?;
    let rate = sample_rate(&pulse);

    let payload_seed = trial_seed(args.seed, 0);
    let noise_seed = trial_seed(args.seed, 2);
    let requested = match args.delay {
        Some(d) => d,
        None => {
            let mut rng = noise::rng(trial_seed(args.seed, 1), 0);
            rng.random_range(0..FRAME_SYMBOLS) as f64 + rng.random_range(0.0..1.0)
        }
    };
    let payload = random_symbols(args.frames * PAYLOAD_SYMBOLS, a as f32, payload_seed);
    let tx = assemble_frames(&payload, &layout)?;
    let clean = modulate_delayed(&tx, SYMBOL_RATE_HZ, &pulse, requested)?;
    let delay = applied_delay(&pulse, requested);

    let mut m = Manifest::new("modem-loop");
    record_pulse(&mut m, &args.pulse, a);
    m.param("frames", args.frames as i64)
        .param("delay_symbols", requested)
        .param("sync_threshold", args.threshold)
        .seed("base", args.seed)
        .seed("payload", payload_seed)
        .seed("noise", noise_seed);

    let rx = match (args.snr_db, args.set_point) {
        (Some(snr), _) => {
            m.param("channel", "awgn").param("snr_db", snr);
            add_awgn(&clean, SnrDb::new(snr)?, a, noise_seed)
        }
        (None, Some(dbm)) => {
            m.link(&link).param("set_point_dbm", dbm);
            let fading = match args.channel.fading(rate, trial_seed(args.seed, 3))? {
                Some(cfg) => {
                    m.param("channel", "lmr").fading(&cfg);
                    ChannelFading::Envelope(generate_envelope(&cfg, clean.len())?)
                }
                None => {
                    m.param("channel", "awgn");
                    ChannelFading::Unity
                }
            };
            let run = ChannelRun {
                link: link.params,
                set_point: ReceivedPowerDbm::new(dbm)?,
                fading,
                noise_seed,
            };
            add_link_noise(&clean, &run)?
        }
        (None, None) => {
            m.param("channel", "none");
            clean
        }
    };

    let report = sync.process(&rx)?;
    log_events(&report);
    record_sync(&mut m, &report);

    let matched = match_frames(&report, delay, args.frames);
    let (mut err, mut pow) = (0.0, 0.0);
    for (idx, got) in &matched {
        let want = &payload[idx * PAYLOAD_SYMBOLS..(idx + 1) * PAYLOAD_SYMBOLS];
        for (g, w) in got.iter().zip(want) {
            err += ((g - w) as f64).powi(2);
            pow += (*w as f64).powi(2);
        }
    }
    let mut summary = vec![
        format!("frames_sent={}", args.frames),
        format!("frames_matched={}", matched.len()),
        format!("delay={delay:.4}"),
    ];
    m.result("applied_delay_symbols", delay)
        .result("frames_matched", matched.len() as i64);
    if report.first_lock.is_synced() {
        let timing_error = frame_timing_error(report.first_lock.position(), delay);
        summary.push(format!("first_lock={:.4}", report.first_lock.position()));
        summary.push(format!("timing_error={timing_error:.4}"));
        m.result("timing_error_symbols", timing_error);
    }
    if pow > 0.0 {
        let e = power_db(err / pow);
        summary.push(format!("payload_error_db={e:.2}"));
        m.result("payload_error_db", e);
    }
    println!("{}", summary.join(" "));

    match &args.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let got: Vec<f32> = report
                .frames
                .iter()
                .flat_map(|f| f.payload.iter().copied())
                .collect();
            let files = [
                ("payload_tx", "payload_tx.f32", payload.as_slice(), None),
                ("baseband_rx", "baseband_rx.f32", rx.samples(), Some(rate)),
                ("payload_rx", "payload_rx.f32", got.as_slice(), None),
            ];
            for (name, file, data, r) in files {
                let path = dir.join(file);
                write_f32(&path, data)?;
                m.output(name, Path::new(file), F32_FORMAT, data.len(), r);
            }
            let path = manifest_path
                .map(Path::to_path_buf)
                .unwrap_or_else(|| dir.join("manifest.toml"));
            m.write(&path)?;
        }
        None => {
            if let Some(p) = manifest_path {
                m.write(p)?;
            }
        }
    }
    Ok(())
}
