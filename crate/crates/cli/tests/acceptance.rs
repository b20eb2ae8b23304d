//! Acceptance checks for the simulator, one PASS/FAIL line each.
//!
//! Runs as a plain binary so the lines are always printed; exits nonzero if
//! any check fails.

use std::fs;
use std::panic;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use bbfm::analog::{run_fm_baseline, FmBaselineConfig};
use bbfm::channel::{apply_channel_traced, ChannelRun, SymbolStream};
use bbfm::dsp::{occupied_bandwidth, welch_psd};
use bbfm::exec::Execution;
use bbfm::fading::{generate_taps, rayleigh_ks_statistic, FadingConfig};
use bbfm::frame::{FrameLayout, FrameSynchronizer, PulseShape};
use bbfm::link::{fm_gain_db, snr_db, threshold_dbm, FmLinkParams, ReceivedPowerDbm, SnrDb};
use bbfm::montecarlo::{
    acquisition, false_sync, measured_channel_snr, noiseless_loopback_db, random_symbols,
};
use bbfm::speech::synthetic_speech;

const PUBLISHED_GAIN_DB: f64 = 134.41;
const PUBLISHED_THRESHOLD_DBM: f64 = -122.41;

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn dbm(v: f64) -> ReceivedPowerDbm {
    ReceivedPowerDbm::new(v).unwrap()
}

/// Temperature that makes the analog FM gain equal the published value.
fn published_temperature(p: &FmLinkParams) -> f64 {
    let beta = p.modulation_index();
    let lin = 10f64.powf((PUBLISHED_GAIN_DB + p.noise_figure_db()) / 10.0);
    3.0 * beta * beta * p.mean_mod_power()
        / (1e3 * bbfm::link::BOLTZMANN * p.max_mod_freq_hz() * lin)
}

fn link_budget() -> Outcome {
    let p = FmLinkParams::analog_fm();
    let t0 = Instant::now();
    let g = fm_gain_db(&p);
    let th = threshold_dbm(&p).value();
    let elapsed = t0.elapsed();
    let gap = g - PUBLISHED_GAIN_DB;
    let t_pub = published_temperature(&p);
    let at_pub = fm_gain_db(&p.with_temperature_k(t_pub).unwrap());
    let pass = (g - PUBLISHED_GAIN_DB).abs() <= 0.25
        && (th - PUBLISHED_THRESHOLD_DBM).abs() <= 0.25
        && (0.2..0.24).contains(&gap)
        && (at_pub - PUBLISHED_GAIN_DB).abs() < 1e-9
        && elapsed < Duration::from_millis(1);
    outcome(
        pass,
        format!(
            "G_FM {g:.3} dB, T_dBm {th:.3} dBm (published {PUBLISHED_GAIN_DB} / {PUBLISHED_THRESHOLD_DBM}, ±0.25); \
             gap {gap:+.3} dB from T = {} K vs {t_pub:.2} K implied by the published gain; {:.1} µs",
            p.temperature_k(),
            elapsed.as_secs_f64() * 1e6
        ),
    )
}

fn piecewise_model() -> Outcome {
    let mut worst_hi: f64 = 0.0;
    let mut worst_lo: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    let h = 1e-3;
    for p in [FmLinkParams::analog_fm(), FmLinkParams::rade()] {
        let th = threshold_dbm(&p).value();
        let s = |r: f64| snr_db(&p, dbm(r), 0.0).value();
        for d in [0.5, 3.0, 20.0] {
            let hi = (s(th + d + h) - s(th + d - h)) / (2.0 * h);
            let lo = (s(th - d + h) - s(th - d - h)) / (2.0 * h);
            worst_hi = worst_hi.max((hi - 1.0).abs());
            worst_lo = worst_lo.max((lo - 3.0).abs());
        }
        let eps = 1e-12;
        let gap = (s(th + eps) - s(th - eps)).abs().max((s(th) - 12.0).abs());
        worst_gap = worst_gap.max(gap);
    }
    // exported curve at the published gain: slopes of 1 and 3 with the knee at −122.41 dBm / 12 dB
    let t = published_temperature(&FmLinkParams::analog_fm()).to_string();
    let csv = cli(&[
        "snr-curve",
        "--profile",
        "analog-fm",
        "--from",
        "-130.41",
        "--to",
        "-100.41",
        "--temperature-k",
        &t,
    ]);
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let (r, s) = l.split_once(',').unwrap();
            (r.parse().unwrap(), s.parse().unwrap())
        })
        .collect();
    let shape_ok = rows.len() == 61
        && rows.windows(2).all(|w| {
            let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let expect = if w[1].0 <= PUBLISHED_THRESHOLD_DBM + 1e-9 {
                3.0
            } else {
                1.0
            };
            (slope - expect).abs() < 1e-4
        })
        && rows
            .iter()
            .any(|&(r, s)| (r - PUBLISHED_THRESHOLD_DBM).abs() < 1e-9 && (s - 12.0).abs() < 1e-5);
    let pass = worst_hi <= 1e-6 && worst_lo <= 1e-6 && worst_gap <= 1e-9 && shape_ok;
    outcome(
        pass,
        format!(
            "slope errors {worst_hi:.1e} (above, 1) {worst_lo:.1e} (below, 3); breakpoint gap {worst_gap:.1e} dB; \
             exported curve {} rows, shape {}",
            rows.len(),
            if shape_ok { "ok" } else { "wrong" }
        ),
    )
}

fn channel_calibration() -> Outcome {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (i, sp) in [-130.0, -122.41, -110.0, -100.0].into_iter().enumerate() {
        let link = FmLinkParams::rade();
        let want = snr_db(&link, dbm(sp), 0.0).value();
        let run = ChannelRun::awgn(link, dbm(sp), 1000 + i as u64);
        let got = measured_channel_snr(&run, 100_000, 2000.0, Execution::default())
            .unwrap()
            .value();
        worst = worst.max((got - want).abs());
        parts.push(format!("{sp}: {got:.2}/{want:.2}"));
    }
    let elapsed = t0.elapsed();
    outcome(
        worst <= 0.2 && elapsed < Duration::from_secs(5),
        format!(
            "measured/requested SNR dB over 1e5 symbols [{}]; worst {worst:.3} dB (±0.2); {:.2} s",
            parts.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn fading_statistics() -> Outcome {
    let t0 = Instant::now();
    let rate = 2000.0;
    let cfg = FadingConfig::lmr60(rate, 2024);
    let taps = generate_taps(&cfg, 1_000_000).unwrap();
    let rot = cfg.delay_phasor();
    let mags: Vec<f32> = taps
        .g1
        .iter()
        .zip(&taps.g2)
        .map(|(a, b)| (a + rot * b).norm() as f32)
        .collect();
    let power = mags.iter().map(|&m| (m as f64).powi(2)).sum::<f64>() / mags.len() as f64;
    let ks = rayleigh_ks_statistic(&mags, 1.0);
    let b = cfg.doppler_spread_hz();
    let bw: Vec<f64> = [&taps.g1, &taps.g2]
        .iter()
        .map(|g| occupied_bandwidth(&welch_psd(g, 8192), rate, 0.99))
        .collect();
    let elapsed = t0.elapsed();
    let bw_ok = bw.iter().all(|&w| (w - b).abs() <= 0.1 * b);
    let pass =
        (0.98..=1.02).contains(&power) && ks < 0.01 && bw_ok && elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "lmr60 1e6 samples: E|H|² {power:.4} [0.98, 1.02], KS {ks:.4} (< 0.01), 99% bandwidth {:.1}/{:.1} Hz \
             (B = {b:.1} Hz ± 10%); {:.2} s",
            bw[0],
            bw[1],
            elapsed.as_secs_f64()
        ),
    )
}

fn analog_fm_baseline() -> Outcome {
    let speech = synthetic_speech(20.0, 1);
    let out = run_fm_baseline(&speech, &FmBaselineConfig::new(dbm(-118.0), 5)).unwrap();
    let r = out.report;
    let before = r.papr_before_compression_db.unwrap();
    let after = r.papr_after_compression_db.unwrap();
    let noise_err = 10.0 * (r.injected_noise_power / r.predicted_noise_power).log10();
    let pass = (before - 15.0).abs() <= 2.0
        && (after - 8.0).abs() <= 2.0
        && (r.mean_mod_power - 0.07).abs() <= 0.03
        && noise_err.abs() <= 0.5;
    outcome(
        pass,
        format!(
            "synthetic 20 s clip: PAPR {before:.2} dB before (15 ± 2), {after:.2} dB after (8 ± 2), x̄² {:.4} (0.07 ± 0.03), \
             noise {noise_err:+.3} dB vs prediction (±0.5)",
            r.mean_mod_power
        ),
    )
}

fn frame_modem() -> Outcome {
    let t0 = Instant::now();
    let sync = FrameSynchronizer::new(FrameLayout::default(), PulseShape::default());
    let fs = false_sync(&sync, 100, 100, 77, Execution::Parallel).unwrap();
    let acq = acquisition(
        &sync,
        SnrDb::new(12.0).unwrap(),
        100,
        78,
        Execution::Parallel,
    )
    .unwrap();
    let loopback = noiseless_loopback_db(20, 37.3, 79).unwrap();
    let elapsed = t0.elapsed();
    let pass = fs.rate_per_frame() < 1e-4
        && acq.acquired() >= 99
        && loopback <= -40.0
        && elapsed < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "false locks {}/{} frames (< 1e-4/frame), acquired {}/100 at 12 dB within 2 frames (≥ 99, timing RMS {:.4} sym), \
             loopback {loopback:.1} dB (≤ −40); {:.1} s",
            fs.false_locks,
            fs.frames,
            acq.acquired(),
            acq.timing_rms().unwrap_or(f64::NAN),
            elapsed.as_secs_f64()
        ),
    )
}

fn determinism() -> Outcome {
    let tmp = tempfile::TempDir::new().unwrap();
    let dirs = [tmp.path().join("a"), tmp.path().join("b")];
    for d in &dirs {
        cli(&["golden", "-q", "--out-dir", d.to_str().unwrap()]);
    }
    let mut files = 0;
    let mut diffs = Vec::new();
    for entry in walk(&dirs[0]) {
        let rel = entry.strip_prefix(&dirs[0]).unwrap();
        files += 1;
        if fs::read(&entry).unwrap() != fs::read(dirs[1].join(rel)).unwrap() {
            diffs.push(rel.display().to_string());
        }
    }
    // the parallel and sequential noise paths agree bit for bit
    let tx = SymbolStream::new(random_symbols(100_000, 1.0, 3), 2000.0).unwrap();
    let run = ChannelRun::awgn(FmLinkParams::rade(), dbm(-119.0), 4);
    let par = apply_channel_traced(&tx, &run, Execution::Parallel).unwrap();
    let seq = apply_channel_traced(&tx, &run, Execution::Sequential).unwrap();
    let modes_agree = par == seq;
    outcome(
        diffs.is_empty() && files > 0 && modes_agree,
        format!(
            "golden bundles regenerated: {files} files, {} differ; parallel vs sequential channel {}",
            diffs.len(),
            if modes_agree { "identical" } else { "DIFFERENT" }
        ),
    )
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

fn cli(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_bbfm-sim"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn main() -> ExitCode {
    let checks: [Check; 7] = [
        ("link-budget", link_budget),
        ("piecewise-snr", piecewise_model),
        ("channel-calibration", channel_calibration),
        ("fading-statistics", fading_statistics),
        ("analog-fm-baseline", analog_fm_baseline),
        ("frame-modem", frame_modem),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let result = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        checks.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
