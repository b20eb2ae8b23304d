use bbfm::channel::{apply_channel, measure_snr, ChannelRun, SymbolStream};
use bbfm::dsp::{occupied_bandwidth, welch_psd};
use bbfm::exec::Execution;
use bbfm::fading::{generate_envelope, generate_taps, rayleigh_ks_statistic, FadingConfig};
use bbfm::frame::{
    add_link_noise, assemble_frames, modulate_delayed, FrameLayout, FrameSynchronizer, PulseShape,
    SYMBOL_RATE_HZ,
};
use bbfm::golden::{generate_golden, GoldenSpec};
use bbfm::link::{snr_db, FmLinkParams, ReceivedPowerDbm};
use bbfm::montecarlo::{measured_channel_snr, random_symbols};

fn dbm(v: f64) -> ReceivedPowerDbm {
    ReceivedPowerDbm::new(v).unwrap()
}

#[test]
fn lmr60_envelope_statistics() {
    let cfg = FadingConfig::lmr60(2000.0, 31);
    let taps = generate_taps(&cfg, 200_000).unwrap();
    let env = generate_envelope(&cfg, 200_000).unwrap();
    let m = env.magnitudes();
    let p = m.iter().map(|&v| (v as f64).powi(2)).sum::<f64>() / m.len() as f64;
    assert!((p - 1.0).abs() < 0.05, "{p}");
    assert!(rayleigh_ks_statistic(m, 1.0) < 0.03);
    let bw = occupied_bandwidth(&welch_psd(&taps.g1, 4096), 2000.0, 0.99);
    assert!((bw - 50.0).abs() < 5.0, "{bw}");
}

#[test]
fn doppler_scales_with_speed() {
    let rate = 2000.0;
    let bw = |kmh: f64| {
        let taps = generate_taps(&FadingConfig::lmr(kmh, 200.0, rate, 8), 200_000).unwrap();
        occupied_bandwidth(&welch_psd(&taps.g2, 4096), rate, 0.99)
    };
    let (b30, b120) = (bw(30.0), bw(120.0));
    assert!((b120 / b30 - 4.0).abs() < 0.4, "{b30} {b120}");
}

#[test]
fn awgn_calibration_on_both_profiles() {
    for link in [FmLinkParams::analog_fm(), FmLinkParams::rade()] {
        for sp in [-128.0, -121.0, -105.0] {
            let run = ChannelRun::awgn(link, dbm(sp), 5);
            let got = measured_channel_snr(&run, 50_000, 2000.0, Execution::default())
                .unwrap()
                .value();
            let want = snr_db(&link, dbm(sp), 0.0).value();
            assert!((got - want).abs() < 0.2, "{sp}: {got} vs {want}");
        }
    }
}

#[test]
fn fading_lowers_average_snr() {
    let link = FmLinkParams::rade();
    let n = 40_000;
    let tx = SymbolStream::new(random_symbols(n, 1.0, 2), 2000.0).unwrap();
    let env = generate_envelope(&FadingConfig::lmr60(2000.0, 4), n).unwrap();
    let faded = apply_channel(&tx, &ChannelRun::faded(link, dbm(-100.0), env, 6)).unwrap();
    let flat = apply_channel(&tx, &ChannelRun::awgn(link, dbm(-100.0), 6)).unwrap();
    let s_faded = measure_snr(&tx, &faded, 1.0).unwrap().value();
    let s_flat = measure_snr(&tx, &flat, 1.0).unwrap().value();
    assert!(s_faded < s_flat - 3.0, "{s_faded} {s_flat}");
}

#[test]
fn golden_reference_set_regenerates() {
    for spec in GoldenSpec::reference_set() {
        assert_eq!(
            generate_golden(&spec).unwrap(),
            generate_golden(&spec).unwrap()
        );
    }
}

#[test]
fn modem_syncs_through_a_strong_faded_link() {
    let layout = FrameLayout::default();
    let pulse = PulseShape::default();
    let frames = 12;
    let payload = random_symbols(frames * 80, 1.0, 9);
    let tx = assemble_frames(&payload, &layout).unwrap();
    let clean = modulate_delayed(&tx, SYMBOL_RATE_HZ, &pulse, 55.5).unwrap();
    let env = generate_envelope(
        &FadingConfig::lmr60(clean.sample_rate_hz(), 10),
        clean.len(),
    )
    .unwrap();
    let run = ChannelRun::faded(FmLinkParams::rade(), dbm(-80.0), env, 11);
    let rx = add_link_noise(&clean, &run).unwrap();
    let report = FrameSynchronizer::new(layout, pulse).process(&rx).unwrap();
    assert!(report.first_lock.is_synced());
    assert!((report.first_lock.position() - 55.5).abs() < 0.1);
    assert!(report.frames.len() >= frames - 2);
}
