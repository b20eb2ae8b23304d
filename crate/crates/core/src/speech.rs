//! Sampled mono speech, level measurements and a synthetic test talker.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::{noise, power_db, Error, Result};

/// Sample rate of the analog FM chain.
pub const SPEECH_RATE_HZ: f64 = 8000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SpeechBuffer {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl SpeechBuffer {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::invalid("sample_rate_hz", "must be > 0"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn peak(&self) -> f64 {
        peak(&self.samples)
    }
}

pub(crate) fn peak(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub(crate) fn mean_square(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
    }
}

/// Peak-to-average power ratio, 10·log10(max s² / mean s²).
pub fn measure_papr_db(speech: &SpeechBuffer) -> Result<f64> {
    papr_db(speech.samples())
}

pub(crate) fn papr_db(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Empty);
    }
    let mean = mean_square(x);
    if mean == 0.0 {
        return Err(Error::Silent);
    }
    let p = peak(x);
    Ok(power_db(p * p / mean))
}

/// Mean power x̄² (mean of squared samples).
pub fn measure_mean_power(speech: &SpeechBuffer) -> Result<f64> {
    if speech.is_empty() {
        return Err(Error::Empty);
    }
    Ok(mean_square(speech.samples()))
}

/// Scales `x` so its peak magnitude is `peak_amplitude`; silence is left alone.
/// Returns the applied gain.
pub(crate) fn gain_control(x: &mut [f64], peak_amplitude: f64) -> f64 {
    let p = peak(x);
    if p == 0.0 {
        return 1.0;
    }
    let g = peak_amplitude / p;
    x.iter_mut().for_each(|v| *v *= g);
    g
}

/// Returns a copy of `speech` scaled so its peak equals `peak_amplitude`.
pub fn normalize_peak(speech: &SpeechBuffer, peak_amplitude: f64) -> SpeechBuffer {
    let mut samples = speech.samples.clone();
    gain_control(&mut samples, peak_amplitude);
    SpeechBuffer {
        samples,
        sample_rate_hz: speech.sample_rate_hz,
    }
}

// Vowel formant targets (F1, F2, F3) in Hz with bandwidths.
const VOWELS: [[f64; 3]; 6] = [
    [730.0, 1090.0, 2440.0], // a
    [530.0, 1840.0, 2480.0], // e
    [270.0, 2290.0, 3010.0], // i
    [570.0, 840.0, 2410.0],  // o
    [300.0, 870.0, 2240.0],  // u
    [660.0, 1720.0, 2410.0], // ae
];
const FORMANT_BW: [f64; 3] = [80.0, 100.0, 140.0];
const STRESS_RANGE_DB: f64 = 6.0;
/// Brings the differentiated flow to roughly the level of a unit impulse train.
const SOURCE_GAIN: f64 = 4.0;

/// Glottal flow over one pitch period, `phase` in `[0, 1)`: raised-cosine
/// opening over 40 % of the period, quarter-cosine closing over 16 %.
fn rosenberg(phase: f64) -> f64 {
    const OPEN: f64 = 0.4;
    const CLOSE: f64 = 0.16;
    if phase < OPEN {
        0.5 * (1.0 - (PI * phase / OPEN).cos())
    } else if phase < OPEN + CLOSE {
        (0.5 * PI * (phase - OPEN) / CLOSE).cos()
    } else {
        0.0
    }
}

/// Two-pole resonator with unit gain at DC.
struct Resonator {
    a1: f64,
    a2: f64,
    g: f64,
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn new() -> Self {
        Self {
            a1: 0.0,
            a2: 0.0,
            g: 1.0,
            y1: 0.0,
            y2: 0.0,
        }
    }

    fn tune(&mut self, freq: f64, bw: f64, fs: f64) {
        let r = (-PI * bw / fs).exp();
        self.a1 = 2.0 * r * (2.0 * PI * freq / fs).cos();
        self.a2 = -r * r;
        self.g = 1.0 - self.a1 - self.a2;
    }

    fn step(&mut self, x: f64) -> f64 {
        let y = self.g * x + self.a1 * self.y1 + self.a2 * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

/// Appends `x` scaled to an RMS of `rms`.
fn push_at_rms(out: &mut Vec<f64>, x: &[f64], rms: f64) {
    let m = mean_square(x);
    let g = if m > 0.0 { rms / m.sqrt() } else { 0.0 };
    out.extend(x.iter().map(|v| v * g));
}

/// A deterministic speech-like test signal at 8 kHz.
///
/// Source-filter synthesis: a Rosenberg glottal flow pulse train,
/// differentiated for lip radiation, with a falling, jittered pitch contour
/// drives three formant resonators that glide between vowel targets. Syllables have their own stress level and attack/decay envelope;
/// some start with a fricative noise burst, and phrases are separated by
/// pauses with a faint noise floor. Two talkers (low and high pitch) alternate
/// by phrase.
pub fn synthetic_speech(seconds: f64, seed: u64) -> SpeechBuffer {
    let fs = SPEECH_RATE_HZ;
    let total = (seconds * fs).round() as usize;
    let mut rng = noise::rng(seed, 0);
    let mut out = Vec::with_capacity(total);
    let mut formants = [Resonator::new(), Resonator::new(), Resonator::new()];
    let mut fric = [Resonator::new(), Resonator::new()];
    let mut phase = 0.0f64;
    let mut last_flow = 0.0f64;
    let mut phrase = 0usize;

    while out.len() < total {
        let base_f0 = if phrase.is_multiple_of(2) {
            115.0
        } else {
            205.0
        };
        let syllables = rng.random_range(3..8);
        for s in 0..syllables {
            let dur = rng.random_range(0.14..0.32);
            let n = (dur * fs) as usize;
            let stress_db: f64 = rng.random_range(-STRESS_RANGE_DB..0.0);
            let level = 10f64.powf(stress_db / 20.0);
            let v0 = VOWELS[rng.random_range(0..VOWELS.len())];
            let v1 = VOWELS[rng.random_range(0..VOWELS.len())];
            // pitch falls across the phrase
            let f0_start = base_f0 * (1.15 - 0.25 * s as f64 / syllables as f64);

            if rng.random_bool(0.4) {
                let fn_ = (rng.random_range(0.05..0.11) * fs) as usize;
                fric[0].tune(rng.random_range(2400.0..3600.0), 900.0, fs);
                fric[1].tune(rng.random_range(1800.0..3200.0), 1200.0, fs);
                let flevel = level * rng.random_range(0.1..0.3);
                let burst: Vec<f64> = (0..fn_)
                    .map(|i| {
                        let env = (PI * i as f64 / fn_ as f64).sin();
                        let w: f64 = rng.sample(StandardNormal);
                        let y0 = fric[0].step(w);
                        env * fric[1].step(y0)
                    })
                    .collect();
                push_at_rms(&mut out, &burst, flevel);
            }

            let mut voiced = Vec::with_capacity(n);
            for i in 0..n {
                let t = i as f64 / n as f64;
                for (k, r) in formants.iter_mut().enumerate() {
                    let f = v0[k] + (v1[k] - v0[k]) * t;
                    r.tune(f, FORMANT_BW[k], fs);
                }
                let jitter: f64 = 1.0 + 0.01 * rng.sample::<f64, _>(StandardNormal);
                let f0 = f0_start * (1.0 - 0.1 * t) * jitter;
                phase += f0 / fs;
                if phase >= 1.0 {
                    phase -= 1.0;
                }
                let flow = rosenberg(phase);
                let source = (flow - last_flow) * SOURCE_GAIN;
                last_flow = flow;
                let breath: f64 = 0.02 * rng.sample::<f64, _>(StandardNormal);
                let attack = (t / 0.12).min(1.0);
                let decay = ((1.0 - t) / 0.35).min(1.0);
                let env = attack * decay.powf(1.5);
                let mut y = source + breath;
                for r in formants.iter_mut() {
                    y = r.step(y);
                }
                voiced.push(env * y);
            }
            // resonator gain varies a lot with the vowel, so set loudness by stress alone
            push_at_rms(&mut out, &voiced, level);
            let gap = (rng.random_range(0.01..0.04) * fs) as usize;
            out.extend((0..gap).map(|_| 1e-3 * rng.sample::<f64, _>(StandardNormal)));
        }
        let pause = (rng.random_range(0.15..0.35) * fs) as usize;
        out.extend((0..pause).map(|_| 1e-3 * rng.sample::<f64, _>(StandardNormal)));
        phrase += 1;
    }
    out.truncate(total);
    // remove DC from the resonators' low-frequency gain
    let mean = out.iter().sum::<f64>() / out.len() as f64;
    out.iter_mut().for_each(|v| *v -= mean);
    let mut buf = SpeechBuffer::new(out, fs).expect("synthesised samples are finite");
    gain_control(&mut buf.samples, 0.9);
    buf
}
