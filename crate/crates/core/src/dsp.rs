//! Filter design and block DSP helpers shared by the simulators.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Zeroth-order modified Bessel function of the first kind (power series).
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Kaiser window shape parameter for a stopband attenuation in dB.
pub fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

/// Odd number of taps for a Kaiser design with `transition` given as a
/// fraction of the sample rate.
pub fn kaiser_len(atten_db: f64, transition: f64) -> usize {
    let n = ((atten_db - 7.95) / (14.36 * transition)).ceil() as usize + 1;
    n | 1
}

pub fn kaiser_window(len: usize, beta: f64) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = bessel_i0(beta);
    let m = (len - 1) as f64;
    (0..len)
        .map(|n| {
            let r = 2.0 * n as f64 / m - 1.0;
            bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / denom
        })
        .collect()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Windowed-sinc low-pass with cutoff `cutoff` (fraction of the sample rate,
/// -6 dB point) and unit DC gain. `len` must be odd.
pub fn lowpass(cutoff: f64, len: usize, beta: f64) -> Vec<f64> {
    assert!(len % 2 == 1, "linear-phase design needs an odd length");
    let mid = (len / 2) as f64;
    let w = kaiser_window(len, beta);
    let mut h: Vec<f64> = (0..len)
        .map(|n| 2.0 * cutoff * sinc(2.0 * cutoff * (n as f64 - mid)) * w[n])
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= dc);
    h
}

/// Linear-phase band-pass with passband `[pass_low, pass_high]` Hz, stopband
/// edges `transition_hz` outside the passband and `atten_db` of rejection.
pub fn bandpass(
    fs: f64,
    pass_low: f64,
    pass_high: f64,
    transition_hz: f64,
    atten_db: f64,
) -> Vec<f64> {
    let len = kaiser_len(atten_db, transition_hz / fs);
    let beta = kaiser_beta(atten_db);
    let f1 = (pass_low - transition_hz / 2.0) / fs;
    let f2 = (pass_high + transition_hz / 2.0) / fs;
    let mid = (len / 2) as f64;
    let w = kaiser_window(len, beta);
    (0..len)
        .map(|n| {
            let t = n as f64 - mid;
            (2.0 * f2 * sinc(2.0 * f2 * t) - 2.0 * f1 * sinc(2.0 * f1 * t)) * w[n]
        })
        .collect()
}

/// Magnitude response of real taps at frequency `f` (fraction of sample rate).
pub fn magnitude_response(taps: &[f64], f: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (n, &h) in taps.iter().enumerate() {
        let ph = -2.0 * PI * f * n as f64;
        re += h * ph.cos();
        im += h * ph.sin();
    }
    (re * re + im * im).sqrt()
}

/// Full linear convolution of complex data with real taps via FFT.
pub fn convolve_complex(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    if x.is_empty() || taps.is_empty() {
        return Vec::new();
    }
    let out_len = x.len() + taps.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut a: Vec<Complex64> = x.to_vec();
    a.resize(n, Complex64::new(0.0, 0.0));
    let mut b: Vec<Complex64> = taps.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    b.resize(n, Complex64::new(0.0, 0.0));
    fwd.process(&mut a);
    fwd.process(&mut b);
    let scale = 1.0 / n as f64;
    for (u, v) in a.iter_mut().zip(&b) {
        *u *= v * scale;
    }
    inv.process(&mut a);
    a.truncate(out_len);
    a
}

/// Full linear convolution of real data with real taps.
///
/// Short inputs are convolved directly, long ones via FFT.
pub fn convolve(x: &[f64], taps: &[f64]) -> Vec<f64> {
    if x.is_empty() || taps.is_empty() {
        return Vec::new();
    }
    if x.len().min(taps.len()) <= 32 {
        let mut out = vec![0.0; x.len() + taps.len() - 1];
        for (i, &xv) in x.iter().enumerate() {
            for (j, &h) in taps.iter().enumerate() {
                out[i + j] += xv * h;
            }
        }
        return out;
    }
    let cx: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    convolve_complex(&cx, taps)
        .into_iter()
        .map(|c| c.re)
        .collect()
}

/// Convolution aligned to remove the `(len - 1) / 2` sample delay of an
/// odd-length linear-phase filter; output has the same length as `x`.
pub fn filter_centered(x: &[f64], taps: &[f64]) -> Vec<f64> {
    debug_assert!(taps.len() % 2 == 1);
    let delay = taps.len() / 2;
    let full = convolve(x, taps);
    full[delay..delay + x.len()].to_vec()
}

/// Analytic signal `x + j·H{x}` computed with a block FFT.
pub fn analytic_signal(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    // keep DC and Nyquist, double positive frequencies, zero negative ones
    let half = n / 2;
    for (k, v) in buf.iter_mut().enumerate() {
        let gain = if k == 0 || (n.is_multiple_of(2) && k == half) {
            1.0
        } else if k <= (n - 1) / 2 {
            2.0
        } else {
            0.0
        };
        *v *= gain / n as f64;
    }
    inv.process(&mut buf);
    buf
}

/// Two-sided Welch power spectral density estimate (Hann window, 50 %
/// overlap), in FFT bin order. Units are power per bin, so the bins sum to
/// the mean power of `x`.
pub fn welch_psd(x: &[Complex64], segment: usize) -> Vec<f64> {
    assert!(segment >= 8 && x.len() >= segment);
    let window: Vec<f64> = (0..segment)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / segment as f64).cos())
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(segment);
    let mut psd = vec![0.0; segment];
    let mut buf = vec![Complex64::new(0.0, 0.0); segment];
    let mut start = 0;
    while start + segment <= x.len() {
        for (b, (&v, &w)) in buf
            .iter_mut()
            .zip(x[start..start + segment].iter().zip(&window))
        {
            *b = v * w;
        }
        fft.process(&mut buf);
        for (p, b) in psd.iter_mut().zip(&buf) {
            *p += b.norm_sqr();
        }
        start += segment / 2;
    }
    let total: f64 = psd.iter().sum();
    let mean_power = x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64;
    if total > 0.0 {
        psd.iter_mut().for_each(|p| *p *= mean_power / total);
    }
    psd
}

/// Welch PSD of a real signal.
pub fn welch_psd_real(x: &[f64], segment: usize) -> Vec<f64> {
    let cx: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    welch_psd(&cx, segment)
}

/// Signed frequency of FFT bin `k` for an `n`-point transform at rate `fs`.
pub fn bin_frequency(k: usize, n: usize, fs: f64) -> f64 {
    let k = if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    };
    k * fs / n as f64
}

/// Smallest half-width `f` such that the bins within `[-f, f]` hold at least
/// `fraction` of the total power.
pub fn occupied_bandwidth(psd: &[f64], fs: f64, fraction: f64) -> f64 {
    let n = psd.len();
    let total: f64 = psd.iter().sum();
    let mut acc = psd[0];
    if acc >= fraction * total {
        return 0.0;
    }
    for k in 1..=n / 2 {
        let prev = acc;
        acc += psd[k];
        if n - k != k {
            acc += psd[n - k];
        }
        if acc >= fraction * total {
            // linear interpolation inside the last bin pair
            let df = fs / n as f64;
            let t = (fraction * total - prev) / (acc - prev);
            return (k as f64 - 1.0 + t) * df + df / 2.0;
        }
    }
    fs / 2.0
}

/// Power in `[lo, hi]` Hz (absolute frequency, both signs) from a two-sided PSD.
pub fn band_power(psd: &[f64], fs: f64, lo: f64, hi: f64) -> f64 {
    let n = psd.len();
    psd.iter()
        .enumerate()
        .filter(|(k, _)| {
            let f = bin_frequency(*k, n, fs).abs();
            f >= lo && f <= hi
        })
        .map(|(_, p)| p)
        .sum()
}

/// Polyphase windowed-sinc interpolator for evaluating a band-limited sequence
/// between its samples.
#[derive(Debug, Clone)]
pub struct FractionalInterpolator {
    phases: usize,
    half_taps: usize,
    bank: Vec<Vec<f64>>,
}

impl FractionalInterpolator {
    /// `half_taps` samples are used on each side of the interpolation point;
    /// the fractional position is quantised to `1 / phases` of a sample.
    pub fn new(half_taps: usize, phases: usize) -> Self {
        let len = 2 * half_taps;
        let beta = kaiser_beta(70.0);
        let bank = (0..=phases)
            .map(|p| {
                let frac = p as f64 / phases as f64;
                let mut taps: Vec<f64> = (0..len)
                    .map(|i| {
                        // tap i sits at integer offset i - half_taps + 1 from the base sample
                        let t = i as f64 - half_taps as f64 + 1.0 - frac;
                        let r = t / (half_taps as f64 + 0.5);
                        let w = bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / bessel_i0(beta);
                        sinc(t) * w
                    })
                    .collect();
                let s: f64 = taps.iter().sum();
                taps.iter_mut().for_each(|v| *v /= s);
                taps
            })
            .collect();
        Self {
            phases,
            half_taps,
            bank,
        }
    }

    /// Value of `x` at fractional index `pos`; zero outside the data.
    pub fn at(&self, x: &[f64], pos: f64) -> f64 {
        let base = pos.floor();
        let frac = pos - base;
        let p = (frac * self.phases as f64).round() as usize;
        let (base, p) = if p == self.phases {
            (base as i64 + 1, 0)
        } else {
            (base as i64, p)
        };
        let taps = &self.bank[p];
        let start = base - self.half_taps as i64 + 1;
        let mut acc = 0.0;
        for (i, &h) in taps.iter().enumerate() {
            let idx = start + i as i64;
            if idx >= 0 && (idx as usize) < x.len() {
                acc += h * x[idx as usize];
            }
        }
        acc
    }
}
