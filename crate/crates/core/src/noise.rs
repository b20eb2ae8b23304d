//! Seeded Gaussian noise.
//!
//! All randomness in the crate comes from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64(seed)` and split into independent word streams with
//! `set_stream`. Normal variates use `rand_distr::StandardNormal` (ziggurat).
//!
//! Long noise sequences are cut into blocks of [`NOISE_BLOCK`] samples; block
//! `b` of a sequence draws from stream `b` of its seed. This makes the noise
//! at every index independent of how the work is split across threads, so
//! parallel and sequential runs are bit-identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Samples per independently seeded noise block.
pub const NOISE_BLOCK: usize = 4096;

/// Generator for `stream` of `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a trial index into a base seed, for Monte Carlo trials that each need
/// their own family of streams.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = base ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fills `out` with N(0,1) draws for block `block` of `seed`.
pub fn fill_block(seed: u64, block: u64, out: &mut [f32]) {
    debug_assert!(out.len() <= NOISE_BLOCK);
    let mut rng = rng(seed, block);
    for v in out.iter_mut() {
        *v = rng.sample::<f64, _>(StandardNormal) as f32;
    }
}

/// `len` N(0,1) draws for `seed`, identical to concatenating [`fill_block`]
/// over consecutive blocks.
pub fn standard_normal(seed: u64, len: usize) -> Vec<f32> {
    let mut out = vec![0.0f32; len];
    for (b, chunk) in out.chunks_mut(NOISE_BLOCK).enumerate() {
        fill_block(seed, b as u64, chunk);
    }
    out
}

/// Circularly-symmetric complex Gaussian draws with E|g|² = `power`.
pub fn complex_normal(rng: &mut ChaCha8Rng, len: usize, power: f64) -> Vec<num_complex::Complex64> {
    let scale = (power / 2.0).sqrt();
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            num_complex::Complex64::new(re * scale, im * scale)
        })
        .collect()
}
