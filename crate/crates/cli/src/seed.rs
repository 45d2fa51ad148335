//! Stateless seed derivation.
//!
//! `derive_trial_seed(master, trial, point) = mix(master + mix(point << 32 | trial))`
//! where `mix` is the splitmix64 finalizer. `mix` is a bijection on `u64`, so for
//! trial and point indices below 2^32 distinct `(trial, point)` pairs under one
//! master never collide.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 output function (bijective).
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_trial_seed(master: u64, trial: u32, point: u32) -> u64 {
    let index = (u64::from(point) << 32) | u64::from(trial);
    mix(master.wrapping_add(mix(index)))
}

/// Independent sub-streams of one trial seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Code = 1,
    Noise = 2,
    Scene = 3,
    Speckle = 4,
    BaselineNoise = 5,
}

pub fn substream(trial_seed: u64, stream: Stream) -> u64 {
    mix(trial_seed ^ (stream as u64).wrapping_mul(GOLDEN))
}
