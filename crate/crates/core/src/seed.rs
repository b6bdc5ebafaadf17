//! Counter-based sub-seed derivation.
//!
//! Every random stage of a trial draws from its own stream keyed by
//! `(master seed, L, trial, stage)`, so adding schemes or changing the SNR list
//! never perturbs the channel or noise draws of another trial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stages of a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stage {
    Channel = 1,
    Switches = 2,
    Noise = 3,
    RandomPilots = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into a single well-mixed seed.
pub fn derive(master: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(splitmix64(master), |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

/// Seed of the trial itself, independent of stage.
pub fn trial_seed(master: u64, l_paths: usize, trial: usize) -> u64 {
    derive(master, &[l_paths as u64, trial as u64])
}

pub fn stage_rng(master: u64, l_paths: usize, trial: usize, stage: Stage) -> ChaCha8Rng {
    let s = derive(trial_seed(master, l_paths, trial), &[stage as u64]);
    ChaCha8Rng::seed_from_u64(s)
}
