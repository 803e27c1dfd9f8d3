//! Detecting learner confusion in forum posts from lexical features.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod lexicon;
pub mod models;
pub mod resample;
pub mod stats;
pub mod synth;
pub mod textproc;

pub use error::{Error, Result};

/// Independent sub-seed `stream` of `seed` (SplitMix64 finalizer), used
/// wherever work is split across threads so results do not depend on
/// scheduling.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
