//! Seeded generators. Every random draw in the crate goes through a
//! ChaCha8 stream keyed by `(seed, purpose)` so that independent consumers
//! never share state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Stream {
    TrainData = 1,
    TestData = 2,
    Init = 3,
    Shuffle = 4,
    Noise = 5,
}

pub(crate) fn stream(seed: u64, purpose: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}

/// Generator for one job inside a family (e.g. one sweep row).
pub(crate) fn substream(seed: u64, purpose: Stream, job: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&job.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(purpose as u64);
    rng
}
