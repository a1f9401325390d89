//! Seeded random streams.
//!
//! Every randomized operation takes an explicit `u64` seed. Independent
//! consumers of the same seed draw from separate ChaCha streams so that
//! adding draws to one never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers. Fixed values: changing one changes every result
/// derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    SyntheticCoefficients = 1,
    SyntheticInputs = 2,
    Split = 3,
    DenseInit = 4,
    CircuitInit = 5,
    Shuffle = 6,
    Gradcheck = 7,
}

pub fn stream(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
