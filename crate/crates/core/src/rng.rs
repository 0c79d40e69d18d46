//! Seeded random streams.
//!
//! Every stochastic component draws from a ChaCha8 generator keyed by a user
//! seed and a stream index (tree index, boosting round, ...), so a given tree
//! or round sees the same numbers no matter how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
