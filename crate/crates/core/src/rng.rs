//! Counter-based random streams.
//!
//! Replication `r` of an experiment seeded with `seed` always reads from
//! ChaCha stream `r` keyed by `seed`, so results do not depend on which
//! worker runs which replication.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
