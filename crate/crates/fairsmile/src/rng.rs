//! Counter-derived random substreams.
//!
//! Every parallel workload (paths, bootstrap resamples) draws from a stream
//! keyed by `(seed, index)`. ChaCha streams with the same key and different
//! stream ids are independent, so results do not depend on how work is split
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for the `index`-th independent substream of `seed`.
pub(crate) fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
