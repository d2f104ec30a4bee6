//! Reproducible random streams.
//!
//! Every trial owns a ChaCha8 stream identified by `(master_seed, index)`,
//! so results depend only on the seed and the trial count, never on how
//! trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// The `index`-th independent stream under `master_seed`.
pub fn trial_rng(master_seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
