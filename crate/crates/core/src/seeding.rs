//! Deterministic random streams.
//!
//! Every stochastic stage draws from its own ChaCha stream derived from a
//! single 64-bit seed, so changing how much randomness one stage consumes
//! never shifts another stage's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    TrainTestSplit = 1,
    LabelMask = 2,
    UnlabeledPool = 3,
    Clustering = 4,
    Synthetic = 5,
}

pub fn stage_rng(seed: u64, stage: Stage) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stage as u64);
    rng
}
