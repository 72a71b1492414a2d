//! Seeded random streams.
//!
//! Every (replication, stream) pair owns an independent ChaCha8 stream
//! derived from the run seed, so replications can be scheduled in any order
//! and still reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named sub-streams of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    Buy = 0,
    Sell = 1,
    Meta = 2,
    Variance = 3,
    Auxiliary = 4,
}

const STREAMS_PER_REPLICATION: u64 = 8;

pub fn stream_rng(seed: u64, replication: u64, kind: StreamKind) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication * STREAMS_PER_REPLICATION + kind as u64);
    rng
}

/// Uniform draw on `(0, 1]`, safe for `ln` and negative powers.
pub fn open_uniform<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}
