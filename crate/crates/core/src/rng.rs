//! Seeded random streams. Every stochastic component draws from a ChaCha8
//! stream keyed by `(seed, stream)` so distinct consumers never share state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub mod streams {
    pub const SCENARIO: u64 = 1;
    pub const INIT: u64 = 2;
    pub const EXPLORATION: u64 = 3;
    pub const REPLAY: u64 = 4;
    pub const IMITATION: u64 = 5;
    pub const EPISODES: u64 = 6;
}

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `count` indices into a collection of `len` items: without replacement when
/// `len >= count`, with replacement otherwise.
pub fn sample_indices(rng: &mut Rng, len: usize, count: usize) -> alloc::vec::Vec<usize> {
    use rand::Rng as _;
    assert!(len > 0, "cannot sample from an empty collection");
    if len >= count {
        rand::seq::index::sample(rng, len, count).into_vec()
    } else {
        (0..count).map(|_| rng.gen_range(0..len)).collect()
    }
}
