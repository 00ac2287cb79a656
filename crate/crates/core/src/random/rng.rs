use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Key of one independent random stream.
///
/// Monte-Carlo sample `i` of a run seeded with `master_seed` draws from
/// `RngSpec::new(master_seed, i)`, so results do not depend on how samples
/// are scheduled across threads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { master_seed, stream_index }
    }

    /// The same master seed on another stream.
    pub fn stream(&self, stream_index: u64) -> Self {
        Self { master_seed: self.master_seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}
