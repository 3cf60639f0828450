use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent, reproducible stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream ids reserved for the top-level stages of a run.
pub(crate) mod streams {
    pub const GOAL_SAMPLING: u64 = 1;
    pub const NSGA2: u64 = 2;
    pub const SYNTH: u64 = 3;
    /// Subset `s` of a pairwise run uses stream `PAIRWISE_BASE + s`.
    pub const PAIRWISE_BASE: u64 = 100;
    /// Opponent sampling uses `OPPONENT_SEED_SALT ^ seed` with one stream per candidate.
    pub const OPPONENT_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
}
