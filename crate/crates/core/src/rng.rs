use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream `stream` under `seed`. Streams never overlap, so work
/// items can draw from their own stream on any thread.
pub(crate) fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream for a (major, minor) pair of indices, e.g. (feature, repeat).
pub(crate) fn stream2(seed: u64, major: u64, minor: u64) -> ChaCha8Rng {
    stream(seed, (major << 32) ^ minor)
}
