//! Keyed random streams.
//!
//! Every stream is a ChaCha8 generator seeded by the master seed and placed on
//! a stream id derived from `(replica, label)`. ChaCha is counter based, so new
//! labels never shift the output of existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Stream identifier for `(replica, label)`.
pub fn stream_id(replica: u64, label: &str) -> u64 {
    splitmix64(fnv1a(label) ^ splitmix64(replica))
}

/// Independent generator for `(seed, replica, label)`.
pub fn stream(seed: u64, replica: u64, label: &str) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(replica, label));
    rng
}

/// Master seed of replica `replica`, drawn from its own keyed stream.
pub fn replica_seed(seed: u64, replica: u64) -> u64 {
    use rand::RngCore;
    stream(seed, replica, "replica").next_u64()
}
