//! Named random streams derived from a single 64-bit seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Parameter initialisation, one stream per `init_type`.
    Init(u8),
    Sampling,
    Telegate,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Init(kind) => 0x100 + u64::from(kind),
            Stream::Sampling => 0x200,
            Stream::Telegate => 0x300,
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// A derived 64-bit seed for APIs that take a plain seed.
pub fn stream_seed(seed: u64, stream: Stream) -> u64 {
    rand::Rng::gen(&mut stream_rng(seed, stream))
}
