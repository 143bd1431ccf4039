use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// ChaCha8 stream that serializes as `(seed, word position)`, so
/// checkpoints can resume the exact random sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "RngState", into = "RngState")]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

#[derive(Serialize, Deserialize)]
struct RngState {
    seed: u64,
    word_pos_hi: u64,
    word_pos_lo: u64,
}

impl From<RngState> for SeededRng {
    fn from(s: RngState) -> Self {
        let mut rng = SeededRng::new(s.seed);
        rng.inner
            .set_word_pos(((s.word_pos_hi as u128) << 64) | s.word_pos_lo as u128);
        rng
    }
}

impl From<SeededRng> for RngState {
    fn from(r: SeededRng) -> Self {
        let pos = r.inner.get_word_pos();
        RngState {
            seed: r.seed,
            word_pos_hi: (pos >> 64) as u64,
            word_pos_lo: pos as u64,
        }
    }
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for a labelled sub-task.
    pub fn derive(seed: u64, stream: u64) -> Self {
        Self::new(seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(17))
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
