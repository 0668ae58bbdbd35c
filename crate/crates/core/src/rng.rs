//! Reproducible random streams.
//!
//! Everything random in the crate is drawn from ChaCha8, a counter-based
//! generator: a `(key, stream, word position)` triple addresses every output
//! word directly. Keys come from the run seed; streams and positions encode
//! what is being sampled, so a value never depends on evaluation order or on
//! which worker produced it.
//!
//! Stream layout:
//! * replica seeds: `derive_seed(base_seed, replica)` (SplitMix64 finalizer);
//! * lattice white noise for octave layer `n`, row `i`: stream
//!   `n << 58 | (i + 2^57) mod 2^58`; the aligned chunk of nodes
//!   `16 c .. 16 c + 16` is drawn by the ziggurat method from the 64-bit
//!   words starting at `64 (c + 2^56)` (about 16 are used, 64 reserved);
//! * dense vectors (exact backend): stream [`DENSE_STREAM`], from word 0.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Stream reserved for sequential draws.
pub const DENSE_STREAM: u64 = u64::MAX;

const ROW_OFFSET: i64 = 1 << 57;
const CHUNK: usize = 16;
const CHUNK_WORDS: i128 = 64;
const CHUNK_OFFSET: i128 = 1 << 56;

/// SplitMix64 finalizer applied to `base ^ golden * (index + 1)`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sequential standard normals for a seed.
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(DENSE_STREAM);
        Self { rng }
    }

    pub fn next_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// Addressable white noise on the integer lattice of each octave layer.
#[derive(Clone)]
pub struct LatticeNoise {
    rng: ChaCha8Rng,
}

impl LatticeNoise {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Fill `out` with the noise at nodes `(row, col0), (row, col0 + 1), ...`
    /// of `layer`.
    pub fn fill_row(&mut self, layer: u32, row: i64, col0: i64, out: &mut [f64]) {
        debug_assert!(layer < 64);
        let stream = ((layer as u64) << 58) | ((row.wrapping_add(ROW_OFFSET)) as u64 & ((1 << 58) - 1));
        self.rng.set_stream(stream);
        let mut chunk = [0.0; CHUNK];
        let mut col = col0;
        let mut rest = out;
        while !rest.is_empty() {
            let c = col.div_euclid(CHUNK as i64);
            self.fill_chunk(c, &mut chunk);
            let skip = (col - c * CHUNK as i64) as usize;
            let take = (CHUNK - skip).min(rest.len());
            rest[..take].copy_from_slice(&chunk[skip..skip + take]);
            rest = &mut rest[take..];
            col += take as i64;
        }
    }

    fn fill_chunk(&mut self, c: i64, out: &mut [f64; CHUNK]) {
        // 2 u32 words per u64
        self.rng.set_word_pos((2 * CHUNK_WORDS * (c as i128 + CHUNK_OFFSET)) as u128);
        for v in out.iter_mut() {
            *v = self.rng.sample(StandardNormal);
        }
    }

    pub fn at(&mut self, layer: u32, row: i64, col: i64) -> f64 {
        let mut v = [0.0];
        self.fill_row(layer, row, col, &mut v);
        v[0]
    }
}
