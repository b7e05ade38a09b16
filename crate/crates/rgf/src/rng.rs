//! Deterministic, portable random number generation.
//!
//! All randomness in this crate (synthetic data, fold shuffling, benchmark
//! seeds) flows through [`Rng`], a `xoshiro256**` generator seeded from a
//! single `u64` via `splitmix64`. Both algorithms are public-domain
//! reference designs with exact bit-level specifications, so any stream
//! drawn here can be reproduced in another language from the seed alone:
//!
//! * seeding: four iterations of `splitmix64` starting from the seed fill
//!   the 256-bit state;
//! * `next_u64`: `xoshiro256**` as specified by Blackman & Vigna;
//! * `uniform`: the top 53 bits scaled by 2^-53, giving a double in `[0, 1)`;
//! * `normal`: Box–Muller, `sqrt(-2 ln(1-u1)) * cos(2*pi*u2)`, consuming
//!   exactly two uniforms per draw (the sine branch is discarded);
//! * `below(n)`: Lemire's multiply-shift `(x * n) >> 64` (bias below
//!   `n / 2^64`, irrelevant at the scales used here).
//!
//! Training itself never draws random numbers; identical seeds therefore
//! yield byte-identical datasets, folds and models.

const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One step of `splitmix64`; used for seeding and for deriving sub-seeds.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(SPLITMIX_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent seed from a base seed and a stream index.
///
/// Used to give each benchmark cell / fold its own generator without any
/// coupling between streams.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut s = base ^ stream.wrapping_mul(SPLITMIX_GAMMA);
    splitmix64(&mut s)
}

/// `xoshiro256**` generator. See module docs for the exact specification.
#[derive(Clone, Debug)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform double in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller (two uniforms consumed per draw).
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Uniform integer in `[0, n)`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
