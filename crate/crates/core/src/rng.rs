//! Seeded random streams.
//!
//! Uniforms come from ChaCha20 (`rand_chacha`), a counter-based generator
//! whose output for a given `u64` seed is fixed across platforms. Normal
//! variates use the cosine branch of Box–Muller on two consecutive draws:
//!
//! ```text
//! u1 = ((w1 >> 11) + 1) * 2^-53      in (0, 1]
//! u2 =  (w2 >> 11)      * 2^-53      in [0, 1)
//! z  = sqrt(-2 ln u1) * cos(2π u2)
//! ```
//!
//! The transform is deliberately simple so other implementations can
//! reproduce instances bit for bit.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

pub struct NormalStream {
    rng: ChaCha20Rng,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * TWO_POW_M53
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * TWO_POW_M53;
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    /// Uniformly distributed point on the unit sphere in `R^n`.
    pub fn unit_sphere(&mut self, n: usize) -> Vec<f64> {
        loop {
            let mut v = self.normal_vec(n);
            let nv = crate::linalg::norm(&v);
            if nv > 0.0 {
                crate::linalg::scale(1.0 / nv, &mut v);
                return v;
            }
        }
    }
}

/// Mixes a base seed with a stream index (SplitMix64 finalizer).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
