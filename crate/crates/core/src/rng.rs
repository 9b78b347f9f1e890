//! Seeded Gaussian generator used for degenerate-frame replacement and
//! random test tensors.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::math;
use crate::tensor::Tensor3;

/// Deterministic standard-normal source. Streams derived with
/// [`NormalRng::split`] are independent of each other and of the parent.
#[derive(Clone, Debug)]
pub struct NormalRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// A child generator on its own ChaCha stream.
    pub fn split(&self, stream: u64) -> Self {
        let mut inner = self.inner.clone();
        inner.set_stream(stream.wrapping_add(1));
        inner.set_word_pos(0);
        Self { inner, spare: None }
    }

    /// Uniform sample in the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        // 53 random bits, shifted off zero.
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // Box-Muller
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = math::sqrt(-2.0 * math::ln(u1));
        let (s, c) = math::sin_cos(core::f64::consts::TAU * u2);
        self.spare = Some(r * s);
        r * c
    }

    pub fn normals(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.normal()).collect()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

/// Tensor with independent standard-normal entries.
pub fn randn(rows: usize, cols: usize, tubes: usize, seed: u64) -> Tensor3 {
    let mut rng = NormalRng::new(seed);
    let data = rng.normals(rows * cols * tubes);
    Tensor3::new(rows, cols, tubes, data).expect("randn dimensions must be positive")
}
