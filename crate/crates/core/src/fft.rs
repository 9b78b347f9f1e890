//! Discrete Fourier transforms of arbitrary length.
//!
//! Short transforms use the direct sum, powers of two use an in-place
//! radix-2 butterfly, and everything else goes through Bluestein's chirp-z
//! reformulation on a power-of-two convolution.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::math;

const DIRECT_MAX: usize = 32;

/// Unit root `exp(-2πi t / n)`, with `t` reduced so the angle stays small.
fn root(t: usize, n: usize) -> C64 {
    let t = t % n;
    let (s, c) = math::sin_cos(-core::f64::consts::TAU * t as f64 / n as f64);
    C64::new(c, s)
}

#[derive(Clone, Debug)]
enum Kind {
    Direct {
        roots: Vec<C64>,
    },
    Radix2 {
        roots: Vec<C64>,
    },
    Bluestein {
        chirp: Vec<C64>,
        kernel_hat: Vec<C64>,
        inner: Radix2Plan,
    },
}

#[derive(Clone, Debug)]
struct Radix2Plan {
    len: usize,
    roots: Vec<C64>,
}

impl Radix2Plan {
    fn new(len: usize) -> Self {
        debug_assert!(len.is_power_of_two());
        let roots = (0..len / 2).map(|t| root(t, len)).collect();
        Self { len, roots }
    }

    fn forward(&self, buf: &mut [C64]) {
        radix2(buf, &self.roots);
    }

    fn inverse_unscaled(&self, buf: &mut [C64]) {
        for x in buf.iter_mut() {
            *x = x.conj();
        }
        radix2(buf, &self.roots);
        for x in buf.iter_mut() {
            *x = x.conj();
        }
    }
}

fn radix2(buf: &mut [C64], roots: &[C64]) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut half = 1;
    while half < n {
        let stride = n / (2 * half);
        for start in (0..n).step_by(2 * half) {
            for k in 0..half {
                let w = roots[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        half *= 2;
    }
}

/// A reusable transform of fixed length.
#[derive(Clone, Debug)]
pub struct FftPlan {
    len: usize,
    kind: Kind,
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let kind = if len <= DIRECT_MAX {
            Kind::Direct {
                roots: (0..len).map(|t| root(t, len)).collect(),
            }
        } else if len.is_power_of_two() {
            Kind::Radix2 {
                roots: (0..len / 2).map(|t| root(t, len)).collect(),
            }
        } else {
            // w_j = exp(-πi j² / n); j² is reduced mod 2n before the angle is formed.
            let two_n = 2 * len;
            let chirp: Vec<C64> = (0..len)
                .map(|j| {
                    let t = (j * j) % two_n;
                    root(t, two_n)
                })
                .collect();
            let m = (2 * len - 1).next_power_of_two();
            let inner = Radix2Plan::new(m);
            let mut kernel = vec![C64::new(0.0, 0.0); m];
            kernel[0] = chirp[0].conj();
            for j in 1..len {
                kernel[j] = chirp[j].conj();
                kernel[m - j] = chirp[j].conj();
            }
            inner.forward(&mut kernel);
            Kind::Bluestein {
                chirp,
                kernel_hat: kernel,
                inner,
            }
        };
        Self { len, kind }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward DFT, `X_k = Σ_j x_j exp(-2πi jk/n)`.
    pub fn forward(&self, buf: &mut [C64]) {
        assert_eq!(buf.len(), self.len);
        match &self.kind {
            Kind::Direct { roots } => {
                let n = self.len;
                if n == 1 {
                    return;
                }
                let input: Vec<C64> = buf.to_vec();
                for (k, out) in buf.iter_mut().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, x) in input.iter().enumerate() {
                        acc += x * roots[(j * k) % n];
                    }
                    *out = acc;
                }
            }
            Kind::Radix2 { roots } => radix2(buf, roots),
            Kind::Bluestein {
                chirp,
                kernel_hat,
                inner,
            } => {
                let m = inner.len;
                let mut work = vec![C64::new(0.0, 0.0); m];
                for j in 0..self.len {
                    work[j] = buf[j] * chirp[j];
                }
                inner.forward(&mut work);
                for (w, k) in work.iter_mut().zip(kernel_hat) {
                    *w *= k;
                }
                inner.inverse_unscaled(&mut work);
                let scale = 1.0 / m as f64;
                for k in 0..self.len {
                    buf[k] = work[k] * chirp[k] * scale;
                }
            }
        }
    }

    /// In-place inverse DFT including the `1/n` factor.
    pub fn inverse(&self, buf: &mut [C64]) {
        for x in buf.iter_mut() {
            *x = x.conj();
        }
        self.forward(buf);
        let scale = 1.0 / self.len as f64;
        for x in buf.iter_mut() {
            *x = x.conj() * scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::NormalRng;

    fn naive(x: &[C64]) -> Vec<C64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let ang = -core::f64::consts::TAU * ((j * k) % n) as f64 / n as f64;
                        v * C64::new(ang.cos(), ang.sin())
                    })
                    .sum()
            })
            .collect()
    }

    fn max_err(a: &[C64], b: &[C64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn all_strategies_match_naive_dft() {
        let mut rng = NormalRng::new(1);
        for n in [1usize, 2, 3, 5, 7, 16, 31, 32, 33, 64, 97, 100, 128, 250] {
            let x: Vec<C64> = (0..n)
                .map(|_| C64::new(rng.normal(), rng.normal()))
                .collect();
            let mut y = x.clone();
            let plan = FftPlan::new(n);
            plan.forward(&mut y);
            let expect = naive(&x);
            let scale = expect.iter().map(|v| v.norm()).fold(1.0, f64::max);
            assert!(max_err(&y, &expect) <= 1e-12 * scale, "n={n}");
            plan.inverse(&mut y);
            assert!(max_err(&y, &x) <= 1e-13 * scale, "round trip n={n}");
        }
    }

    #[test]
    fn delta_transforms_to_constant() {
        for n in [3usize, 8, 45] {
            let mut x = vec![C64::new(0.0, 0.0); n];
            x[0] = C64::new(1.0, 0.0);
            FftPlan::new(n).forward(&mut x);
            for v in x {
                assert!((v - C64::new(1.0, 0.0)).norm() < 1e-14);
            }
        }
    }
}
