//! Brute-force reference routes used by the test suites.
//!
//! These build the objects of the t-product definition literally: the dense
//! block-circulant matrix and an `O(n²)` DFT. They are slow by design and
//! share no code with the spectral kernels.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::{dim_mismatch, Error, Result};
use crate::frame::ComplexMatrix;
use crate::tensor::Tensor3;

/// Largest dense block-circulant matrix the oracle will build.
pub const ORACLE_MAX_ENTRIES: usize = 4_000_000;

/// Dense `ℓn × pn` block-circulant matrix of `a`, column-major.
///
/// Block `(r, c)` is frontal slice `(r − c) mod n`.
pub fn bcirc(a: &Tensor3) -> Result<Vec<f64>> {
    let (l, p, n) = a.dims();
    let (big_rows, big_cols) = (l * n, p * n);
    let entries = big_rows * big_cols;
    if entries > ORACLE_MAX_ENTRIES {
        return Err(Error::OracleTooLarge { entries });
    }
    let mut m = vec![0.0; entries];
    for br in 0..n {
        for bc in 0..n {
            let k = (br + n - bc) % n;
            for j in 0..p {
                for i in 0..l {
                    m[(br * l + i) + (bc * p + j) * big_rows] = a.get(i, j, k);
                }
            }
        }
    }
    Ok(m)
}

/// `fold(bcirc(A) · unfold(B))`.
pub fn bcirc_oracle(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    let (l, q, n) = a.dims();
    let (q2, p, n2) = b.dims();
    if q != q2 || n != n2 {
        return Err(dim_mismatch(
            "bcirc_oracle",
            format!("{:?} times {:?}", a.dims(), b.dims()),
        ));
    }
    let m = bcirc(a)?;
    let big_rows = l * n;
    // unfold(B) stacks the frontal slices vertically: row k·q + i.
    let mut out = vec![0.0; l * p * n];
    for j in 0..p {
        for r in 0..big_rows {
            let mut acc = 0.0;
            for k in 0..n {
                for i in 0..q {
                    acc += m[r + (k * q + i) * big_rows] * b.get(i, j, k);
                }
            }
            let (k, i) = (r / l, r % l);
            out[i + j * l + k * l * p] = acc;
        }
    }
    Tensor3::new(l, p, n, out)
}

/// Full DFT spectrum (all `n` frames) by the direct sum.
pub fn naive_spectrum(a: &Tensor3) -> Vec<ComplexMatrix> {
    let (l, p, n) = a.dims();
    (0..n)
        .map(|s| {
            ComplexMatrix::from_fn(l, p, |i, j| {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    let ang = -core::f64::consts::TAU * ((s * k) % n) as f64 / n as f64;
                    let (sin, cos) = libm::sincos(ang);
                    acc += C64::new(cos, sin) * a.get(i, j, k);
                }
                acc
            })
        })
        .collect()
}

/// Inverse of [`naive_spectrum`] by the direct sum; returns real parts.
pub fn naive_inverse(frames: &[ComplexMatrix]) -> Result<Tensor3> {
    let n = frames.len();
    let first = frames.first().ok_or(Error::InvalidShape {
        rows: 0,
        cols: 0,
        tubes: 0,
    })?;
    let (l, p) = (first.rows(), first.cols());
    Tensor3::from_fn(l, p, n, |i, j, k| {
        let mut acc = C64::new(0.0, 0.0);
        for (s, f) in frames.iter().enumerate() {
            let ang = core::f64::consts::TAU * ((s * k) % n) as f64 / n as f64;
            let (sin, cos) = libm::sincos(ang);
            acc += C64::new(cos, sin) * f[(i, j)];
        }
        acc.re / n as f64
    })
}
