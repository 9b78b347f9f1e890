//! Half-spectrum representation of real tensors.
//!
//! The DFT of a real tube satisfies `x̂_{n−s} = conj(x̂_s)`, so only frames
//! `0..n/2+1` are stored. Frame 0 and, for even `n`, frame `n/2` are real.
//! Norms and inner products weight every other frame twice to account for
//! its conjugate partner.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64 as C64;

use crate::error::{dim_mismatch, Error, Result};
use crate::fft::FftPlan;
use crate::frame::ComplexMatrix;
use crate::math;
use crate::par::map_frames;
use crate::tensor::Tensor3;

/// Number of stored frames for tube length `n`.
#[inline]
pub fn frame_count(n: usize) -> usize {
    n / 2 + 1
}

/// Multiplicity of frame `s` in the full spectrum (1 or 2).
#[inline]
pub fn frame_weight(s: usize, n: usize) -> f64 {
    if s == 0 || (n % 2 == 0 && s == n / 2) {
        1.0
    } else {
        2.0
    }
}

/// Frames `0..=n/2` of the tube-wise DFT of a real `ℓ × p × n` tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralTensor {
    rows: usize,
    cols: usize,
    tubes: usize,
    frames: Vec<ComplexMatrix>,
}

impl SpectralTensor {
    pub fn from_frames(
        rows: usize,
        cols: usize,
        tubes: usize,
        frames: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if tubes == 0 {
            return Err(Error::InvalidShape { rows, cols, tubes });
        }
        if frames.len() != frame_count(tubes) {
            return Err(Error::LengthMismatch {
                expected: frame_count(tubes),
                got: frames.len(),
            });
        }
        for f in &frames {
            if f.rows() != rows || f.cols() != cols {
                return Err(dim_mismatch(
                    "SpectralTensor::from_frames",
                    format!(
                        "frame {}x{} in a {}x{} tensor",
                        f.rows(),
                        f.cols(),
                        rows,
                        cols
                    ),
                ));
            }
        }
        Ok(Self {
            rows,
            cols,
            tubes,
            frames,
        })
    }

    pub(crate) fn from_frames_unchecked(
        rows: usize,
        cols: usize,
        tubes: usize,
        frames: Vec<ComplexMatrix>,
    ) -> Self {
        debug_assert_eq!(frames.len(), frame_count(tubes));
        Self {
            rows,
            cols,
            tubes,
            frames,
        }
    }

    /// All-zero spectrum; `cols` may be 0 for an empty basis.
    pub fn zeros(rows: usize, cols: usize, tubes: usize) -> Self {
        let frames = (0..frame_count(tubes))
            .map(|_| ComplexMatrix::zeros(rows, cols))
            .collect();
        Self {
            rows,
            cols,
            tubes,
            frames,
        }
    }

    /// `(ℓ, p, n)`
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.tubes)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn tubes(&self) -> usize {
        self.tubes
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn weight(&self, s: usize) -> f64 {
        frame_weight(s, self.tubes)
    }

    pub fn frame(&self, s: usize) -> &ComplexMatrix {
        &self.frames[s]
    }

    pub fn frame_mut(&mut self, s: usize) -> &mut ComplexMatrix {
        &mut self.frames[s]
    }

    pub fn frames(&self) -> &[ComplexMatrix] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<ComplexMatrix> {
        self.frames
    }

    /// True when the frames that must be real (frame 0, and frame `n/2` for
    /// even `n`) have zero imaginary part.
    pub fn has_real_edges(&self) -> bool {
        self.edge_frames().all(|s| self.frames[s].max_imag() == 0.0)
    }

    fn edge_frames(&self) -> impl Iterator<Item = usize> {
        let n = self.tubes;
        core::iter::once(0).chain((n % 2 == 0 && n > 1).then_some(n / 2))
    }

    /// The full spectrum, frames `0..n`, with the redundant half filled in by
    /// conjugation.
    pub fn full_frames(&self) -> Vec<ComplexMatrix> {
        let n = self.tubes;
        (0..n)
            .map(|s| {
                if s < self.frames.len() {
                    self.frames[s].clone()
                } else {
                    self.frames[n - s].conj()
                }
            })
            .collect()
    }

    fn check_inner(&self, rhs: &Self, op: &'static str) -> Result<()> {
        if self.tubes != rhs.tubes {
            return Err(dim_mismatch(
                op,
                format!("tube length {} vs {}", self.tubes, rhs.tubes),
            ));
        }
        Ok(())
    }

    /// Frame-wise `self · rhs`, i.e. the t-product.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_inner(rhs, "mul")?;
        if self.cols != rhs.rows {
            return Err(dim_mismatch(
                "mul",
                format!(
                    "{}x{} frames times {}x{}",
                    self.rows, self.cols, rhs.rows, rhs.cols
                ),
            ));
        }
        let frames = map_frames(self.frames.len(), |s| self.frames[s].matmul(&rhs.frames[s]))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_frames_unchecked(
            self.rows, rhs.cols, self.tubes, frames,
        ))
    }

    /// Frame-wise `selfᴴ · rhs`, i.e. `Aᴴ ⋆ B`.
    pub fn adjoint_mul(&self, rhs: &Self) -> Result<Self> {
        self.check_inner(rhs, "adjoint_mul")?;
        if self.rows != rhs.rows {
            return Err(dim_mismatch(
                "adjoint_mul",
                format!(
                    "({}x{})^H frames times {}x{}",
                    self.rows, self.cols, rhs.rows, rhs.cols
                ),
            ));
        }
        let frames = map_frames(self.frames.len(), |s| {
            self.frames[s].adjoint_matmul(&rhs.frames[s])
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_frames_unchecked(
            self.cols, rhs.cols, self.tubes, frames,
        ))
    }

    /// Spectrum of the tensor transpose.
    pub fn adjoint(&self) -> Self {
        let frames = self.frames.iter().map(|f| f.adjoint()).collect();
        Self::from_frames_unchecked(self.cols, self.rows, self.tubes, frames)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip(rhs, "add", |a, b| a.add(b))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip(rhs, "sub", |a, b| a.sub(b))
    }

    fn zip(
        &self,
        rhs: &Self,
        op: &'static str,
        f: impl Fn(&ComplexMatrix, &ComplexMatrix) -> Result<ComplexMatrix>,
    ) -> Result<Self> {
        if self.dims() != rhs.dims() {
            return Err(dim_mismatch(
                op,
                format!("{:?} vs {:?}", self.dims(), rhs.dims()),
            ));
        }
        let frames = self
            .frames
            .iter()
            .zip(&rhs.frames)
            .map(|(a, b)| f(a, b))
            .collect::<Result<_>>()?;
        Ok(Self::from_frames_unchecked(
            self.rows, self.cols, self.tubes, frames,
        ))
    }

    /// Frobenius norm of the underlying real tensor.
    pub fn fnorm(&self) -> f64 {
        let total: f64 = self
            .frames
            .iter()
            .enumerate()
            .map(|(s, f)| {
                let v = f.frobenius_norm();
                self.weight(s) * v * v
            })
            .sum();
        math::sqrt(total / self.tubes as f64)
    }

    /// Inner product of the underlying real tensors.
    pub fn inner(&self, rhs: &Self) -> Result<f64> {
        if self.dims() != rhs.dims() {
            return Err(dim_mismatch(
                "inner",
                format!("{:?} vs {:?}", self.dims(), rhs.dims()),
            ));
        }
        let total: f64 = self
            .frames
            .iter()
            .zip(&rhs.frames)
            .enumerate()
            .map(|(s, (a, b))| {
                let re: f64 = a
                    .as_slice()
                    .iter()
                    .zip(b.as_slice())
                    .map(|(x, y)| (x.conj() * y).re)
                    .sum();
                self.weight(s) * re
            })
            .sum();
        Ok(total / self.tubes as f64)
    }

    /// Lateral slices `range` of every frame.
    pub fn select_lateral(&self, range: Range<usize>) -> Self {
        let frames = self
            .frames
            .iter()
            .map(|f| f.columns(range.clone()))
            .collect();
        Self::from_frames_unchecked(self.rows, range.len(), self.tubes, frames)
    }

    /// Appends the lateral slices of `rhs` after those of `self`.
    pub fn hcat(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows || self.tubes != rhs.tubes {
            return Err(dim_mismatch(
                "hcat",
                format!("{:?} vs {:?}", self.dims(), rhs.dims()),
            ));
        }
        let frames = self
            .frames
            .iter()
            .zip(&rhs.frames)
            .map(|(a, b)| {
                let mut m = a.clone();
                for j in 0..b.cols() {
                    m.push_col(b.col(j));
                }
                m
            })
            .collect();
        Ok(Self::from_frames_unchecked(
            self.rows,
            self.cols + rhs.cols,
            self.tubes,
            frames,
        ))
    }
}

/// Tube-wise DFT of a real tensor, keeping frames `0..=n/2`.
pub fn fft3(a: &Tensor3) -> SpectralTensor {
    let (rows, cols, n) = a.dims();
    let h = frame_count(n);
    let plan = FftPlan::new(n);
    let mut frames: Vec<ComplexMatrix> = (0..h).map(|_| ComplexMatrix::zeros(rows, cols)).collect();
    let data = a.as_slice();
    let stride = rows * cols;
    let mut buf = alloc::vec![C64::new(0.0, 0.0); n];
    for t in 0..stride {
        for (k, b) in buf.iter_mut().enumerate() {
            *b = C64::new(data[t + k * stride], 0.0);
        }
        plan.forward(&mut buf);
        for (s, f) in frames.iter_mut().enumerate() {
            f.as_mut_slice()[t] = buf[s];
        }
    }
    // Rounding leaves tiny imaginary parts on frames that are real in exact
    // arithmetic.
    let mut out = SpectralTensor::from_frames_unchecked(rows, cols, n, frames);
    let edges: Vec<usize> = out.edge_frames().collect();
    for s in edges {
        out.frames[s]
            .as_mut_slice()
            .iter_mut()
            .for_each(|z| z.im = 0.0);
    }
    out
}

/// Inverse of [`fft3`].
///
/// Imaginary parts on the frames that must be real are discarded when they
/// are below `1e-10·‖S‖`; anything larger is a [`Error::SymmetryViolation`].
pub fn ifft3(s: &SpectralTensor) -> Result<Tensor3> {
    let (rows, cols, n) = s.dims();
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidShape {
            rows,
            cols,
            tubes: n,
        });
    }
    let residue = s
        .edge_frames()
        .map(|e| s.frames[e].max_imag())
        .fold(0.0, f64::max);
    if residue > 0.0 {
        let scale = s.fnorm() * math::sqrt(n as f64);
        if residue > 1e-10 * scale {
            return Err(Error::SymmetryViolation { residue });
        }
    }
    let h = s.frames.len();
    let plan = FftPlan::new(n);
    let stride = rows * cols;
    let mut data = alloc::vec![0.0; stride * n];
    let mut buf = alloc::vec![C64::new(0.0, 0.0); n];
    let edge_real = |k: usize| k == 0 || (n % 2 == 0 && k == n / 2);
    for t in 0..stride {
        for k in 0..n {
            buf[k] = if k < h {
                let z = s.frames[k].as_slice()[t];
                if edge_real(k) {
                    C64::new(z.re, 0.0)
                } else {
                    z
                }
            } else {
                s.frames[n - k].as_slice()[t].conj()
            };
        }
        plan.inverse(&mut buf);
        for (k, b) in buf.iter().enumerate() {
            data[t + k * stride] = b.re;
        }
    }
    Tensor3::new(rows, cols, n, data)
}
