//! Dense real third-order tensors and the t-product algebra.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, Range};

use crate::error::{dim_mismatch, Error, Result};
use crate::math;
use crate::spectral::{fft3, ifft3};

/// A real `ℓ × p × n` tensor.
///
/// Entry `(i, j, k)` lives at `i + j·ℓ + k·ℓ·p`: each frontal slice is a
/// column-major `ℓ × p` matrix and the slices follow each other.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    rows: usize,
    cols: usize,
    tubes: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn new(rows: usize, cols: usize, tubes: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(rows, cols, tubes)?;
        let expected = rows * cols * tubes;
        if data.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            rows,
            cols,
            tubes,
            data,
        })
    }

    /// Constructor for data already known to be finite and well sized.
    pub(crate) fn from_parts(rows: usize, cols: usize, tubes: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols * tubes);
        Self {
            rows,
            cols,
            tubes,
            data,
        }
    }

    pub fn zeros(rows: usize, cols: usize, tubes: usize) -> Result<Self> {
        check_shape(rows, cols, tubes)?;
        Ok(Self::from_parts(
            rows,
            cols,
            tubes,
            vec![0.0; rows * cols * tubes],
        ))
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        tubes: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        check_shape(rows, cols, tubes)?;
        let mut data = Vec::with_capacity(rows * cols * tubes);
        for k in 0..tubes {
            for j in 0..cols {
                for i in 0..rows {
                    data.push(f(i, j, k));
                }
            }
        }
        Self::new(rows, cols, tubes, data)
    }

    /// `ℓ × ℓ × n` identity: the first frontal slice is the identity matrix,
    /// the others are zero.
    pub fn identity(rows: usize, tubes: usize) -> Result<Self> {
        Self::from_fn(
            rows,
            rows,
            tubes,
            |i, j, k| if i == j && k == 0 { 1.0 } else { 0.0 },
        )
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn tubes(&self) -> usize {
        self.tubes
    }

    /// `(ℓ, p, n)`
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.tubes)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.rows && j < self.cols && k < self.tubes);
        i + j * self.rows + k * self.rows * self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    /// Sets one entry. Panics on a non-finite value.
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        assert!(value.is_finite(), "tensor entries must be finite");
        let o = self.offset(i, j, k);
        self.data[o] = value;
    }

    /// Frontal slice `k` as a column-major `ℓ × p` block.
    pub fn frontal(&self, k: usize) -> &[f64] {
        let len = self.rows * self.cols;
        &self.data[k * len..(k + 1) * len]
    }

    /// Lateral slice `j` (0-based).
    pub fn lateral(&self, j: usize) -> LateralSlice {
        assert!(j < self.cols, "lateral slice index out of range");
        LateralSlice(self.select_lateral(j..j + 1))
    }

    /// The lateral slices in `range` as an `ℓ × |range| × n` tensor.
    pub fn select_lateral(&self, range: Range<usize>) -> Tensor3 {
        assert!(range.end <= self.cols && range.start < range.end);
        let width = range.len();
        let mut data = Vec::with_capacity(self.rows * width * self.tubes);
        for k in 0..self.tubes {
            for j in range.clone() {
                let o = self.offset(0, j, k);
                data.extend_from_slice(&self.data[o..o + self.rows]);
            }
        }
        Self::from_parts(self.rows, width, self.tubes, data)
    }

    /// Tube `(i, j, :)` (0-based).
    pub fn tube(&self, i: usize, j: usize) -> Tube {
        Tube(Self::from_parts(
            1,
            1,
            self.tubes,
            (0..self.tubes).map(|k| self.get(i, j, k)).collect(),
        ))
    }

    /// Concatenates lateral slices side by side.
    pub fn from_laterals(slices: &[LateralSlice]) -> Result<Tensor3> {
        let first = slices
            .first()
            .ok_or_else(|| dim_mismatch("from_laterals", "need at least one slice".into()))?;
        let (rows, _, tubes) = first.dims();
        for s in slices {
            if s.rows() != rows || s.tubes() != tubes {
                return Err(dim_mismatch(
                    "from_laterals",
                    format!("slice {}x1x{} vs {}x1x{}", s.rows(), s.tubes(), rows, tubes),
                ));
            }
        }
        let cols = slices.len();
        let mut data = Vec::with_capacity(rows * cols * tubes);
        for k in 0..tubes {
            for s in slices {
                data.extend_from_slice(s.frontal(k));
            }
        }
        Ok(Self::from_parts(rows, cols, tubes, data))
    }

    /// t-product `self ⋆ rhs`, evaluated frame by frame on the half spectrum.
    pub fn tprod(&self, rhs: &Tensor3) -> Result<Tensor3> {
        if self.cols != rhs.rows || self.tubes != rhs.tubes {
            return Err(dim_mismatch(
                "tprod",
                format!(
                    "{}x{}x{} times {}x{}x{}",
                    self.rows, self.cols, self.tubes, rhs.rows, rhs.cols, rhs.tubes
                ),
            ));
        }
        ifft3(&fft3(self).mul(&fft3(rhs))?)
    }

    /// Tensor transpose `Aᴴ`: every frontal slice transposed, slices 2..n
    /// in reverse order.
    pub fn transpose(&self) -> Tensor3 {
        let n = self.tubes;
        let mut data = vec![0.0; self.data.len()];
        let (r, c) = (self.rows, self.cols);
        for k in 0..n {
            let src = (n - k) % n;
            for j in 0..c {
                for i in 0..r {
                    data[j + i * c + k * r * c] = self.get(i, j, src);
                }
            }
        }
        Self::from_parts(c, r, n, data)
    }

    pub fn fnorm(&self) -> f64 {
        let big = self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if big == 0.0 {
            return 0.0;
        }
        let s: f64 = self.data.iter().map(|x| (x / big) * (x / big)).sum();
        big * math::sqrt(s)
    }

    /// Entrywise inner product `Σ a_ijk b_ijk`.
    pub fn inner(&self, rhs: &Tensor3) -> Result<f64> {
        self.check_same(rhs, "inner")?;
        Ok(self.data.iter().zip(&rhs.data).map(|(a, b)| a * b).sum())
    }

    pub fn add(&self, rhs: &Tensor3) -> Result<Tensor3> {
        self.check_same(rhs, "add")?;
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::from_parts(self.rows, self.cols, self.tubes, data))
    }

    pub fn sub(&self, rhs: &Tensor3) -> Result<Tensor3> {
        self.check_same(rhs, "sub")?;
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self::from_parts(self.rows, self.cols, self.tubes, data))
    }

    pub fn scaled(&self, s: f64) -> Tensor3 {
        Self::from_parts(
            self.rows,
            self.cols,
            self.tubes,
            self.data.iter().map(|x| x * s).collect(),
        )
    }

    /// `‖self − rhs‖_F / ‖rhs‖_F` (absolute error when `rhs` is zero).
    pub fn rel_diff(&self, rhs: &Tensor3) -> Result<f64> {
        let d = self.sub(rhs)?.fnorm();
        let base = rhs.fnorm();
        Ok(if base == 0.0 { d } else { d / base })
    }

    fn check_same(&self, rhs: &Tensor3, op: &'static str) -> Result<()> {
        if self.dims() != rhs.dims() {
            return Err(dim_mismatch(
                op,
                format!("{:?} vs {:?}", self.dims(), rhs.dims()),
            ));
        }
        Ok(())
    }
}

fn check_shape(rows: usize, cols: usize, tubes: usize) -> Result<()> {
    if rows == 0 || cols == 0 || tubes == 0 {
        return Err(Error::InvalidShape { rows, cols, tubes });
    }
    Ok(())
}

/// A `1 × 1 × n` tensor, the scalar of the t-product algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct Tube(Tensor3);

impl Tube {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Ok(Self(Tensor3::new(1, 1, n, values)?))
    }

    /// The unit tube `𝐞₁ = (1, 0, …, 0)`.
    pub fn e1(n: usize) -> Result<Self> {
        let mut v = vec![0.0; n];
        if let Some(first) = v.first_mut() {
            *first = 1.0;
        }
        Self::new(v)
    }

    pub fn from_tensor(t: Tensor3) -> Result<Self> {
        if t.rows != 1 || t.cols != 1 {
            return Err(dim_mismatch(
                "Tube::from_tensor",
                format!("got {:?}", t.dims()),
            ));
        }
        Ok(Self(t))
    }

    pub fn values(&self) -> &[f64] {
        &self.0.data
    }

    pub fn len(&self) -> usize {
        self.0.tubes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// t-product of tubes (circular convolution).
    pub fn mul(&self, rhs: &Tube) -> Result<Tube> {
        Ok(Tube(self.0.tprod(&rhs.0)?))
    }

    pub fn into_tensor(self) -> Tensor3 {
        self.0
    }
}

impl Deref for Tube {
    type Target = Tensor3;

    fn deref(&self) -> &Tensor3 {
        &self.0
    }
}

/// An `ℓ × 1 × n` tensor, the vector of the t-product algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct LateralSlice(Tensor3);

impl LateralSlice {
    /// Builds a slice from data laid out as `(i, k) ↦ i + k·ℓ`.
    pub fn new(rows: usize, tubes: usize, data: Vec<f64>) -> Result<Self> {
        Ok(Self(Tensor3::new(rows, 1, tubes, data)?))
    }

    pub fn from_tensor(t: Tensor3) -> Result<Self> {
        if t.cols != 1 {
            return Err(dim_mismatch(
                "LateralSlice::from_tensor",
                format!("got {:?}", t.dims()),
            ));
        }
        Ok(Self(t))
    }

    /// Canonical slice `E⃗_j` of extent `m × 1 × n`: a single one at
    /// `(j, 1, 1)`. The index `j` is 1-based, `1 ≤ j ≤ m`.
    pub fn canonical(m: usize, j: usize, tubes: usize) -> Result<Self> {
        if j == 0 || j > m {
            return Err(Error::IndexOutOfRange { index: j, bound: m });
        }
        let mut t = Tensor3::zeros(m, 1, tubes)?;
        t.set(j - 1, 0, 0, 1.0);
        Ok(Self(t))
    }

    /// `self ⋆ a`
    pub fn mul_tube(&self, a: &Tube) -> Result<LateralSlice> {
        Ok(Self(self.0.tprod(a)?))
    }

    pub fn into_tensor(self) -> Tensor3 {
        self.0
    }

    pub fn as_tensor(&self) -> &Tensor3 {
        &self.0
    }
}

impl Deref for LateralSlice {
    type Target = Tensor3;

    fn deref(&self) -> &Tensor3 {
        &self.0
    }
}

/// Free-function form of [`Tensor3::identity`].
pub fn identity_tensor(rows: usize, tubes: usize) -> Result<Tensor3> {
    Tensor3::identity(rows, tubes)
}

/// Free-function form of [`LateralSlice::canonical`].
pub fn canonical_slice(m: usize, j: usize, tubes: usize) -> Result<LateralSlice> {
    LateralSlice::canonical(m, j, tubes)
}

/// Slice inner product `⟨X⃗, Y⃗⟩ = X⃗ᴴ ⋆ Y⃗`, a tube.
pub fn slice_dot(x: &LateralSlice, y: &LateralSlice) -> Result<Tube> {
    if x.rows() != y.rows() || x.tubes() != y.tubes() {
        return Err(dim_mismatch(
            "slice_dot",
            format!("{:?} vs {:?}", x.dims(), y.dims()),
        ));
    }
    Tube::from_tensor(x.transpose().tprod(y)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::randn;

    #[test]
    fn tube_products_shift() {
        let x = Tube::new(vec![0.0, 1.0, 0.0]).unwrap();
        let y = x.mul(&x).unwrap();
        for (a, b) in y.values().iter().zip([0.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_is_a_unit() {
        let b = randn(3, 2, 4, 1);
        let i = Tensor3::identity(3, 4).unwrap();
        assert!(i.tprod(&b).unwrap().rel_diff(&b).unwrap() < 1e-15);
        assert!(i.tprod(&i).unwrap().rel_diff(&i).unwrap() < 1e-15);
        assert!((i.fnorm() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn transpose_is_an_involution() {
        let a = randn(3, 4, 5, 2);
        assert_eq!(a.transpose().transpose(), a);
        let m = randn(3, 4, 1, 3);
        let t = m.transpose();
        for i in 0..3 {
            for j in 0..4 {
                assert_eq!(t.get(j, i, 0), m.get(i, j, 0));
            }
        }
    }

    #[test]
    fn canonical_slices() {
        let e1 = LateralSlice::canonical(3, 1, 4).unwrap();
        let e2 = LateralSlice::canonical(3, 2, 4).unwrap();
        assert!(
            slice_dot(&e1, &e1)
                .unwrap()
                .rel_diff(&Tube::e1(4).unwrap())
                .unwrap()
                < 1e-15
        );
        assert!(slice_dot(&e1, &e2).unwrap().fnorm() < 1e-15);
        assert!(matches!(
            LateralSlice::canonical(3, 0, 4),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            LateralSlice::canonical(3, 4, 4),
            Err(Error::IndexOutOfRange { .. })
        ));

        let a = randn(4, 3, 5, 4);
        let col = a.tprod(&canonical_slice(3, 2, 5).unwrap()).unwrap();
        assert!(col.rel_diff(&a.lateral(1)).unwrap() < 1e-14);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            Tensor3::new(0, 1, 1, vec![]),
            Err(Error::InvalidShape { .. })
        ));
        assert!(matches!(
            Tensor3::new(1, 1, 2, vec![1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            Tensor3::new(1, 1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
        let a = randn(2, 3, 2, 1);
        assert!(matches!(a.tprod(&a), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn laterals_round_trip() {
        let a = randn(4, 3, 2, 5);
        let slices: Vec<_> = (0..3).map(|j| a.lateral(j)).collect();
        assert_eq!(Tensor3::from_laterals(&slices).unwrap(), a);
        assert_eq!(a.select_lateral(1..3).lateral(0), a.lateral(1));
    }
}
