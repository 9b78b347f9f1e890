//! Dense complex kernels applied to a single Fourier frame.
//!
//! Matrices are small (the solver core is at most `m × m`), so the kernels
//! favour simple, accurate algorithms: one-sided Jacobi for the SVD,
//! Householder reflections for QR and plain substitution for triangular
//! systems.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut, Range};

use num_complex::Complex64 as C64;

use crate::error::{dim_mismatch, Error, Result};
use crate::math;
use crate::EPS;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Column-major complex matrix.
///
/// A matrix with zero columns is allowed; it is the natural empty basis
/// before the first Lanczos step.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::eye(n, n)
    }

    /// Rectangular identity: ones on the main diagonal.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_column_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(index) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::from_column_major(
            rows,
            cols,
            values.iter().map(|&x| C64::new(x, 0.0)).collect(),
        )
    }

    /// Diagonal matrix with real entries.
    pub fn from_diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn set_col(&mut self, j: usize, values: &[C64]) {
        self.col_mut(j).copy_from_slice(values);
    }

    pub fn push_col(&mut self, values: &[C64]) {
        assert_eq!(
            values.len(),
            self.rows,
            "column length must match row count"
        );
        self.data.extend_from_slice(values);
        self.cols += 1;
    }

    /// Copy of the columns in `range`.
    pub fn columns(&self, range: Range<usize>) -> Self {
        let cols = range.len();
        let data = self.data[range.start * self.rows..range.end * self.rows].to_vec();
        Self {
            rows: self.rows,
            cols,
            data,
        }
    }

    /// Copy of the block `rows × cols`.
    pub fn block(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows.start + i, cols.start + j)]
        })
    }

    pub fn set_block(&mut self, row0: usize, col0: usize, src: &Self) {
        for j in 0..src.cols {
            for i in 0..src.rows {
                self[(row0 + i, col0 + j)] = src[(i, j)];
            }
        }
    }

    /// Resizes to `rows × cols`, keeping the overlapping leading block and
    /// zero-filling the rest.
    pub fn resized(&self, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| {
            if i < self.rows && j < self.cols {
                self[(i, j)]
            } else {
                ZERO
            }
        })
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// `self · rhs`
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(dim_mismatch(
                "matmul",
                format!(
                    "{}x{} times {}x{}",
                    self.rows, self.cols, rhs.rows, rhs.cols
                ),
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in rhs.col(j).iter().enumerate() {
                if b == ZERO {
                    continue;
                }
                for (d, &a) in dst.iter_mut().zip(self.col(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᴴ · rhs`
    pub fn adjoint_matmul(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(dim_mismatch(
                "adjoint_matmul",
                format!(
                    "({}x{})^H times {}x{}",
                    self.rows, self.cols, rhs.rows, rhs.cols
                ),
            ));
        }
        Ok(Self::from_fn(self.cols, rhs.cols, |i, j| {
            dot(self.col(i), rhs.col(j))
        }))
    }

    /// `self · v`
    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![ZERO; self.rows];
        for (k, &b) in v.iter().enumerate() {
            if b == ZERO {
                continue;
            }
            for (d, &a) in out.iter_mut().zip(self.col(k)) {
                *d += a * b;
            }
        }
        out
    }

    /// `selfᴴ · v`
    pub fn adjoint_mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), v)).collect()
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Self, op: &'static str, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(dim_mismatch(
                op,
                format!("{}x{} vs {}x{}", self.rows, self.cols, rhs.rows, rhs.cols),
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// True when every entry strictly below the diagonal is exactly zero.
    pub fn is_upper_triangular(&self) -> bool {
        (0..self.cols).all(|j| ((j + 1)..self.rows).all(|i| self[(i, j)] == ZERO))
    }

    /// `‖selfᴴ self − I‖_max`
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.adjoint_matmul(self).expect("square Gram matrix");
        let mut worst: f64 = 0.0;
        for j in 0..g.cols {
            for i in 0..g.rows {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

/// `xᴴ y`
#[inline]
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    let mut acc = ZERO;
    for (a, b) in x.iter().zip(y) {
        acc += a.conj() * b;
    }
    acc
}

#[inline]
pub fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Euclidean norm, scaled to avoid overflow for large entries.
pub fn norm(x: &[C64]) -> f64 {
    let big = x
        .iter()
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0, f64::max);
    if big == 0.0 {
        return 0.0;
    }
    if !(1e-150..=1e150).contains(&big) {
        // Dividing rather than multiplying by 1/big keeps subnormal inputs
        // finite.
        let s: f64 = x.iter().map(|z| (z / big).norm_sqr()).sum();
        return big * math::sqrt(s);
    }
    math::sqrt(norm_sqr(x))
}

/// `y ← y − a x`
#[inline]
pub fn axpy_neg(y: &mut [C64], a: C64, x: &[C64]) {
    for (d, s) in y.iter_mut().zip(x) {
        *d -= a * s;
    }
}

/// Two passes of classical Gram–Schmidt of `v` against the first `cols`
/// columns of `basis`. Returns the accumulated coefficients `basisᴴ v`.
pub fn reorthogonalize(basis: &ComplexMatrix, cols: usize, v: &mut [C64]) -> Vec<C64> {
    let mut total = vec![ZERO; cols];
    for _ in 0..2 {
        let coeff: Vec<C64> = (0..cols).map(|j| dot(basis.col(j), v)).collect();
        for (j, c) in coeff.iter().enumerate() {
            axpy_neg(v, *c, basis.col(j));
            total[j] += c;
        }
    }
    total
}

/// Adds orthonormal columns to `m` (whose columns are orthonormal) until it
/// has `target` columns. Each new column is the canonical vector with the
/// largest component outside the current span, orthogonalized and normalized.
pub fn complete_orthonormal(m: &mut ComplexMatrix, target: usize) {
    let rows = m.rows();
    assert!(target <= rows, "cannot complete beyond the row count");
    while m.cols() < target {
        let cols = m.cols();
        let mut best: Option<(f64, Vec<C64>)> = None;
        for candidate in 0..rows {
            let mut v = vec![ZERO; rows];
            v[candidate] = ONE;
            reorthogonalize(m, cols, &mut v);
            let nv = norm(&v);
            if best.as_ref().map_or(true, |(b, _)| nv > *b) {
                best = Some((nv, v));
            }
        }
        // The residuals satisfy sum |r_i|^2 = rows - cols, so the best one
        // has norm at least sqrt(1 / rows).
        let (nv, mut v) = best.expect("rows > 0");
        let inv = 1.0 / nv;
        v.iter_mut().for_each(|z| *z *= inv);
        m.push_col(&v);
    }
}

/// Singular value decomposition of one frame, `A = U diag(s) Vᴴ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSvd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

impl FrameSvd {
    /// `U diag(s) Vᴴ` using the leading `s.len()` columns.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let r = self.s.len();
        let mut us = self.u.columns(0..r);
        for (j, &sj) in self.s.iter().enumerate() {
            us.col_mut(j).iter_mut().for_each(|z| *z *= sj);
        }
        us.matmul(&self.v.columns(0..r).adjoint())
            .expect("conforming factors")
    }
}

/// SVD by one-sided Jacobi.
///
/// Economy mode returns `U: rows × r`, `V: cols × r` with `r = min(rows,
/// cols)`; full mode returns square `U` and `V`. Singular values are sorted
/// descending. Each column of `U` is rotated so that its largest-magnitude
/// entry is real and positive, with the same phase applied to `V`.
pub fn frame_svd(a: &ComplexMatrix, economy: bool) -> Result<FrameSvd> {
    let (rows, cols) = (a.rows(), a.cols());
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidShape {
            rows,
            cols,
            tubes: 1,
        });
    }
    let (mut u, s, mut v) = if rows >= cols {
        tall_svd(a)?
    } else {
        let (u, s, v) = tall_svd(&a.adjoint())?;
        (v, s, u)
    };
    if !economy {
        complete_orthonormal(&mut u, rows);
        complete_orthonormal(&mut v, cols);
    }
    for j in 0..u.cols() {
        let col = u.col(j);
        let mut best = 0;
        for (i, z) in col.iter().enumerate() {
            if z.norm() > col[best].norm() {
                best = i;
            }
        }
        let pivot = col[best];
        let mag = pivot.norm();
        if mag == 0.0 {
            continue;
        }
        let phase = pivot.conj() / mag;
        u.col_mut(j).iter_mut().for_each(|z| *z *= phase);
        u[(best, j)] = C64::new(u[(best, j)].norm(), 0.0);
        if j < v.cols() {
            v.col_mut(j).iter_mut().for_each(|z| *z *= phase);
        }
    }
    Ok(FrameSvd { u, s, v })
}

/// Economy SVD of a matrix with `rows >= cols`, without phase fixing.
fn tall_svd(a: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let (rows, cols) = (a.rows(), a.cols());
    // A QR step first shrinks tall problems to a square triangle.
    let (q, mut w) = if rows > cols {
        let (q, r) = frame_qr(a, true)?;
        (Some(q), r)
    } else {
        (None, a.clone())
    };
    let n = cols;
    // Pairs whose cosine is below n·ε are treated as orthogonal; a bare ε
    // test can cycle on rounding noise between tiny columns.
    let tol = EPS * n.max(1) as f64;
    let mut v = ComplexMatrix::identity(n);
    let max_sweeps = 100 * n.max(1);
    let mut converged = n < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        let mut rotated = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let na = norm(w.col(i));
                let nb = norm(w.col(j));
                let c = dot(w.col(i), w.col(j));
                let cabs = c.norm();
                if cabs == 0.0 || cabs <= tol * na * nb {
                    continue;
                }
                let phase = c.conj() / cabs;
                let zeta = (nb - na) * ((nb + na) / (2.0 * cabs));
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + math::hypot(1.0, zeta));
                // Subnormal columns can yield a rotation that rounds to the
                // identity; applying it would never terminate.
                if t == 0.0 {
                    continue;
                }
                rotated = true;
                let cs = 1.0 / math::hypot(1.0, t);
                let sn = cs * t;
                rotate(&mut w, i, j, cs, sn, phase);
                rotate(&mut v, i, j, cs, sn, phase);
            }
        }
        converged = !rotated;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let sig: Vec<f64> = (0..n).map(|j| norm(w.col(j))).collect();
    order.sort_by(|&x, &y| sig[y].total_cmp(&sig[x]).then(x.cmp(&y)));
    let s: Vec<f64> = order.iter().map(|&j| sig[j]).collect();

    let mut u = ComplexMatrix::zeros(n, 0);
    let mut vs = ComplexMatrix::zeros(n, 0);
    let mut pending = Vec::new();
    for (pos, &j) in order.iter().enumerate() {
        vs.push_col(v.col(j));
        let sj = sig[j];
        let mut col: Vec<C64> = w.col(j).to_vec();
        if sj > 0.0 {
            col.iter_mut().for_each(|z| *z /= sj);
            let cur = u.cols();
            reorthogonalize(&u, cur, &mut col);
            let nc = norm(&col);
            if nc > 0.5 {
                col.iter_mut().for_each(|z| *z /= nc);
                u.push_col(&col);
                continue;
            }
        }
        pending.push(pos);
        u.push_col(&vec![ZERO; n]);
    }
    if !pending.is_empty() {
        // Columns for zero singular values: complete the basis and drop the
        // new directions into the placeholder slots.
        let mut good = ComplexMatrix::zeros(n, 0);
        for j in 0..n {
            if !pending.contains(&j) {
                good.push_col(u.col(j));
            }
        }
        let have = good.cols();
        complete_orthonormal(&mut good, n);
        for (t, &pos) in pending.iter().enumerate() {
            let fill = good.col(have + t).to_vec();
            u.set_col(pos, &fill);
        }
    }
    let u = match q {
        Some(q) => q.matmul(&u)?,
        None => u,
    };
    Ok((u, s, vs))
}

/// Applies the column rotation
/// `[x, y] ← [cs·x − sn·e·y, sn·x + cs·e·y]` with `e = phase`.
fn rotate(m: &mut ComplexMatrix, i: usize, j: usize, cs: f64, sn: f64, phase: C64) {
    let rows = m.rows();
    let (lo, hi) = m.as_mut_slice().split_at_mut(j * rows);
    let x = &mut lo[i * rows..(i + 1) * rows];
    let y = &mut hi[..rows];
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let yb = phase * *b;
        let xa = *a;
        *a = xa * cs - yb * sn;
        *b = xa * sn + yb * cs;
    }
}

/// Householder QR with a non-negative real diagonal in `R`.
///
/// Economy mode requires `rows >= cols` and returns `Q: rows × cols`,
/// `R: cols × cols`; full mode returns `Q: rows × rows`, `R: rows × cols`.
pub fn frame_qr(a: &ComplexMatrix, economy: bool) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (rows, cols) = (a.rows(), a.cols());
    if economy && rows < cols {
        return Err(dim_mismatch(
            "frame_qr",
            format!("economy QR needs rows >= cols, got {rows}x{cols}"),
        ));
    }
    let mut r = a.clone();
    let steps = rows.min(cols);
    let mut reflectors: Vec<Option<Vec<C64>>> = Vec::with_capacity(steps);
    for k in 0..steps {
        let x = &r.col(k)[k..];
        let xnorm = norm(x);
        if x.len() < 2 || xnorm == 0.0 || norm(&x[1..]) == 0.0 {
            reflectors.push(None);
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 {
            ONE
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let mut v: Vec<C64> = x.to_vec();
        v[0] -= alpha;
        let vn = norm(&v);
        v.iter_mut().for_each(|z| *z /= vn);
        for j in k..cols {
            let col = &mut r.col_mut(j)[k..];
            let c = dot(&v, col) * 2.0;
            axpy_neg(col, c, &v);
        }
        for i in k + 1..rows {
            r[(i, k)] = ZERO;
        }
        reflectors.push(Some(v));
    }

    let qcols = if economy { cols } else { rows };
    let mut q = ComplexMatrix::eye(rows, qcols);
    for k in (0..steps).rev() {
        if let Some(v) = &reflectors[k] {
            for j in 0..qcols {
                let col = &mut q.col_mut(j)[k..];
                let c = dot(v, col) * 2.0;
                axpy_neg(col, c, v);
            }
        }
    }

    // Rotate each row of R so its diagonal is real and non-negative.
    for k in 0..steps {
        let d = r[(k, k)];
        let mag = d.norm();
        if mag == 0.0 {
            continue;
        }
        let phase = d.conj() / mag;
        for j in k..cols {
            r[(k, j)] *= phase;
        }
        r[(k, k)] = C64::new(mag, 0.0);
        let back = phase.conj();
        q.col_mut(k).iter_mut().for_each(|z| *z *= back);
    }
    let r = if economy {
        r.block(0..cols, 0..cols)
    } else {
        r
    };
    Ok((q, r))
}

fn check_triangular(r: &ComplexMatrix, b: &ComplexMatrix, op: &'static str) -> Result<()> {
    if r.rows() != r.cols() {
        return Err(dim_mismatch(
            op,
            format!("R must be square, got {}x{}", r.rows(), r.cols()),
        ));
    }
    if b.rows() != r.rows() {
        return Err(dim_mismatch(
            op,
            format!(
                "R is {}x{}, right-hand side has {} rows",
                r.rows(),
                r.cols(),
                b.rows()
            ),
        ));
    }
    let n = r.rows();
    let biggest = (0..n).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    for i in 0..n {
        if r[(i, i)].norm() <= 1e3 * EPS * biggest || biggest == 0.0 {
            return Err(Error::SingularFrame { frame: 0, pivot: i });
        }
    }
    Ok(())
}

/// Solves `R X = B` for upper-triangular `R` by back substitution.
///
/// The `frame` field of a [`Error::SingularFrame`] is 0; tensor-level
/// callers rewrite it.
pub fn frame_tri_solve(r: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_triangular(r, b, "frame_tri_solve")?;
    let n = r.rows();
    let mut x = b.clone();
    for j in 0..x.cols() {
        let col = x.col_mut(j);
        for i in (0..n).rev() {
            let mut acc = col[i];
            for t in i + 1..n {
                acc -= r[(i, t)] * col[t];
            }
            col[i] = acc / r[(i, i)];
        }
    }
    Ok(x)
}

/// Solves `Rᴴ X = B` for upper-triangular `R` by forward substitution.
pub fn frame_tri_solve_adjoint(r: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_triangular(r, b, "frame_tri_solve_adjoint")?;
    let n = r.rows();
    let mut x = b.clone();
    for j in 0..x.cols() {
        let col = x.col_mut(j);
        for i in 0..n {
            let mut acc = col[i];
            for t in 0..i {
                acc -= r[(t, i)].conj() * col[t];
            }
            col[i] = acc / r[(i, i)].conj();
        }
    }
    Ok(x)
}
