//! Tensor factorizations assembled from the frame kernels: t-SVD, truncated
//! t-SVD, t-QR, lateral slice normalization and tubal rank.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::{dim_mismatch, Error, Result};
use crate::frame::{self, frame_qr, frame_svd, ComplexMatrix};
use crate::math;
use crate::par::map_frames;
use crate::rng::NormalRng;
use crate::spectral::{fft3, ifft3, SpectralTensor};
use crate::tensor::{LateralSlice, Tensor3, Tube};
use crate::EPS;

/// Frame-wise SVD of a spectral tensor.
#[derive(Clone, Debug)]
pub struct SpectralSvd {
    pub u: SpectralTensor,
    /// `values[s][i]`: the `i`-th singular value of frame `s`, descending.
    pub values: Vec<Vec<f64>>,
    pub v: SpectralTensor,
}

impl SpectralSvd {
    pub fn rank(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Frobenius norm of singular tube `i`.
    pub fn sigma(&self, i: usize) -> f64 {
        let n = self.u.tubes();
        let total: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(s, vals)| self.u.weight(s) * vals[i] * vals[i])
            .sum();
        math::sqrt(total / n as f64)
    }

    /// First entry of singular tube `i`, `(1/n) Σ_s ŝ_i^(s)` over the full
    /// spectrum.
    pub fn first_entry(&self, i: usize) -> f64 {
        let n = self.u.tubes();
        let total: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(s, vals)| self.u.weight(s) * vals[i])
            .sum();
        total / n as f64
    }
}

/// SVD of every stored frame.
pub fn spectral_svd(a: &SpectralTensor, economy: bool) -> Result<SpectralSvd> {
    let (rows, cols, n) = a.dims();
    let parts = map_frames(a.frame_count(), |s| frame_svd(a.frame(s), economy))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (ur, vr) = match parts.first() {
        Some(p) => (p.u.cols(), p.v.cols()),
        None => (0, 0),
    };
    let mut u = Vec::with_capacity(parts.len());
    let mut v = Vec::with_capacity(parts.len());
    let mut values = Vec::with_capacity(parts.len());
    for p in parts {
        u.push(p.u);
        v.push(p.v);
        values.push(p.s);
    }
    Ok(SpectralSvd {
        u: SpectralTensor::from_frames(rows, ur, n, u)?,
        values,
        v: SpectralTensor::from_frames(cols, vr, n, v)?,
    })
}

/// t-SVD `A = U ⋆ S ⋆ Vᴴ`.
#[derive(Clone, Debug)]
pub struct TSvd {
    pub u: Tensor3,
    pub s: Tensor3,
    pub v: Tensor3,
    /// Per-frame singular values, `values[s][i]`, for frames `0..=n/2`.
    pub values: Vec<Vec<f64>>,
}

impl TSvd {
    /// Number of singular tubes.
    pub fn rank(&self) -> usize {
        self.s.rows().min(self.s.cols())
    }

    /// Singular tube `S(i, i, :)` (0-based).
    pub fn tube(&self, i: usize) -> Tube {
        self.s.tube(i, i)
    }

    /// `‖S(i, i, :)‖_F`
    pub fn sigma(&self, i: usize) -> f64 {
        self.tube(i).fnorm()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        (0..self.rank()).map(|i| self.sigma(i)).collect()
    }

    /// `U ⋆ S ⋆ Vᴴ`
    pub fn reconstruct(&self) -> Result<Tensor3> {
        let us = fft3(&self.u).mul(&fft3(&self.s))?;
        ifft3(&us.mul(&fft3(&self.v).adjoint())?)
    }
}

fn diag_spectrum(values: &[Vec<f64>], rows: usize, cols: usize, n: usize) -> SpectralTensor {
    let frames = values
        .iter()
        .map(|vals| {
            let mut m = ComplexMatrix::zeros(rows, cols);
            for (i, &x) in vals.iter().enumerate().take(rows.min(cols)) {
                m[(i, i)] = C64::new(x, 0.0);
            }
            m
        })
        .collect();
    SpectralTensor::from_frames_unchecked(rows, cols, n, frames)
}

fn assemble_tsvd(svd: SpectralSvd, s_rows: usize, s_cols: usize) -> Result<TSvd> {
    let n = svd.u.tubes();
    let s = diag_spectrum(&svd.values, s_rows, s_cols, n);
    Ok(TSvd {
        u: ifft3(&svd.u)?,
        s: ifft3(&s)?,
        v: ifft3(&svd.v)?,
        values: svd.values,
    })
}

/// Full or economy t-SVD. Economy returns `U: ℓ × r`, `S: r × r`,
/// `V: p × r` with `r = min(ℓ, p)`.
pub fn t_svd(a: &Tensor3, economy: bool) -> Result<TSvd> {
    let (l, p, _) = a.dims();
    let svd = spectral_svd(&fft3(a), economy)?;
    let (sr, sc) = if economy {
        (l.min(p), l.min(p))
    } else {
        (l, p)
    };
    assemble_tsvd(svd, sr, sc)
}

/// The leading `k` singular triplets, `A_k = Σ_{i<k} U⃗_i ⋆ 𝐬_i ⋆ V⃗_iᴴ`.
pub fn truncated_tsvd(a: &Tensor3, k: usize) -> Result<TSvd> {
    let (l, p, _) = a.dims();
    if k == 0 || k > l.min(p) {
        return Err(Error::IndexOutOfRange {
            index: k,
            bound: l.min(p),
        });
    }
    let mut svd = spectral_svd(&fft3(a), true)?;
    svd.u = svd.u.select_lateral(0..k);
    svd.v = svd.v.select_lateral(0..k);
    svd.values.iter_mut().for_each(|v| v.truncate(k));
    assemble_tsvd(svd, k, k)
}

/// t-QR `A = Q ⋆ R`.
#[derive(Clone, Debug)]
pub struct TQr {
    pub q: Tensor3,
    pub r: Tensor3,
}

/// Full or economy t-QR. Economy needs `ℓ ≥ p`.
pub fn t_qr(a: &Tensor3, economy: bool) -> Result<TQr> {
    let (l, p, n) = a.dims();
    if economy && l < p {
        return Err(dim_mismatch(
            "t_qr",
            format!("economy t-QR needs l >= p, got {l}x{p}"),
        ));
    }
    let spec = fft3(a);
    let parts = map_frames(spec.frame_count(), |s| frame_qr(spec.frame(s), economy))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (qc, rr) = if economy { (p, p) } else { (l, l) };
    let (qs, rs): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    Ok(TQr {
        q: ifft3(&SpectralTensor::from_frames(l, qc, n, qs)?)?,
        r: ifft3(&SpectralTensor::from_frames(rr, p, n, rs)?)?,
    })
}

/// Normalizes column `col` of every frame of `v` in place and returns the
/// per-frame norms.
///
/// A frame whose norm is at most `floor` is replaced with a random unit
/// vector, orthogonalized against the first `basis_cols` columns of `basis`
/// when given, and reported with norm 0. If the basis already spans the
/// whole frame the replacement is the zero vector.
pub(crate) fn normalize_frames(
    v: &mut SpectralTensor,
    basis: Option<&SpectralTensor>,
    basis_cols: usize,
    floor: f64,
    rng: &mut NormalRng,
) -> Vec<f64> {
    let rows = v.rows();
    let h = v.frame_count();
    let n = v.tubes();
    let mut norms = Vec::with_capacity(h);
    for s in 0..h {
        let real_frame = s == 0 || (n % 2 == 0 && s == n / 2);
        let col = v.frame_mut(s).col_mut(0);
        let nrm = frame::norm(col);
        if nrm > floor {
            col.iter_mut().for_each(|z| *z /= nrm);
            norms.push(nrm);
            continue;
        }
        let mut fresh: Vec<C64> = (0..rows)
            .map(|_| {
                let re = rng.normal();
                let im = if real_frame { 0.0 } else { rng.normal() };
                C64::new(re, im)
            })
            .collect();
        let start = frame::norm(&fresh);
        if let Some(b) = basis {
            frame::reorthogonalize(b.frame(s), basis_cols, &mut fresh);
        }
        let left = frame::norm(&fresh);
        if left > 1e-8 * start {
            fresh.iter_mut().for_each(|z| *z /= left);
        } else {
            fresh.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        }
        v.frame_mut(s).col_mut(0).copy_from_slice(&fresh);
        norms.push(0.0);
    }
    norms
}

/// Builds the real tube whose half spectrum is `norms`.
pub(crate) fn tube_from_spectrum(norms: &[f64], n: usize) -> Result<Tube> {
    let frames = norms
        .iter()
        .map(|&x| ComplexMatrix::from_diag(&[x]))
        .collect::<Vec<ComplexMatrix>>();
    Tube::from_tensor(ifft3(&SpectralTensor::from_frames(1, 1, n, frames)?)?)
}

/// Writes `X = Y ⋆ 𝐚` with `⟨Y, Y⟩ = 𝐞₁`.
///
/// Frame by frame, `â = ‖x̂‖` and `ŷ = x̂ / â`. Frames that vanish (relative
/// to the largest frame) are filled with a seeded random unit vector and
/// get `â = 0`, so `Y` is always of unit norm. A slice that vanishes in every
/// frame is reported as [`Error::ZeroSlice`].
pub fn normalize_slice(x: &LateralSlice, seed: u64) -> Result<(LateralSlice, Tube)> {
    let (l, _, n) = x.dims();
    let mut spec = fft3(x);
    let biggest = spec
        .frames()
        .iter()
        .map(|f| f.frobenius_norm())
        .fold(0.0, f64::max);
    if biggest == 0.0 {
        return Err(Error::ZeroSlice);
    }
    let floor = l as f64 * EPS * biggest;
    let mut rng = NormalRng::new(seed);
    let norms = normalize_frames(&mut spec, None, 0, floor, &mut rng);
    let y = LateralSlice::from_tensor(ifft3(&spec)?)?;
    Ok((y, tube_from_spectrum(&norms, n)?))
}

/// Default relative tolerance for [`tubal_rank`]: `max(ℓ, p) · ε`.
pub fn default_rank_tol(a: &Tensor3) -> f64 {
    a.rows().max(a.cols()) as f64 * EPS
}

/// Number of singular tubes with `‖𝐬_i‖_F > tol · ‖𝐬_1‖_F`.
pub fn tubal_rank(a: &Tensor3, tol: f64) -> Result<usize> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be non-negative, got {tol}"
        )));
    }
    let svd = spectral_svd(&fft3(a), true)?;
    let sig: Vec<f64> = (0..svd.rank()).map(|i| svd.sigma(i)).collect();
    let top = sig.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(sig.iter().filter(|&&x| x > tol * top).count())
}
