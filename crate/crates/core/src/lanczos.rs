//! Tensor Lanczos (Golub–Kahan) bidiagonalization under the t-product.
//!
//! In the Fourier domain the recurrence decouples into one matrix
//! Golub–Kahan process per stored frame. The frames share the step count,
//! so the tensor relations
//!
//! ```text
//! A ⋆ P_m  = Q_m ⋆ B_m
//! Aᴴ ⋆ Q_m = P_m ⋆ B_mᴴ + R⃗_m ⋆ E⃗_mᴴ,   R⃗_m = P⃗_{m+1} ⋆ 𝛃_m
//! ```
//!
//! hold frame by frame. Every new slice is reorthogonalized against the
//! whole basis with two passes of classical Gram–Schmidt.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::{dim_mismatch, Error, Result};
use crate::factor::{normalize_frames, tube_from_spectrum};
use crate::frame::{self, ComplexMatrix};
use crate::rng::NormalRng;
use crate::spectral::{fft3, frame_count, ifft3, SpectralTensor};
use crate::tensor::{LateralSlice, Tensor3, Tube};
use crate::EPS;

/// A linear map `X ↦ A ⋆ X` on lateral slices together with its adjoint.
///
/// Operands are passed in the half-spectrum form, so implementations that
/// hold the spectrum of `A` never transform back to the tube domain.
pub trait TensorOperator: Sync {
    /// `(ℓ, p, n)` of the represented `ℓ × p × n` tensor.
    fn dims(&self) -> (usize, usize, usize);

    /// `A ⋆ X` for `X` of size `p × c × n`.
    fn apply(&self, x: &SpectralTensor) -> Result<SpectralTensor>;

    /// `Aᴴ ⋆ Y` for `Y` of size `ℓ × c × n`.
    fn apply_adjoint(&self, y: &SpectralTensor) -> Result<SpectralTensor>;
}

/// Operator backed by a dense tensor, stored as its half spectrum.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    spectrum: SpectralTensor,
}

impl DenseOperator {
    pub fn new(a: &Tensor3) -> Self {
        Self { spectrum: fft3(a) }
    }

    pub fn from_spectrum(spectrum: SpectralTensor) -> Self {
        Self { spectrum }
    }

    pub fn spectrum(&self) -> &SpectralTensor {
        &self.spectrum
    }
}

impl TensorOperator for DenseOperator {
    fn dims(&self) -> (usize, usize, usize) {
        self.spectrum.dims()
    }

    fn apply(&self, x: &SpectralTensor) -> Result<SpectralTensor> {
        self.spectrum.mul(x)
    }

    fn apply_adjoint(&self, y: &SpectralTensor) -> Result<SpectralTensor> {
        self.spectrum.adjoint_mul(y)
    }
}

/// Operator given by a pair of callbacks on real tensors.
pub struct FnOperator<F, G> {
    dims: (usize, usize, usize),
    apply: F,
    apply_adjoint: G,
}

impl<F, G> FnOperator<F, G>
where
    F: Fn(&Tensor3) -> Result<Tensor3> + Sync,
    G: Fn(&Tensor3) -> Result<Tensor3> + Sync,
{
    /// `apply` maps `p × c × n` to `ℓ × c × n`; `apply_adjoint` the reverse.
    pub fn new(dims: (usize, usize, usize), apply: F, apply_adjoint: G) -> Self {
        Self {
            dims,
            apply,
            apply_adjoint,
        }
    }
}

impl<F, G> TensorOperator for FnOperator<F, G>
where
    F: Fn(&Tensor3) -> Result<Tensor3> + Sync,
    G: Fn(&Tensor3) -> Result<Tensor3> + Sync,
{
    fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    fn apply(&self, x: &SpectralTensor) -> Result<SpectralTensor> {
        Ok(fft3(&(self.apply)(&ifft3(x)?)?))
    }

    fn apply_adjoint(&self, y: &SpectralTensor) -> Result<SpectralTensor> {
        Ok(fft3(&(self.apply_adjoint)(&ifft3(y)?)?))
    }
}

/// Knobs for the bidiagonalization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosOptions {
    /// Two-pass reorthogonalization of every new slice. Turning it off is
    /// only useful to observe the loss of orthogonality.
    pub reorthogonalize: bool,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            reorthogonalize: true,
        }
    }
}

/// Errors of the bidiagonalization.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LanczosError {
    /// A normalization tube vanished in every frame at step `step`
    /// (1-based). The partial decomposition is exact and spans an invariant
    /// subspace.
    #[error("Lanczos breakdown at step {step}")]
    Breakdown {
        step: usize,
        partial: Box<BidiagDecomp>,
    },
    #[error(transparent)]
    Algebra(#[from] Error),
}

/// Partial decomposition `A ⋆ P_m = Q_m ⋆ B_m`,
/// `Aᴴ ⋆ Q_m = P_m ⋆ B_mᴴ + P⃗_{m+1} ⋆ 𝛃_m ⋆ E⃗_mᴴ`, kept frame by frame.
///
/// The core `B_m` is upper triangular in every frame. Straight from the
/// recurrence it is upper bidiagonal; after an augmentation its leading
/// block carries the arrowhead of the restart.
#[derive(Clone, Debug, PartialEq)]
pub struct BidiagDecomp {
    rows: usize,
    cols: usize,
    tubes: usize,
    pub(crate) p: Vec<ComplexMatrix>,
    pub(crate) q: Vec<ComplexMatrix>,
    pub(crate) core: Vec<ComplexMatrix>,
    /// Normalized residual direction `P⃗_{m+1}`, one column per frame.
    pub(crate) next: Vec<Vec<C64>>,
    /// `β̂_m` per frame.
    pub(crate) beta: Vec<f64>,
    /// Running maximum of the normalization factors, the scale for the
    /// degeneracy test.
    pub(crate) scale: f64,
}

/// Norm-based diagnostics of a decomposition, all measured as tensor
/// Frobenius norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompResiduals {
    /// `‖Pᴴ ⋆ P − I‖_F`
    pub p_orthogonality: f64,
    /// `‖Qᴴ ⋆ Q − I‖_F`
    pub q_orthogonality: f64,
    /// `‖A ⋆ P − Q ⋆ B‖_F / ‖A ⋆ P‖_F`
    pub forward: f64,
    /// `‖Aᴴ ⋆ Q − P ⋆ Bᴴ − R⃗ ⋆ E⃗ᴴ‖_F / ‖Aᴴ ⋆ Q‖_F`
    pub adjoint: f64,
    /// `‖Pᴴ ⋆ P⃗_{m+1}‖_F`
    pub residual_orthogonality: f64,
}

impl DecompResiduals {
    pub fn max(&self) -> f64 {
        self.p_orthogonality
            .max(self.q_orthogonality)
            .max(self.forward)
            .max(self.adjoint)
            .max(self.residual_orthogonality)
    }
}

fn weighted_norm(frames: &[ComplexMatrix], n: usize) -> f64 {
    let total: f64 = frames
        .iter()
        .enumerate()
        .map(|(s, f)| {
            let v = f.frobenius_norm();
            crate::spectral::frame_weight(s, n) * v * v
        })
        .sum();
    libm::sqrt(total / n as f64)
}

fn rel(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

impl BidiagDecomp {
    pub(crate) fn empty(rows: usize, cols: usize, tubes: usize) -> Self {
        let h = frame_count(tubes);
        Self {
            rows,
            cols,
            tubes,
            p: (0..h).map(|_| ComplexMatrix::zeros(cols, 0)).collect(),
            q: (0..h).map(|_| ComplexMatrix::zeros(rows, 0)).collect(),
            core: (0..h).map(|_| ComplexMatrix::zeros(0, 0)).collect(),
            next: vec![vec![C64::new(0.0, 0.0); cols]; h],
            beta: vec![0.0; h],
            scale: 0.0,
        }
    }

    /// Assembles a decomposition from per-frame parts.
    pub(crate) fn from_parts(
        dims: (usize, usize, usize),
        p: Vec<ComplexMatrix>,
        q: Vec<ComplexMatrix>,
        core: Vec<ComplexMatrix>,
        next: Vec<Vec<C64>>,
        beta: Vec<f64>,
        scale: f64,
    ) -> Self {
        let (rows, cols, tubes) = dims;
        Self {
            rows,
            cols,
            tubes,
            p,
            q,
            core,
            next,
            beta,
            scale,
        }
    }

    /// Number of lateral slices in each basis.
    pub fn steps(&self) -> usize {
        self.q[0].cols()
    }

    /// `(ℓ, p, n)` of the operator.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.tubes)
    }

    pub fn frame_count(&self) -> usize {
        self.core.len()
    }

    /// `β̂_m` of every stored frame.
    pub fn beta_spectrum(&self) -> &[f64] {
        &self.beta
    }

    pub fn p_spectral(&self) -> SpectralTensor {
        SpectralTensor::from_frames_unchecked(self.cols, self.steps(), self.tubes, self.p.clone())
    }

    pub fn q_spectral(&self) -> SpectralTensor {
        SpectralTensor::from_frames_unchecked(self.rows, self.steps(), self.tubes, self.q.clone())
    }

    pub fn core_spectral(&self) -> SpectralTensor {
        let m = self.steps();
        SpectralTensor::from_frames_unchecked(m, m, self.tubes, self.core.clone())
    }

    pub fn next_spectral(&self) -> SpectralTensor {
        let frames = self
            .next
            .iter()
            .map(|v| ComplexMatrix::from_column_major(self.cols, 1, v.clone()).expect("finite"))
            .collect();
        SpectralTensor::from_frames_unchecked(self.cols, 1, self.tubes, frames)
    }

    /// Right basis `P_m`, `p × m × n`.
    pub fn p_tensor(&self) -> Result<Tensor3> {
        ifft3(&self.p_spectral())
    }

    /// Left basis `Q_m`, `ℓ × m × n`.
    pub fn q_tensor(&self) -> Result<Tensor3> {
        ifft3(&self.q_spectral())
    }

    /// Core `B_m`, `m × m × n`.
    pub fn core_tensor(&self) -> Result<Tensor3> {
        ifft3(&self.core_spectral())
    }

    /// Normalized residual slice `P⃗_{m+1}`.
    pub fn residual_slice(&self) -> Result<LateralSlice> {
        LateralSlice::from_tensor(ifft3(&self.next_spectral())?)
    }

    /// Residual tube `𝛃_m`.
    pub fn beta_m(&self) -> Result<Tube> {
        tube_from_spectrum(&self.beta, self.tubes)
    }

    /// Unnormalized residual `R⃗_m = P⃗_{m+1} ⋆ 𝛃_m`.
    pub fn residual(&self) -> Result<LateralSlice> {
        let mut spec = self.next_spectral();
        for (s, b) in self.beta.iter().enumerate() {
            spec.frame_mut(s)
                .col_mut(0)
                .iter_mut()
                .for_each(|z| *z *= *b);
        }
        LateralSlice::from_tensor(ifft3(&spec)?)
    }

    /// The diagonal and superdiagonal tubes of the core.
    pub fn bidiag(&self) -> Result<BidiagTensor> {
        let m = self.steps();
        let tube = |i: usize, j: usize| -> Result<Tube> {
            let vals: Vec<C64> = self.core.iter().map(|f| f[(i, j)]).collect();
            let frames = vals
                .into_iter()
                .map(|z| ComplexMatrix::from_column_major(1, 1, vec![z]))
                .collect::<Result<Vec<_>>>()?;
            Tube::from_tensor(ifft3(&SpectralTensor::from_frames(
                1, 1, self.tubes, frames,
            )?)?)
        };
        let alphas = (0..m).map(|i| tube(i, i)).collect::<Result<Vec<_>>>()?;
        let betas = (1..m).map(|j| tube(j - 1, j)).collect::<Result<Vec<_>>>()?;
        Ok(BidiagTensor {
            alphas,
            betas,
            beta_m: self.beta_m()?,
        })
    }

    /// Evaluates both decomposition relations and the orthogonality of the
    /// bases against `op`.
    pub fn check(&self, op: &dyn TensorOperator) -> Result<DecompResiduals> {
        let m = self.steps();
        let n = self.tubes;
        let p = self.p_spectral();
        let q = self.q_spectral();
        let b = self.core_spectral();
        let eye = |frames: &SpectralTensor| -> Vec<ComplexMatrix> {
            frames
                .frames()
                .iter()
                .map(|g| g.sub(&ComplexMatrix::identity(m)).expect("square Gram"))
                .collect()
        };
        let p_orth = weighted_norm(&eye(&p.adjoint_mul(&p)?), n);
        let q_orth = weighted_norm(&eye(&q.adjoint_mul(&q)?), n);

        let ap = op.apply(&p)?;
        let fwd = ap.sub(&q.mul(&b)?)?;
        let forward = rel(fwd.fnorm(), ap.fnorm());

        let ahq = op.apply_adjoint(&q)?;
        let mut adj = ahq.sub(&p.mul(&b.adjoint())?)?;
        for s in 0..self.frame_count() {
            let bs = self.beta[s];
            let col = adj.frame_mut(s).col_mut(m - 1);
            for (z, r) in col.iter_mut().zip(&self.next[s]) {
                *z -= r * bs;
            }
        }
        let adjoint = rel(adj.fnorm(), ahq.fnorm());

        let ph_r = p.adjoint_mul(&self.next_spectral())?;
        Ok(DecompResiduals {
            p_orthogonality: p_orth,
            q_orthogonality: q_orth,
            forward,
            adjoint,
            residual_orthogonality: ph_r.fnorm(),
        })
    }
}

/// Diagonal tubes `𝛂_1..𝛂_m`, superdiagonal tubes `𝛃_1..𝛃_{m−1}` and the
/// residual tube `𝛃_m` of a bidiagonal core.
#[derive(Clone, Debug, PartialEq)]
pub struct BidiagTensor {
    pub alphas: Vec<Tube>,
    pub betas: Vec<Tube>,
    pub beta_m: Tube,
}

impl BidiagTensor {
    pub fn m(&self) -> usize {
        self.alphas.len()
    }

    /// `B_m` as an `m × m × n` tensor.
    pub fn to_tensor(&self) -> Result<Tensor3> {
        self.build(self.m())
    }

    /// `B_{m,m+1} = [B_m, 𝛃_m ⋆ E⃗_m]`, an `m × (m+1) × n` tensor.
    pub fn extended(&self) -> Result<Tensor3> {
        self.build(self.m() + 1)
    }

    fn build(&self, cols: usize) -> Result<Tensor3> {
        let m = self.m();
        let n = self.beta_m.len();
        let mut t = Tensor3::zeros(m, cols, n)?;
        for k in 0..n {
            for (i, a) in self.alphas.iter().enumerate() {
                t.set(i, i, k, a.values()[k]);
            }
            for (j, b) in self.betas.iter().enumerate() {
                t.set(j, j + 1, k, b.values()[k]);
            }
            if cols > m {
                t.set(m - 1, m, k, self.beta_m.values()[k]);
            }
        }
        Ok(t)
    }
}

/// Whether a normalization tube vanished in every frame.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct StepOutcome {
    pub alpha_breakdown: bool,
    pub beta_breakdown: bool,
}

/// Threshold below which a frame of a freshly computed slice counts as zero.
pub(crate) fn degeneracy_floor(dims: (usize, usize, usize), scale: f64, current: f64) -> f64 {
    let (l, p, _) = dims;
    l.max(p) as f64 * EPS * scale.max(current)
}

pub(crate) fn column_spectrum(cols: &[Vec<C64>], rows: usize, n: usize) -> SpectralTensor {
    let frames = cols
        .iter()
        .map(|v| {
            let mut m = ComplexMatrix::zeros(rows, 1);
            m.col_mut(0).copy_from_slice(v);
            m
        })
        .collect();
    SpectralTensor::from_frames_unchecked(rows, 1, n, frames)
}

/// Normalizes a single-column spectral tensor against an optional basis
/// and returns the per-frame norms and whether every frame degenerated.
pub(crate) fn normalize_against(
    v: &mut SpectralTensor,
    basis: &[ComplexMatrix],
    dims: (usize, usize, usize),
    scale: &mut f64,
    rng: &mut NormalRng,
) -> (Vec<f64>, bool) {
    let current = v
        .frames()
        .iter()
        .map(|f| frame::norm(f.col(0)))
        .fold(0.0, f64::max);
    let floor = degeneracy_floor(dims, *scale, current);
    let cols = basis[0].cols();
    let b = SpectralTensor::from_frames_unchecked(basis[0].rows(), cols, v.tubes(), basis.to_vec());
    let norms = normalize_frames(v, Some(&b), cols, floor, rng);
    let top = norms.iter().copied().fold(0.0, f64::max);
    *scale = scale.max(top);
    (norms, top == 0.0)
}

/// One Lanczos step: adds `P⃗_{j+1}` (the current residual direction) to the
/// right basis, then computes `Q⃗_{j+1}`, its diagonal tube and the next
/// residual.
pub(crate) fn lanczos_step(
    op: &dyn TensorOperator,
    d: &mut BidiagDecomp,
    rng: &mut NormalRng,
    opts: LanczosOptions,
) -> Result<StepOutcome> {
    let dims = d.dims();
    let (l, p, n) = dims;
    let h = d.frame_count();
    let j = d.steps();
    for s in 0..h {
        let v = d.next[s].clone();
        d.p[s].push_col(&v);
    }

    let mut w = op.apply(&column_spectrum(&d.next, p, n))?;
    if w.dims() != (l, 1, n) {
        return Err(dim_mismatch(
            "TensorOperator::apply",
            format!("returned {:?}", w.dims()),
        ));
    }
    if j > 0 {
        for s in 0..h {
            let bs = d.beta[s];
            let col = w.frame_mut(s).col_mut(0);
            frame::axpy_neg(col, C64::new(bs, 0.0), d.q[s].col(j - 1));
        }
    }
    if opts.reorthogonalize {
        for s in 0..h {
            frame::reorthogonalize(&d.q[s], j, w.frame_mut(s).col_mut(0));
        }
    }
    let (alphas, alpha_breakdown) = normalize_against(&mut w, &d.q, dims, &mut d.scale, rng);

    for s in 0..h {
        d.q[s].push_col(w.frame(s).col(0));
        let mut core = d.core[s].resized(j + 1, j + 1);
        if j > 0 {
            core[(j - 1, j)] = C64::new(d.beta[s], 0.0);
        }
        core[(j, j)] = C64::new(alphas[s], 0.0);
        d.core[s] = core;
    }

    let (r, beta_breakdown) = residual_step(op, d, opts, rng)?;
    d.next = r;
    Ok(StepOutcome {
        alpha_breakdown,
        beta_breakdown,
    })
}

/// Computes `Aᴴ ⋆ Q⃗_{j} − P⃗_{j} ⋆ conj(B(j, j))`, reorthogonalizes it
/// against the right basis, normalizes it and stores the norms in
/// `d.beta`. Returns the new directions and whether the tube vanished.
pub(crate) fn residual_step(
    op: &dyn TensorOperator,
    d: &mut BidiagDecomp,
    opts: LanczosOptions,
    rng: &mut NormalRng,
) -> Result<(Vec<Vec<C64>>, bool)> {
    let dims = d.dims();
    let (l, p, n) = dims;
    let h = d.frame_count();
    let j = d.steps();
    let last_q: Vec<Vec<C64>> = (0..h).map(|s| d.q[s].col(j - 1).to_vec()).collect();
    let mut r = op.apply_adjoint(&column_spectrum(&last_q, l, n))?;
    if r.dims() != (p, 1, n) {
        return Err(dim_mismatch(
            "TensorOperator::apply_adjoint",
            format!("returned {:?}", r.dims()),
        ));
    }
    for s in 0..h {
        let corner = d.core[s][(j - 1, j - 1)].conj();
        let col = r.frame_mut(s).col_mut(0);
        frame::axpy_neg(col, corner, d.p[s].col(j - 1));
        if opts.reorthogonalize {
            frame::reorthogonalize(&d.p[s], j, col);
        }
    }
    let (betas, breakdown) = normalize_against(&mut r, &d.p, dims, &mut d.scale, rng);
    d.beta = betas;
    Ok((
        (0..h).map(|s| r.frame(s).col(0).to_vec()).collect(),
        breakdown,
    ))
}

/// Runs Lanczos steps until the decomposition has `target` slices.
///
/// Breakdowns are not fatal here: the vanished tube is kept as zero and a
/// random direction orthogonal to the basis continues the recurrence. The
/// first breakdown step (1-based) is returned.
pub(crate) fn grow(
    op: &dyn TensorOperator,
    d: &mut BidiagDecomp,
    target: usize,
    rng: &mut NormalRng,
    opts: LanczosOptions,
) -> Result<Option<usize>> {
    let mut first = None;
    while d.steps() < target {
        let out = lanczos_step(op, d, rng, opts)?;
        if (out.alpha_breakdown || out.beta_breakdown) && first.is_none() {
            first = Some(d.steps());
        }
    }
    Ok(first)
}

fn check_start(op: &dyn TensorOperator, p1: &LateralSlice, m: usize) -> Result<SpectralTensor> {
    let (l, p, n) = op.dims();
    if p1.rows() != p || p1.tubes() != n {
        return Err(dim_mismatch(
            "lanczos_bidiag",
            format!("start slice {:?} for a {l}x{p}x{n} operator", p1.dims()),
        ));
    }
    if m == 0 || m > l.min(p) {
        return Err(Error::IndexOutOfRange {
            index: m,
            bound: l.min(p),
        });
    }
    let spec = fft3(p1);
    for f in spec.frames() {
        let nrm = frame::norm(f.col(0));
        if (nrm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "start slice must have unit norm in every frame (found frame norm {nrm})"
            )));
        }
    }
    Ok(spec)
}

/// Decomposition with the start slice loaded as the residual direction and
/// no steps taken yet.
pub(crate) fn seed_decomp(op: &dyn TensorOperator, start: &SpectralTensor) -> BidiagDecomp {
    let (l, p, n) = op.dims();
    let mut d = BidiagDecomp::empty(l, p, n);
    d.next = start.frames().iter().map(|f| f.col(0).to_vec()).collect();
    d
}

/// `m` steps of tensor Lanczos bidiagonalization started from the unit
/// slice `p1`.
///
/// `seed` drives the random directions that replace vanished frames.
pub fn lanczos_bidiag(
    op: &dyn TensorOperator,
    p1: &LateralSlice,
    m: usize,
    seed: u64,
) -> Result<BidiagDecomp, LanczosError> {
    lanczos_bidiag_with(op, p1, m, seed, LanczosOptions::default())
}

/// [`lanczos_bidiag`] with explicit options.
pub fn lanczos_bidiag_with(
    op: &dyn TensorOperator,
    p1: &LateralSlice,
    m: usize,
    seed: u64,
    opts: LanczosOptions,
) -> Result<BidiagDecomp, LanczosError> {
    let start = check_start(op, p1, m)?;
    let d = seed_decomp(op, &start);
    let mut rng = NormalRng::new(seed);
    run_until_breakdown(op, d, m, &mut rng, opts)
}

fn run_until_breakdown(
    op: &dyn TensorOperator,
    mut d: BidiagDecomp,
    target: usize,
    rng: &mut NormalRng,
    opts: LanczosOptions,
) -> Result<BidiagDecomp, LanczosError> {
    while d.steps() < target {
        let out = lanczos_step(op, &mut d, rng, opts)?;
        if out.alpha_breakdown || out.beta_breakdown {
            return Err(LanczosError::Breakdown {
                step: d.steps(),
                partial: Box::new(d),
            });
        }
    }
    Ok(d)
}

/// Grows an augmented decomposition (`k + 1` slices, upper-triangular core,
/// residual `P⃗_{k+2}`) back to `target_m` slices with the same recurrence.
/// The existing slices and core entries are left untouched.
pub fn extend_bidiag(
    op: &dyn TensorOperator,
    d: BidiagDecomp,
    target_m: usize,
    seed: u64,
) -> Result<BidiagDecomp, LanczosError> {
    let (l, p, _) = d.dims();
    if target_m < d.steps() || target_m > l.min(p) {
        return Err(Error::IndexOutOfRange {
            index: target_m,
            bound: l.min(p),
        }
        .into());
    }
    let mut rng = NormalRng::new(seed);
    run_until_breakdown(op, d, target_m, &mut rng, LanczosOptions::default())
}
