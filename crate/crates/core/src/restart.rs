//! Restarted tensor Lanczos bidiagonalization.
//!
//! After `m` Lanczos steps the core `B_m` is decomposed, the `k` wanted
//! triplets are tested against the residual bound, and the basis is
//! rebuilt from `k + 1` lateral slices: either the Ritz slices plus the
//! residual direction, or (for the smallest triplets) the harmonic Ritz
//! slices plus the harmonic residual. The recurrence then extends the
//! rebuilt decomposition back to `m` slices.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::factor::{normalize_frames, spectral_svd, t_svd, SpectralSvd, TSvd};
use crate::frame::{
    self, frame_qr, frame_svd, frame_tri_solve, frame_tri_solve_adjoint, ComplexMatrix,
};
use crate::lanczos::{
    column_spectrum, grow, normalize_against, residual_step, seed_decomp, BidiagDecomp,
    LanczosOptions, TensorOperator,
};
use crate::math;
use crate::rng::NormalRng;
use crate::spectral::{fft3, ifft3, SpectralTensor};
use crate::tensor::{LateralSlice, Tensor3, Tube};
use crate::EPS;

/// Which end of the spectrum to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Largest,
    Smallest,
}

/// How the basis is rebuilt at a restart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Augmentation {
    Ritz,
    /// Harmonic Ritz slices. Only used with [`Mode::Smallest`] and a well
    /// conditioned core; otherwise the solver augments with Ritz slices.
    Harmonic,
}

/// Parameters of [`tlbr`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Number of wanted triplets.
    pub k: usize,
    /// Maximum number of Lanczos slices kept between restarts.
    pub m: usize,
    /// Relative acceptance tolerance.
    pub delta: f64,
    /// Cap on the number of iterations (core decompositions).
    pub max_restarts: usize,
    pub mode: Mode,
    pub augmentation: Augmentation,
    /// Seed for the random directions that replace vanished frames.
    pub seed: u64,
    /// Largest frame condition number of `B_m` for which harmonic
    /// augmentation is attempted.
    pub kappa_threshold: f64,
    /// Start slice; defaults to the normalized all-ones slice.
    pub start: Option<LateralSlice>,
    /// Re-check the decomposition relations after every augmentation.
    pub verify: bool,
}

impl SolverConfig {
    pub fn new(k: usize, m: usize) -> Self {
        Self {
            k,
            m,
            delta: 1e-8,
            max_restarts: 200,
            mode: Mode::Largest,
            augmentation: Augmentation::Ritz,
            seed: 0,
            kappa_threshold: 1.0 / math::sqrt(EPS),
            start: None,
            verify: true,
        }
    }

    pub fn mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn augmentation(mut self, augmentation: Augmentation) -> Self {
        self.augmentation = augmentation;
        self
    }

    pub fn delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn max_restarts(mut self, max_restarts: usize) -> Self {
        self.max_restarts = max_restarts;
        self
    }

    /// Checks the configuration against an operator of size `ℓ × p × n`.
    pub fn validate(&self, dims: (usize, usize, usize)) -> Result<(), SolverError> {
        let (l, p, n) = dims;
        let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
        if self.k == 0 || self.k >= self.m {
            return bad(format!("need 1 <= k < m, got k={} m={}", self.k, self.m));
        }
        if self.m > l.min(p) {
            return bad(format!("m={} exceeds min(l, p)={}", self.m, l.min(p)));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if self.max_restarts == 0 {
            return bad("max_restarts must be at least 1".into());
        }
        if !(self.kappa_threshold > 0.0) {
            return bad(format!(
                "kappa_threshold must be positive, got {}",
                self.kappa_threshold
            ));
        }
        if let Some(s) = &self.start {
            if s.dims() != (p, 1, n) {
                return bad(format!(
                    "start slice is {:?}, expected ({p}, 1, {n})",
                    s.dims()
                ));
            }
        }
        Ok(())
    }
}

/// Column indices of the core SVD holding the wanted triplets, in
/// reporting order.
pub fn wanted_indices(m: usize, k: usize, mode: Mode) -> Vec<usize> {
    match mode {
        Mode::Largest => (0..k).collect(),
        Mode::Smallest => (0..k).map(|i| m - 1 - i).collect(),
    }
}

/// t-SVD of a core tensor (`m × m × n` or `m × (m+1) × n`).
pub fn small_svd_of_core(b: &Tensor3) -> Result<TSvd> {
    t_svd(b, false)
}

/// Outcome of the residual test.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceCheck {
    /// `‖R⃗_m ⋆ E⃗_mᴴ ⋆ U⃗_i‖_F` per wanted triplet.
    pub bounds: Vec<f64>,
    /// `δ · (𝐬_1)^(1)`, the acceptance threshold.
    pub threshold: f64,
    pub converged: Vec<bool>,
}

/// Residual bounds of the `k` wanted Ritz triplets of `d`.
///
/// `svd` must be the frame-wise SVD of the core of `d`. Triplet `i` is
/// accepted when its bound is at most `delta` times the first entry of the
/// largest singular tube.
pub fn check_convergence(
    d: &BidiagDecomp,
    svd: &SpectralSvd,
    k: usize,
    delta: f64,
    mode: Mode,
) -> ConvergenceCheck {
    let m = d.steps();
    let n = d.dims().2;
    let idx = wanted_indices(m, k, mode);
    let bounds: Vec<f64> = idx
        .iter()
        .map(|&c| {
            let total: f64 = (0..d.frame_count())
                .map(|s| {
                    let b = d.beta[s];
                    let u = svd.u.frame(s)[(m - 1, c)].norm();
                    let r = frame::norm_sqr(&d.next[s]);
                    svd.u.weight(s) * b * b * u * u * r
                })
                .sum();
            math::sqrt(total / n as f64)
        })
        .collect();
    let threshold = delta * svd.first_entry(0);
    let converged = bounds.iter().map(|&b| b <= threshold).collect();
    ConvergenceCheck {
        bounds,
        threshold,
        converged,
    }
}

/// A decomposition with `k + 1` slices produced by an augmentation.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedState {
    decomp: BidiagDecomp,
}

impl AugmentedState {
    pub fn decomp(&self) -> &BidiagDecomp {
        &self.decomp
    }

    pub fn into_decomp(self) -> BidiagDecomp {
        self.decomp
    }
}

/// Failures of an augmentation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AugmentError {
    /// The residual tube of the augmented decomposition vanished: the
    /// retained slices span an invariant subspace. The state is still a valid
    /// decomposition.
    #[error("augmented residual vanished; retained triplets are exact")]
    BreakdownExact(Box<AugmentedState>),
    /// A frame of `B_m` could not be inverted.
    #[error("core frame {frame} is singular")]
    SingularCore { frame: usize },
    #[error(transparent)]
    Algebra(#[from] Error),
}

/// Rebuilds the decomposition from the `k` wanted Ritz triplets and the
/// residual direction `P⃗_{m+1}`.
pub fn ritz_augment(
    op: &dyn TensorOperator,
    d: &BidiagDecomp,
    svd: &SpectralSvd,
    k: usize,
    mode: Mode,
    rng: &mut NormalRng,
) -> Result<AugmentedState, AugmentError> {
    let m = d.steps();
    if k == 0 || k >= m {
        return Err(Error::IndexOutOfRange { index: k, bound: m }.into());
    }
    let dims = d.dims();
    let (_, p, n) = dims;
    let h = d.frame_count();
    let idx = wanted_indices(m, k, mode);

    let mut p_new = Vec::with_capacity(h);
    let mut q_new = Vec::with_capacity(h);
    let mut rho = Vec::with_capacity(h);
    for s in 0..h {
        let u = svd.u.frame(s);
        let v = svd.v.frame(s);
        let uk = ComplexMatrix::from_fn(m, k, |i, j| u[(i, idx[j])]);
        let vk = ComplexMatrix::from_fn(m, k, |i, j| v[(i, idx[j])]);
        let mut pk = d.p[s].matmul(&vk)?;
        pk.push_col(&d.next[s]);
        p_new.push(pk);
        q_new.push(d.q[s].matmul(&uk)?);
        let b = d.beta[s];
        rho.push(
            (0..k)
                .map(|j| uk[(m - 1, j)].conj() * b)
                .collect::<Vec<C64>>(),
        );
    }

    let mut w = op.apply(&column_spectrum(&d.next, p, n))?;
    for s in 0..h {
        let col = w.frame_mut(s).col_mut(0);
        for (j, r) in rho[s].iter().enumerate() {
            frame::axpy_neg(col, *r, q_new[s].col(j));
        }
        let extra = frame::reorthogonalize(&q_new[s], k, col);
        for (r, e) in rho[s].iter_mut().zip(extra) {
            *r += e;
        }
    }
    let mut scale = d.scale;
    let (alphas, _) = normalize_against(&mut w, &q_new, dims, &mut scale, rng);

    let mut core = Vec::with_capacity(h);
    for s in 0..h {
        q_new[s].push_col(w.frame(s).col(0));
        let mut b = ComplexMatrix::zeros(k + 1, k + 1);
        for (j, &c) in idx.iter().enumerate() {
            b[(j, j)] = C64::new(svd.values[s][c], 0.0);
            b[(j, k)] = rho[s][j];
        }
        b[(k, k)] = C64::new(alphas[s], 0.0);
        core.push(b);
    }
    finish_augment(op, dims, p_new, q_new, core, scale, rng)
}

/// Attaches the residual of the rebuilt decomposition.
fn finish_augment(
    op: &dyn TensorOperator,
    dims: (usize, usize, usize),
    p: Vec<ComplexMatrix>,
    q: Vec<ComplexMatrix>,
    core: Vec<ComplexMatrix>,
    scale: f64,
    rng: &mut NormalRng,
) -> Result<AugmentedState, AugmentError> {
    let h = p.len();
    let cols = dims.1;
    let mut decomp = BidiagDecomp::from_parts(
        dims,
        p,
        q,
        core,
        vec![vec![C64::new(0.0, 0.0); cols]; h],
        vec![0.0; h],
        scale,
    );
    let (next, breakdown) = residual_step(op, &mut decomp, LanczosOptions::default(), rng)?;
    decomp.next = next;
    let state = AugmentedState { decomp };
    if breakdown {
        return Err(AugmentError::BreakdownExact(Box::new(state)));
    }
    Ok(state)
}

/// Largest condition number over the frames of the core, from its singular
/// values.
pub fn core_condition(svd: &SpectralSvd) -> f64 {
    svd.values
        .iter()
        .map(|v| {
            let top = v.first().copied().unwrap_or(0.0);
            let low = v.last().copied().unwrap_or(0.0);
            if low > 0.0 {
                top / low
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Rebuilds the decomposition from the `k` smallest harmonic Ritz slices and
/// the harmonic residual.
///
/// Every frame of `B_m` must be invertible; a singular frame is reported as
/// [`AugmentError::SingularCore`] so the caller can fall back to
/// [`ritz_augment`].
pub fn harmonic_augment(
    op: &dyn TensorOperator,
    d: &BidiagDecomp,
    k: usize,
    rng: &mut NormalRng,
) -> Result<AugmentedState, AugmentError> {
    let m = d.steps();
    if k == 0 || k >= m {
        return Err(Error::IndexOutOfRange { index: k, bound: m }.into());
    }
    let dims = d.dims();
    let (_, p, n) = dims;
    let h = d.frame_count();
    let singular = |frame: usize| {
        move |e: Error| match e {
            Error::SingularFrame { .. } => AugmentError::SingularCore { frame },
            other => AugmentError::Algebra(other),
        }
    };

    let mut p_new = Vec::with_capacity(h);
    let mut q_new = Vec::with_capacity(h);
    let mut small = Vec::with_capacity(h);
    let mut r_fac = Vec::with_capacity(h);
    for s in 0..h {
        let b = &d.core[s];
        let beta = d.beta[s];
        let mut ext = b.resized(m, m + 1);
        ext[(m - 1, m)] = C64::new(beta, 0.0);
        let svd = frame_svd(&ext, true)?;
        let idx: Vec<usize> = (0..k).map(|i| m - 1 - i).collect();
        let uk = ComplexMatrix::from_fn(m, k, |i, j| svd.u[(i, idx[j])]);
        let sk: Vec<f64> = idx.iter().map(|&c| svd.s[c]).collect();

        let us = ComplexMatrix::from_fn(m, k, |i, j| uk[(i, j)] * sk[j]);
        let x = frame_tri_solve(b, &us).map_err(singular(s))?;
        let mut em = ComplexMatrix::zeros(m, 1);
        em[(m - 1, 0)] = C64::new(beta, 0.0);
        let y = frame_tri_solve(b, &em).map_err(singular(s))?;

        let mut j = ComplexMatrix::zeros(m + 1, k + 1);
        j.set_block(0, 0, &x);
        for i in 0..m {
            j[(i, k)] = -y[(i, 0)];
        }
        j[(m, k)] = C64::new(1.0, 0.0);
        let (qj, rj) = frame_qr(&j, true)?;
        let pivot = (0..=k).map(|i| rj[(i, i)].re).fold(f64::INFINITY, f64::min);
        let top = (0..=k).map(|i| rj[(i, i)].re).fold(0.0, f64::max);
        if !(pivot > 1e3 * EPS * top) {
            return Err(AugmentError::SingularCore { frame: s });
        }

        let mut pm1 = d.p[s].clone();
        pm1.push_col(&d.next[s]);
        p_new.push(pm1.matmul(&qj)?);
        q_new.push(d.q[s].matmul(&uk)?);
        small.push(sk);
        r_fac.push(rj);
    }

    let mut w = op.apply(&column_spectrum(&d.next, p, n))?;
    let mut gamma = Vec::with_capacity(h);
    for s in 0..h {
        let col = w.frame_mut(s).col_mut(0);
        frame::axpy_neg(col, C64::new(d.beta[s], 0.0), d.q[s].col(m - 1));
        gamma.push(frame::reorthogonalize(&q_new[s], k, col));
    }
    let mut scale = d.scale;
    let (alphas, _) = normalize_against(&mut w, &q_new, dims, &mut scale, rng);

    let mut core = Vec::with_capacity(h);
    for s in 0..h {
        q_new[s].push_col(w.frame(s).col(0));
        let mut mm = ComplexMatrix::zeros(k + 1, k + 1);
        for j in 0..k {
            mm[(j, j)] = C64::new(small[s][j], 0.0);
            mm[(j, k)] = gamma[s][j];
        }
        mm[(k, k)] = C64::new(alphas[s], 0.0);
        // B = M R⁻¹, computed as (R⁻ᴴ Mᴴ)ᴴ.
        let bh = frame_tri_solve_adjoint(&r_fac[s], &mm.adjoint()).map_err(singular(s))?;
        let mut b = bh.adjoint();
        for jj in 0..=k {
            for ii in jj + 1..=k {
                b[(ii, jj)] = C64::new(0.0, 0.0);
            }
        }
        core.push(b);
    }
    finish_augment(op, dims, p_new, q_new, core, scale, rng)
}

/// Approximate singular triplets `{𝐬_i, U⃗_i, V⃗_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TripletSet {
    pub mode: Mode,
    /// Left slices, `ℓ × k × n`.
    pub u: Tensor3,
    /// Right slices, `p × k × n`.
    pub v: Tensor3,
    /// Singular tubes.
    pub s: Vec<Tube>,
    /// Residual bound of each triplet at the last check.
    pub bounds: Vec<f64>,
    pub converged: Vec<bool>,
}

impl TripletSet {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn u_slice(&self, i: usize) -> LateralSlice {
        self.u.lateral(i)
    }

    pub fn v_slice(&self, i: usize) -> LateralSlice {
        self.v.lateral(i)
    }

    /// `‖𝐬_i‖_F`
    pub fn sigma(&self, i: usize) -> f64 {
        self.s[i].fnorm()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.sigma(i)).collect()
    }

    /// The singular tubes as an f-diagonal `k × k × n` tensor.
    pub fn s_tensor(&self) -> Result<Tensor3> {
        let k = self.len();
        let n = self.u.tubes();
        let mut t = Tensor3::zeros(k, k, n)?;
        for (i, tube) in self.s.iter().enumerate() {
            for (kk, &x) in tube.values().iter().enumerate() {
                t.set(i, i, kk, x);
            }
        }
        Ok(t)
    }

    /// `Σ_i U⃗_i ⋆ 𝐬_i ⋆ V⃗_iᴴ`
    pub fn reconstruct(&self) -> Result<Tensor3> {
        let us = fft3(&self.u).mul(&fft3(&self.s_tensor()?))?;
        ifft3(&us.mul(&fft3(&self.v).adjoint())?)
    }
}

/// One row of the convergence history.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryRecord {
    /// Iteration number, starting at 1.
    pub restart: usize,
    /// Triplet position in reporting order, starting at 1.
    pub triplet_index: usize,
    pub residual_bound: f64,
    /// `‖𝐬_i‖_F` at this iteration.
    pub sigma_estimate: f64,
}

/// Residual bounds of the tracked triplets at every iteration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceHistory {
    pub records: Vec<HistoryRecord>,
    /// Acceptance threshold of each iteration.
    pub thresholds: Vec<f64>,
}

impl ConvergenceHistory {
    pub const CSV_HEADER: &'static str = "restart,triplet_index,residual_bound,sigma_estimate";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{:e},{:e}",
                r.restart, r.triplet_index, r.residual_bound, r.sigma_estimate
            );
        }
        out
    }

    /// Records of one iteration.
    pub fn at(&self, restart: usize) -> impl Iterator<Item = &HistoryRecord> {
        self.records.iter().filter(move |r| r.restart == restart)
    }
}

/// Result of [`tlbr`].
#[derive(Clone, Debug, PartialEq)]
pub struct TlbrOutput {
    pub triplets: TripletSet,
    pub history: ConvergenceHistory,
    /// Number of core decompositions and residual checks performed.
    pub iterations: usize,
    /// Restarts that wanted harmonic augmentation but used Ritz slices.
    pub harmonic_fallbacks: usize,
    /// Lanczos steps at which a normalization tube vanished.
    pub breakdowns: usize,
    pub converged: bool,
}

/// Failures of [`tlbr`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("not all triplets converged within {} iterations", .0.iterations)]
    NotConverged(Box<TlbrOutput>),
    #[error("augmented decomposition violates its relations at iteration {restart} (residual {residual:e})")]
    InvariantViolation { restart: usize, residual: f64 },
    #[error(transparent)]
    Algebra(#[from] Error),
}

impl From<AugmentError> for SolverError {
    fn from(e: AugmentError) -> Self {
        match e {
            AugmentError::Algebra(e) => SolverError::Algebra(e),
            other => SolverError::Algebra(Error::InvalidArgument(format!("{other}"))),
        }
    }
}

/// Tolerance of the post-augmentation consistency check.
pub const AUGMENT_TOL: f64 = 1e-8;

fn start_spectrum(
    op: &dyn TensorOperator,
    cfg: &SolverConfig,
    rng: &mut NormalRng,
) -> Result<SpectralTensor, SolverError> {
    let (l, p, n) = op.dims();
    let raw = match &cfg.start {
        Some(s) => fft3(s),
        None => fft3(&Tensor3::from_fn(p, 1, n, |_, _, _| 1.0)?),
    };
    let mut spec = raw;
    let biggest = spec
        .frames()
        .iter()
        .map(|f| f.frobenius_norm())
        .fold(0.0, f64::max);
    if biggest == 0.0 {
        return Err(SolverError::InvalidConfig("start slice is zero".into()));
    }
    let floor = l.max(p) as f64 * EPS * biggest;
    normalize_frames(&mut spec, None, 0, floor, rng);
    Ok(spec)
}

fn extract_triplets(
    d: &BidiagDecomp,
    svd: &SpectralSvd,
    check: &ConvergenceCheck,
    flags: &[bool],
    k: usize,
    mode: Mode,
) -> Result<TripletSet> {
    let m = d.steps();
    let (l, p, n) = d.dims();
    let h = d.frame_count();
    let idx = wanted_indices(m, k, mode);
    let mut uf = Vec::with_capacity(h);
    let mut vf = Vec::with_capacity(h);
    for s in 0..h {
        let u = svd.u.frame(s);
        let v = svd.v.frame(s);
        uf.push(d.q[s].matmul(&ComplexMatrix::from_fn(m, k, |i, j| u[(i, idx[j])]))?);
        vf.push(d.p[s].matmul(&ComplexMatrix::from_fn(m, k, |i, j| v[(i, idx[j])]))?);
    }
    let u = ifft3(&SpectralTensor::from_frames(l, k, n, uf)?)?;
    let v = ifft3(&SpectralTensor::from_frames(p, k, n, vf)?)?;
    let s = idx
        .iter()
        .map(|&c| {
            let vals: Vec<f64> = svd.values.iter().map(|v| v[c]).collect();
            crate::factor::tube_from_spectrum(&vals, n)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TripletSet {
        mode,
        u,
        v,
        s,
        bounds: check.bounds.clone(),
        converged: flags.to_vec(),
    })
}

/// Restarted tensor Lanczos bidiagonalization for `cfg.k` largest or
/// smallest singular triplets of the operator.
pub fn tlbr(op: &dyn TensorOperator, cfg: &SolverConfig) -> Result<TlbrOutput, SolverError> {
    cfg.validate(op.dims())?;
    let (k, m) = (cfg.k, cfg.m);
    let mut rng = NormalRng::new(cfg.seed);
    let opts = LanczosOptions::default();

    let start = start_spectrum(op, cfg, &mut rng)?;
    let mut d = seed_decomp(op, &start);
    let mut breakdowns = usize::from(grow(op, &mut d, m, &mut rng, opts)?.is_some());

    let mut history = ConvergenceHistory::default();
    let mut flags = vec![false; k];
    let mut fallbacks = 0;
    let want_harmonic = cfg.mode == Mode::Smallest && cfg.augmentation == Augmentation::Harmonic;

    for iter in 1..=cfg.max_restarts {
        let svd = spectral_svd(&d.core_spectral(), true)?;
        let check = check_convergence(&d, &svd, k, cfg.delta, cfg.mode);
        for (f, &c) in flags.iter_mut().zip(&check.converged) {
            *f |= c;
        }
        let idx = wanted_indices(m, k, cfg.mode);
        for (i, (&b, &c)) in check.bounds.iter().zip(&idx).enumerate() {
            history.records.push(HistoryRecord {
                restart: iter,
                triplet_index: i + 1,
                residual_bound: b,
                sigma_estimate: svd.sigma(c),
            });
        }
        history.thresholds.push(check.threshold);

        let done = flags.iter().all(|&f| f);
        if done || iter == cfg.max_restarts {
            let triplets = extract_triplets(&d, &svd, &check, &flags, k, cfg.mode)?;
            let out = TlbrOutput {
                triplets,
                history,
                iterations: iter,
                harmonic_fallbacks: fallbacks,
                breakdowns,
                converged: done,
            };
            return if done {
                Ok(out)
            } else {
                Err(SolverError::NotConverged(Box::new(out)))
            };
        }

        let harmonic = want_harmonic && core_condition(&svd) <= cfg.kappa_threshold;
        let attempt = if harmonic {
            match harmonic_augment(op, &d, k, &mut rng) {
                Err(AugmentError::SingularCore { .. }) => {
                    fallbacks += 1;
                    ritz_augment(op, &d, &svd, k, cfg.mode, &mut rng)
                }
                other => other,
            }
        } else {
            if want_harmonic {
                fallbacks += 1;
            }
            ritz_augment(op, &d, &svd, k, cfg.mode, &mut rng)
        };
        let state = match attempt {
            Ok(state) => state,
            Err(AugmentError::BreakdownExact(state)) => {
                breakdowns += 1;
                *state
            }
            Err(e) => return Err(e.into()),
        };
        if cfg.verify {
            let residual = state.decomp().check(op)?.max();
            if !(residual <= AUGMENT_TOL) {
                return Err(SolverError::InvariantViolation {
                    restart: iter,
                    residual,
                });
            }
        }
        d = state.into_decomp();
        if grow(op, &mut d, m, &mut rng, opts)?.is_some() {
            breakdowns += 1;
        }
    }
    unreachable!("the loop returns on its last iteration")
}
