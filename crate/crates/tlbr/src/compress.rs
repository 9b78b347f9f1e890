//! Low tubal-rank image compression with the truncated t-SVD.

use tlbr_core::{tlbr, truncated_tsvd, DenseOperator, Mode, SolverConfig, Tensor3};

use crate::error::{Error, Result};
use crate::SolverSettings;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Restarted Lanczos bidiagonalization with Ritz augmentation.
    Tlbr,
    /// Truncation of the full t-SVD.
    FullTsvd,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Tlbr => "tlbr",
            Method::FullTsvd => "tsvd",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Compression {
    /// `A_k = Σ_{i≤k} U⃗_i ⋆ 𝐬_i ⋆ V⃗_iᴴ`
    pub approx: Tensor3,
    /// `‖A_k − A‖_F / ‖A‖_F`
    pub rel_error: f64,
    /// Solver iterations, for [`Method::Tlbr`].
    pub iterations: Option<usize>,
}

/// Lanczos subspace size used when none is given: `max(20, 2k)` slices,
/// capped by `cap`.
pub fn default_subspace(k: usize, cap: usize) -> usize {
    20.max(2 * k).min(cap)
}

/// Rank-`k` approximation of `a`. `m` is the Lanczos subspace size of the
/// [`Method::Tlbr`] route and is ignored by [`Method::FullTsvd`].
pub fn compress(
    a: &Tensor3,
    k: usize,
    method: Method,
    m: Option<usize>,
    solver: &SolverSettings,
) -> Result<Compression> {
    let min_dim = a.rows().min(a.cols());
    if k == 0 || k > min_dim {
        return Err(Error::Config(format!("k = {k} outside 1..={min_dim}")));
    }
    let (approx, iterations) = match method {
        Method::FullTsvd => (truncated_tsvd(a, k)?.reconstruct()?, None),
        Method::Tlbr => {
            if k == min_dim {
                return Err(Error::Config(format!(
                    "k = {k} is the full tubal dimension; the Lanczos route needs k < {min_dim} (use the full t-SVD)"
                )));
            }
            let m = m.unwrap_or_else(|| default_subspace(k, min_dim));
            let cfg = solver.apply(SolverConfig::new(k, m).mode(Mode::Largest));
            let out = tlbr(&DenseOperator::new(a), &cfg)?;
            (out.triplets.reconstruct()?, Some(out.iterations))
        }
    };
    let rel_error = approx.rel_diff(a)?;
    Ok(Compression {
        approx,
        rel_error,
        iterations,
    })
}
