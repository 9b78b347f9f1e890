//! File formats, applications and the command-line front end for
//! [`tlbr_core`].
//!
//! - [`t3b`]: the `T3B` binary tensor format.
//! - [`image_io`]: RGB PNG/JPEG images as `ℓ × p × 3` tensors.
//! - [`compress`]: low tubal-rank image compression.
//! - [`faces`]: face recognition in the span of dominant left singular slices.
//! - [`bench`]: the experiment suites behind `tlbr bench`.
//! - [`config`], [`manifest`], [`cli`]: configuration files, run manifests
//!   and the subcommands of the `tlbr` binary.

pub mod bench;
pub mod cli;
pub mod compress;
pub mod config;
mod error;
pub mod faces;
pub mod image_io;
pub mod manifest;
pub mod t3b;

pub use error::{Error, Result};
pub use tlbr_core as core;

use tlbr_core::{t_svd, Mode, SolverConfig, Tensor3, TripletSet};

/// Solver parameters shared by every command.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub delta: f64,
    pub seed: u64,
    pub max_restarts: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            delta: 1e-8,
            seed: 0,
            max_restarts: 1000,
        }
    }
}

impl SolverSettings {
    pub fn apply(&self, cfg: SolverConfig) -> SolverConfig {
        cfg.delta(self.delta)
            .seed(self.seed)
            .max_restarts(self.max_restarts)
    }
}

/// `‖S(i,i,:) − Σ(j,j,:)‖_F` for each computed tube against the matching
/// tube of the full t-SVD (`j = i` for the largest triplets, counted from
/// the end for the smallest).
pub fn tube_errors(a: &Tensor3, triplets: &TripletSet) -> Result<Vec<f64>> {
    let full = t_svd(a, true)?;
    let r = full.rank();
    (0..triplets.len())
        .map(|i| {
            let j = match triplets.mode {
                Mode::Largest => i,
                Mode::Smallest => r - 1 - i,
            };
            Ok(triplets.s[i].sub(&full.tube(j))?.fnorm())
        })
        .collect()
}
