//! Partial singular value decomposition of third-order tensors under the
//! t-product.
//!
//! The crate computes a few of the largest or smallest singular triplets
//! (singular tube, left and right lateral singular slices) of a real
//! `ℓ × p × n` tensor with restarted tensor Lanczos bidiagonalization,
//! restarting either with Ritz lateral slices or with harmonic Ritz lateral
//! slices.
//!
//! Everything in the t-product algebra is block diagonal in the Fourier
//! domain along the tubes, so the heavy lifting happens frame by frame on
//! complex matrices. Only the non-redundant half of the spectrum
//! (`n / 2 + 1` frames) is ever stored; the other half follows from
//! conjugate symmetry of real data.
//!
//! Layout:
//!
//! - [`tensor`]: dense real tensors, tubes, lateral slices and t-product algebra.
//! - [`spectral`]: the half-spectrum representation and the FFT transport.
//! - [`frame`]: per-frame complex kernels (SVD, QR, triangular solves).
//! - [`factor`]: t-SVD, truncated t-SVD, t-QR, slice normalization, tubal rank.
//! - [`lanczos`]: tensor Lanczos bidiagonalization and its extension.
//! - [`restart`]: convergence test, Ritz / harmonic augmentation and the
//!   restarted driver [`restart::tlbr`].
//!
//! The crate is `no_std` (it needs `alloc`). The `parallel` feature enables
//! `std` and maps independent Fourier frames onto a rayon pool.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
pub mod factor;
pub mod fft;
pub mod frame;
pub mod lanczos;
mod math;
pub mod oracle;
mod par;
pub mod restart;
pub mod rng;
pub mod spectral;
pub mod tensor;

pub use error::{Error, Result};
pub use factor::{normalize_slice, t_qr, t_svd, truncated_tsvd, tubal_rank, TQr, TSvd};
pub use lanczos::{lanczos_bidiag, BidiagDecomp, DenseOperator, FnOperator, TensorOperator};
pub use num_complex::Complex64;
pub use restart::{tlbr, Augmentation, Mode, SolverConfig, SolverError, TlbrOutput, TripletSet};
pub use spectral::{fft3, ifft3, SpectralTensor};
pub use tensor::{LateralSlice, Tensor3, Tube};

/// Double precision machine epsilon.
pub const EPS: f64 = f64::EPSILON;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
