use alloc::string::String;

/// Errors raised by the tensor algebra and the dense frame kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    DimMismatch { op: &'static str, detail: String },
    #[error("invalid shape {rows}x{cols}x{tubes}")]
    InvalidShape {
        rows: usize,
        cols: usize,
        tubes: usize,
    },
    #[error("tensor data has {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite entry at flat index {index}")]
    NonFinite { index: usize },
    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("spectrum violates conjugate symmetry (imaginary residue {residue:e})")]
    SymmetryViolation { residue: f64 },
    #[error("dense block-circulant oracle would need {entries} entries")]
    OracleTooLarge { entries: usize },
    #[error("Jacobi SVD did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("triangular frame {frame} is numerically singular at pivot {pivot}")]
    SingularFrame { frame: usize, pivot: usize },
    #[error("lateral slice vanishes in every Fourier frame")]
    ZeroSlice,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn dim_mismatch(op: &'static str, detail: String) -> Error {
    Error::DimMismatch { op, detail }
}
