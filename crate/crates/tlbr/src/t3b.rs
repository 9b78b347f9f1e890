//! The `T3B` binary tensor format: the magic bytes `T3B1`, the dimensions
//! `ℓ`, `p`, `n` as little-endian `u64`, then the `ℓ·p·n` entries as
//! little-endian `f64` in the canonical layout (entry `(i, j, k)` at
//! `i + j·ℓ + k·ℓ·p`).

use std::fs;
use std::path::Path;

use tlbr_core::Tensor3;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"T3B1";
const HEADER_LEN: usize = 4 + 3 * 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum T3bError {
    #[error("not a T3B file (bad magic)")]
    BadMagic,
    #[error("truncated payload: expected {expected} bytes, found {got}")]
    Truncated { expected: usize, got: usize },
    #[error("{extra} trailing bytes after the payload")]
    TrailingBytes { extra: usize },
    #[error("dimensions {0}x{1}x{2} do not fit in memory")]
    TooLarge(u64, u64, u64),
    #[error(transparent)]
    Tensor(#[from] tlbr_core::Error),
}

pub fn encode(t: &Tensor3) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * t.as_slice().len());
    out.extend_from_slice(MAGIC);
    let (l, p, n) = t.dims();
    for d in [l, p, n] {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for x in t.as_slice() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Tensor3, T3bError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(T3bError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(T3bError::Truncated {
            expected: HEADER_LEN,
            got: bytes.len(),
        });
    }
    let dim = |i: usize| u64::from_le_bytes(bytes[4 + 8 * i..12 + 8 * i].try_into().unwrap());
    let (l, p, n) = (dim(0), dim(1), dim(2));
    let count = l
        .checked_mul(p)
        .and_then(|x| x.checked_mul(n))
        .and_then(|x| usize::try_from(x).ok())
        .filter(|&x| {
            x.checked_mul(8)
                .and_then(|b| b.checked_add(HEADER_LEN))
                .is_some()
        })
        .ok_or(T3bError::TooLarge(l, p, n))?;
    let expected = HEADER_LEN + 8 * count;
    if bytes.len() < expected {
        return Err(T3bError::Truncated {
            expected,
            got: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(T3bError::TrailingBytes {
            extra: bytes.len() - expected,
        });
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Tensor3::new(l as usize, p as usize, n as usize, data)?)
}

pub fn save(path: &Path, t: &Tensor3) -> Result<()> {
    fs::write(path, encode(t)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Tensor3> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|source| Error::T3b {
        path: path.to_path_buf(),
        source,
    })
}
