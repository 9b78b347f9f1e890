//! Experiment suites on standard-normal random tensors.
//!
//! | suite  | spectrum end | columns |
//! |--------|--------------|---------|
//! | table1 | largest, Ritz, `m = 20` | `size,triplet_index,tube_error` |
//! | table2 | largest, Ritz, `m ∈ {10, 20}` | `size,m,iterations,seconds` |
//! | table3 | smallest, Ritz and harmonic, `m = 20` | `size,triplet_index,ritz_error,harm_error` |
//! | table4 | smallest, Ritz and harmonic, `m = 20` | `size,method,iterations,seconds` |
//!
//! Every suite computes `k = 4` triplets. Tube errors are measured against
//! the full t-SVD; triplet 1 is the largest (table1) or the smallest
//! (table3) tube.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use tlbr_core::rng::randn;
use tlbr_core::{tlbr, Augmentation, DenseOperator, Mode, SolverConfig, Tensor3, TlbrOutput};

use crate::error::{Error, Result};
use crate::{tube_errors, SolverSettings};

/// Largest tensor (in entries) a suite runs without `--force`.
pub const DESK_LIMIT: usize = 1_000_000;

const K: usize = 4;
const M: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Table1,
    Table2,
    Table3,
    Table4,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Table1 => "table1",
            Suite::Table2 => "table2",
            Suite::Table3 => "table3",
            Suite::Table4 => "table4",
        }
    }

    pub fn header(self) -> &'static [&'static str] {
        match self {
            Suite::Table1 => &["size", "triplet_index", "tube_error"],
            Suite::Table2 => &["size", "m", "iterations", "seconds"],
            Suite::Table3 => &["size", "triplet_index", "ritz_error", "harm_error"],
            Suite::Table4 => &["size", "method", "iterations", "seconds"],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as clap::ValueEnum>::from_str(s, true)
    }
}

/// Tensor dimensions written `ℓxpxn`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Size {
    pub rows: usize,
    pub cols: usize,
    pub tubes: usize,
}

impl Size {
    pub fn entries(&self) -> usize {
        self.rows
            .saturating_mul(self.cols)
            .saturating_mul(self.tubes)
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.rows, self.cols, self.tubes)
    }
}

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.trim().split('x').collect();
        let dims: Vec<usize> = parts
            .iter()
            .map(|p| p.parse::<usize>().ok().filter(|&d| d > 0))
            .collect::<Option<_>>()
            .ok_or_else(|| format!("{s:?} is not of the form LxPxN"))?;
        match dims[..] {
            [rows, cols, tubes] => Ok(Size { rows, cols, tubes }),
            _ => Err(format!("{s:?} is not of the form LxPxN")),
        }
    }
}

pub fn default_sizes() -> Vec<Size> {
    vec![Size {
        rows: 100,
        cols: 100,
        tubes: 3,
    }]
}

/// Rejects sizes above [`DESK_LIMIT`] unless forced, and sizes too small
/// for an `m = 20` subspace.
pub fn check_sizes(sizes: &[Size], force: bool) -> Result<()> {
    for s in sizes {
        if s.rows.min(s.cols) < M {
            return Err(Error::Config(format!(
                "size {s} is smaller than the {M}-slice subspace"
            )));
        }
        if s.entries() > DESK_LIMIT && !force {
            return Err(Error::Config(format!(
                "size {s} has {} entries, above the {DESK_LIMIT} desk-scale limit (pass --force)",
                s.entries()
            )));
        }
    }
    Ok(())
}

fn solve(a: &Tensor3, cfg: SolverConfig) -> Result<(TlbrOutput, f64)> {
    let start = Instant::now();
    let out = tlbr(&DenseOperator::new(a), &cfg)?;
    Ok((out, start.elapsed().as_secs_f64()))
}

/// Runs a suite and returns its rows (header excluded).
pub fn run(suite: Suite, sizes: &[Size], solver: &SolverSettings) -> Result<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    for &size in sizes {
        let a = randn(size.rows, size.cols, size.tubes, solver.seed);
        let largest = |m| solver.apply(SolverConfig::new(K, m).mode(Mode::Largest));
        let smallest = |aug| {
            solver.apply(
                SolverConfig::new(K, M)
                    .mode(Mode::Smallest)
                    .augmentation(aug),
            )
        };
        match suite {
            Suite::Table1 => {
                let (out, _) = solve(&a, largest(M))?;
                for (i, e) in tube_errors(&a, &out.triplets)?.iter().enumerate() {
                    rows.push(vec![
                        size.to_string(),
                        (i + 1).to_string(),
                        format!("{e:e}"),
                    ]);
                }
            }
            Suite::Table2 => {
                for m in [10, M] {
                    let (out, secs) = solve(&a, largest(m))?;
                    rows.push(vec![
                        size.to_string(),
                        m.to_string(),
                        out.iterations.to_string(),
                        format!("{secs:.3}"),
                    ]);
                }
            }
            Suite::Table3 => {
                let (ritz, _) = solve(&a, smallest(Augmentation::Ritz))?;
                let (harm, _) = solve(&a, smallest(Augmentation::Harmonic))?;
                let er = tube_errors(&a, &ritz.triplets)?;
                let eh = tube_errors(&a, &harm.triplets)?;
                for i in 0..K {
                    rows.push(vec![
                        size.to_string(),
                        (i + 1).to_string(),
                        format!("{:e}", er[i]),
                        format!("{:e}", eh[i]),
                    ]);
                }
            }
            Suite::Table4 => {
                for (name, aug) in [
                    ("ritz", Augmentation::Ritz),
                    ("harm", Augmentation::Harmonic),
                ] {
                    let (out, secs) = solve(&a, smallest(aug))?;
                    rows.push(vec![
                        size.to_string(),
                        name.into(),
                        out.iterations.to_string(),
                        format!("{secs:.3}"),
                    ]);
                }
            }
        }
    }
    Ok(rows)
}
