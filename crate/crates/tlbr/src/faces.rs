//! Face recognition by projection onto the dominant left singular slices
//! of the centered image tensor.
//!
//! Every RGB image `ℓ × p × 3` becomes one lateral slice of length `ℓp` by
//! stacking the columns of each frontal slice (column-major), which is a
//! plain reshape of the canonical tensor layout. The training images form
//! `X ∈ ℝ^{ℓp × N × 3}`.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tlbr_core::{fft3, ifft3, tlbr, DenseOperator, Mode, SolverConfig, Tensor3};

use crate::error::{Error, Result};
use crate::image_io::load_image;
use crate::{t3b, SolverSettings};

/// Layout tag stored with a basis; probes must be vectorized the same way.
pub const LAYOUT_TAG: &str = "vec-frontal-column-major";

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledImage {
    pub label: String,
    pub path: PathBuf,
    pub image: Tensor3,
}

/// Training images as lateral slices, their mean and the centered tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceDatabase {
    pub height: usize,
    pub width: usize,
    pub labels: Vec<String>,
    pub paths: Vec<PathBuf>,
    /// `ℓp × N × 3`
    pub x: Tensor3,
    /// `ℓp × 1 × 3`
    pub mean: Tensor3,
    /// `X̄ = X − M⃗` slice by slice.
    pub centered: Tensor3,
}

/// `ℓ × p × 3` image to an `ℓp × 1 × 3` slice.
pub fn vectorize(image: &Tensor3) -> Result<Tensor3> {
    let (l, p, n) = image.dims();
    Ok(Tensor3::new(l * p, 1, n, image.as_slice().to_vec())?)
}

impl FaceDatabase {
    pub fn new(images: &[LabeledImage]) -> Result<Self> {
        if images.len() < 2 {
            return Err(Error::Config(format!(
                "{} training images, need at least 2",
                images.len()
            )));
        }
        let first = &images[0].image;
        let (height, width, n) = first.dims();
        for img in images {
            if img.image.dims() != (height, width, n) {
                return Err(Error::InconsistentDims {
                    path: img.path.clone(),
                    expected: (height, width),
                    got: (img.image.rows(), img.image.cols()),
                });
            }
        }
        let len = height * width;
        let big_n = images.len();
        let x = Tensor3::from_fn(len, big_n, n, |i, j, k| {
            images[j].image.as_slice()[i + k * len]
        })?;
        let mean = Tensor3::from_fn(len, 1, n, |i, _, k| {
            images
                .iter()
                .map(|img| img.image.as_slice()[i + k * len])
                .sum::<f64>()
                / big_n as f64
        })?;
        let centered =
            Tensor3::from_fn(len, big_n, n, |i, j, k| x.get(i, j, k) - mean.get(i, 0, k))?;
        Ok(Self {
            height,
            width,
            labels: images.iter().map(|i| i.label.clone()).collect(),
            paths: images.iter().map(|i| i.path.clone()).collect(),
            x,
            mean,
            centered,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Training database and held-out test images.
#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub db: FaceDatabase,
    pub test: Vec<LabeledImage>,
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
        .unwrap_or(false)
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<Vec<_>>>()?;
    out.sort();
    Ok(out)
}

/// Reads `root/<label>/*.{png,jpg}` and holds out `holdout` random images
/// of every person. Persons and files are visited in name order, so the
/// split depends only on the directory contents and `seed`.
pub fn build_face_db(root: &Path, holdout: usize, seed: u64) -> Result<Split> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let label = dir.file_name().unwrap().to_string_lossy().into_owned();
        let mut files: Vec<PathBuf> = sorted_entries(&dir)?
            .into_iter()
            .filter(|p| is_image(p))
            .collect();
        if files.len() <= holdout {
            return Err(Error::TooFewImages {
                label,
                count: files.len(),
                holdout,
            });
        }
        files.shuffle(&mut rng);
        let (held, kept) = files.split_at(holdout);
        let mut held = held.to_vec();
        let mut kept = kept.to_vec();
        held.sort();
        kept.sort();
        for (paths, into) in [(kept, &mut train), (held, &mut test)] {
            for path in paths {
                let image = load_image(&path)?.data;
                into.push(LabeledImage {
                    label: label.clone(),
                    path,
                    image,
                });
            }
        }
    }
    let db = FaceDatabase::new(&train)?;
    if let Some(bad) = test
        .iter()
        .find(|t| t.image.dims() != (db.height, db.width, 3))
    {
        return Err(Error::InconsistentDims {
            path: bad.path.clone(),
            expected: (db.height, db.width),
            got: (bad.image.rows(), bad.image.cols()),
        });
    }
    Ok(Split { db, test })
}

/// `U_k` and the projected gallery `P_i = U_kᴴ ⋆ X̄⃗_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionBasis {
    pub k: usize,
    pub m: usize,
    pub height: usize,
    pub width: usize,
    /// `ℓp × k × 3`
    pub u: Tensor3,
    /// `ℓp × 1 × 3`
    pub mean: Tensor3,
    /// `k × N × 3`
    pub gallery: Tensor3,
    pub labels: Vec<String>,
    pub names: Vec<String>,
}

/// Nearest gallery entry of a probe.
#[derive(Clone, Debug, PartialEq)]
pub struct Match {
    pub index: usize,
    pub label: String,
    pub distance: f64,
}

/// `U_kᴴ ⋆ Y`
fn project_onto(u: &Tensor3, y: &Tensor3) -> Result<Tensor3> {
    Ok(ifft3(&fft3(u).adjoint_mul(&fft3(y))?)?)
}

/// Computes the `k` dominant left slices of `X̄` with Ritz-augmented
/// restarted Lanczos bidiagonalization on `m` slices.
pub fn train_basis(
    db: &FaceDatabase,
    k: usize,
    m: usize,
    solver: &SolverSettings,
) -> Result<ProjectionBasis> {
    if !(k < m && m <= db.len()) {
        return Err(Error::Config(format!(
            "need k < m <= N, got k = {k}, m = {m}, N = {}",
            db.len()
        )));
    }
    let cfg = solver.apply(SolverConfig::new(k, m).mode(Mode::Largest));
    let out = tlbr(&DenseOperator::new(&db.centered), &cfg)?;
    let u = out.triplets.u;
    let gallery = project_onto(&u, &db.centered)?;
    let names = db.paths.iter().map(|p| display_name(p)).collect();
    Ok(ProjectionBasis {
        k,
        m,
        height: db.height,
        width: db.width,
        u,
        mean: db.mean.clone(),
        gallery,
        labels: db.labels.clone(),
        names,
    })
}

/// `<parent>/<file>` of an image path.
pub fn display_name(path: &Path) -> String {
    let file = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    match path.parent().and_then(|p| p.file_name()) {
        Some(dir) => format!("{}/{}", dir.to_string_lossy(), file),
        None => file,
    }
}

impl ProjectionBasis {
    /// `U_kᴴ ⋆ (vec(I) − M⃗)`
    pub fn project(&self, image: &Tensor3) -> Result<Tensor3> {
        if image.dims() != (self.height, self.width, self.mean.tubes()) {
            return Err(Error::Tensor(tlbr_core::Error::DimMismatch {
                op: "identify",
                detail: format!(
                    "probe {:?}, basis trained on {}x{}x{}",
                    image.dims(),
                    self.height,
                    self.width,
                    self.mean.tubes()
                ),
            }));
        }
        project_onto(&self.u, &vectorize(image)?.sub(&self.mean)?)
    }

    /// Nearest gallery slice in Frobenius distance; ties go to the lowest
    /// index.
    pub fn identify(&self, image: &Tensor3) -> Result<Match> {
        let p0 = self.project(image)?;
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.labels.len() {
            let d = self.gallery.lateral(i).into_tensor().sub(&p0)?.fnorm();
            if best.map_or(true, |(_, b)| d < b) {
                best = Some((i, d));
            }
        }
        let (index, distance) = best.expect("a basis has at least two gallery slices");
        Ok(Match {
            index,
            label: self.labels[index].clone(),
            distance,
        })
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        t3b::save(&dir.join("basis.t3b"), &self.u)?;
        t3b::save(&dir.join("mean.t3b"), &self.mean)?;
        t3b::save(&dir.join("gallery.t3b"), &self.gallery)?;
        let meta = BasisMeta {
            layout: LAYOUT_TAG.into(),
            k: self.k,
            m: self.m,
            height: self.height,
            width: self.width,
            basis_file: "basis.t3b".into(),
            mean_file: "mean.t3b".into(),
            gallery_file: "gallery.t3b".into(),
            labels: self.labels.clone(),
            names: self.names.clone(),
        };
        let path = dir.join("meta.json");
        let text = serde_json::to_string_pretty(&meta).map_err(|source| Error::Json {
            path: path.clone(),
            source,
        })?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("meta.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let meta: BasisMeta =
            serde_json::from_str(&text).map_err(|source| Error::Json { path, source })?;
        if meta.layout != LAYOUT_TAG {
            return Err(Error::Config(format!(
                "basis layout {:?}, expected {LAYOUT_TAG:?}",
                meta.layout
            )));
        }
        let basis = Self {
            k: meta.k,
            m: meta.m,
            height: meta.height,
            width: meta.width,
            u: t3b::load(&dir.join(&meta.basis_file))?,
            mean: t3b::load(&dir.join(&meta.mean_file))?,
            gallery: t3b::load(&dir.join(&meta.gallery_file))?,
            labels: meta.labels,
            names: meta.names,
        };
        let len = basis.height * basis.width;
        let consistent = basis.u.dims().0 == len
            && basis.u.cols() == basis.k
            && basis.mean.dims() == (len, 1, basis.u.tubes())
            && basis.gallery.dims() == (basis.k, basis.labels.len(), basis.u.tubes())
            && basis.names.len() == basis.labels.len();
        if !consistent {
            return Err(Error::Config(format!(
                "basis bundle in {} has inconsistent shapes",
                dir.display()
            )));
        }
        Ok(basis)
    }
}

#[derive(Serialize, Deserialize)]
struct BasisMeta {
    layout: String,
    k: usize,
    m: usize,
    height: usize,
    width: usize,
    basis_file: String,
    mean_file: String,
    gallery_file: String,
    labels: Vec<String>,
    names: Vec<String>,
}

/// One identified probe.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchRow {
    pub probe: String,
    pub predicted: String,
    pub actual: String,
    pub distance: f64,
}

/// Identifies every test image (in parallel; the order of the rows is the
/// order of `test`).
pub fn identify_all(basis: &ProjectionBasis, test: &[LabeledImage]) -> Result<Vec<MatchRow>> {
    test.par_iter()
        .map(|t| {
            let m = basis.identify(&t.image)?;
            Ok(MatchRow {
                probe: display_name(&t.path),
                predicted: m.label,
                actual: t.label.clone(),
                distance: m.distance,
            })
        })
        .collect()
}

/// Percentage of rows whose prediction equals the true label.
pub fn identification_rate(rows: &[MatchRow]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let correct = rows.iter().filter(|r| r.predicted == r.actual).count();
    100.0 * correct as f64 / rows.len() as f64
}
