//! RGB images as `height × width × 3` tensors with entries in `[0, 1]`.

use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat, RgbImage};
use tlbr_core::Tensor3;

use crate::error::{Error, Result};

/// A colour image: row `i`, column `j` and channel `c` of the picture is
/// entry `(i, j, c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageTensor {
    pub data: Tensor3,
    pub source: Option<PathBuf>,
    /// Bits per channel of the decoded file.
    pub bit_depth: u8,
}

impl ImageTensor {
    pub fn height(&self) -> usize {
        self.data.rows()
    }

    pub fn width(&self) -> usize {
        self.data.cols()
    }
}

/// Loads a PNG or JPEG file. An alpha channel is dropped; grayscale files
/// are rejected.
pub fn load_image(path: &Path) -> Result<ImageTensor> {
    let unsupported = |detail: String| Error::UnsupportedFormat {
        path: path.to_path_buf(),
        detail,
    };
    let format =
        ImageFormat::from_path(path).map_err(|_| unsupported("unknown extension".into()))?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Jpeg) {
        return Err(unsupported(format!("{format:?} files are not read")));
    }
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        source => Error::Image {
            path: path.to_path_buf(),
            source,
        },
    })?;
    let (data, bit_depth) = match img {
        DynamicImage::ImageRgb8(_) | DynamicImage::ImageRgba8(_) => {
            let rgb = img.to_rgb8();
            (
                to_tensor(rgb.width(), rgb.height(), rgb.as_raw(), 255.0)?,
                8,
            )
        }
        DynamicImage::ImageRgb16(_) | DynamicImage::ImageRgba16(_) => {
            let rgb = img.to_rgb16();
            (
                to_tensor(rgb.width(), rgb.height(), rgb.as_raw(), 65535.0)?,
                16,
            )
        }
        other => {
            return Err(unsupported(format!(
                "{:?} pixels; only RGB images are accepted",
                other.color()
            )))
        }
    };
    Ok(ImageTensor {
        data,
        source: Some(path.to_path_buf()),
        bit_depth,
    })
}

fn to_tensor<T: Copy + Into<f64>>(
    width: u32,
    height: u32,
    raw: &[T],
    full: f64,
) -> Result<Tensor3> {
    let (w, h) = (width as usize, height as usize);
    Ok(Tensor3::from_fn(h, w, 3, |i, j, c| {
        raw[3 * (i * w + j) + c].into() / full
    })?)
}

/// Writes an 8-bit RGB PNG or JPEG; entries are clamped to `[0, 1]`.
pub fn save_image(t: &Tensor3, path: &Path) -> Result<()> {
    let (h, w, n) = t.dims();
    if n != 3 {
        return Err(Error::Tensor(tlbr_core::Error::DimMismatch {
            op: "save_image",
            detail: format!("{n} frontal slices, expected 3"),
        }));
    }
    let format = ImageFormat::from_path(path)
        .ok()
        .filter(|f| matches!(f, ImageFormat::Png | ImageFormat::Jpeg))
        .ok_or_else(|| Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: "expected .png or .jpg".into(),
        })?;
    let img = RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let px = |c| (t.get(y as usize, x as usize, c).clamp(0.0, 1.0) * 255.0).round() as u8;
        image::Rgb([px(0), px(1), px(2)])
    });
    img.save_with_format(path, format).map_err(|e| match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        source => Error::Image {
            path: path.to_path_buf(),
            source,
        },
    })
}
