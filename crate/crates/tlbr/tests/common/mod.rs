#![allow(dead_code)]

use std::path::Path;

use tlbr::core::rng::NormalRng;
use tlbr::core::Tensor3;
use tlbr::image_io::save_image;

/// Smooth colour pattern of one person plus per-image noise, in `[0, 1]`.
pub fn face(person: u64, shot: u64, height: usize, width: usize) -> Tensor3 {
    let mut rng = NormalRng::new(1000 + person);
    let params: Vec<f64> = rng.normals(12);
    let mut noise = NormalRng::new(7919 * (person + 1) + shot);
    Tensor3::from_fn(height, width, 3, |i, j, c| {
        let (y, x) = (i as f64 / height as f64, j as f64 / width as f64);
        let p = &params[4 * c..4 * c + 4];
        let base = 0.5
            + 0.2 * (3.0 * p[0] * x + 2.0 * p[1] * y).sin()
            + 0.15 * (4.0 * p[2] * x * y + p[3]).cos();
        (base + 0.02 * noise.normal()).clamp(0.0, 1.0)
    })
    .unwrap()
}

/// `root/person<i>/shot<j>.png` for a clustered synthetic dataset.
pub fn write_faces(root: &Path, persons: u64, shots: u64, height: usize, width: usize) {
    for person in 0..persons {
        let dir = root.join(format!("person{person}"));
        std::fs::create_dir_all(&dir).unwrap();
        for shot in 0..shots {
            save_image(
                &face(person, shot, height, width),
                &dir.join(format!("shot{shot}.png")),
            )
            .unwrap();
        }
    }
}

/// Smooth test picture with some texture, `height × width × 3`.
pub fn picture(height: usize, width: usize, seed: u64) -> Tensor3 {
    let mut rng = NormalRng::new(seed);
    Tensor3::from_fn(height, width, 3, |i, j, c| {
        let (y, x) = (i as f64 / height as f64, j as f64 / width as f64);
        let ring = ((x - 0.5).powi(2) + (y - 0.4).powi(2)).sqrt();
        let v = 0.45
            + 0.3 * (12.0 * ring + c as f64).cos() * (-3.0 * ring).exp()
            + 0.1 * (25.0 * x).sin() * (9.0 * y + c as f64).cos()
            + 0.03 * rng.normal();
        v.clamp(0.0, 1.0)
    })
    .unwrap()
}
