mod common;

use std::path::PathBuf;

use tlbr::compress::{compress, Method};
use tlbr::core::rng::{randn, NormalRng};
use tlbr::core::{fft3, ifft3, Tensor3};
use tlbr::faces::{
    build_face_db, identification_rate, identify_all, train_basis, vectorize, FaceDatabase,
    LabeledImage, MatchRow, ProjectionBasis,
};
use tlbr::{Error, SolverSettings};

fn settings() -> SolverSettings {
    SolverSettings::default()
}

fn labeled(label: &str, idx: usize, image: Tensor3) -> LabeledImage {
    LabeledImage {
        label: label.into(),
        path: PathBuf::from(format!("{label}/{idx}.png")),
        image,
    }
}

/// Dataset with `persons` clusters of `shots` images each, held in memory.
fn cluster_images(persons: u64, shots: u64) -> Vec<LabeledImage> {
    let mut out = Vec::new();
    for p in 0..persons {
        for s in 0..shots {
            out.push(labeled(
                &format!("p{p}"),
                s as usize,
                common::face(p, s, 10, 8),
            ));
        }
    }
    out
}

fn max_abs(t: &Tensor3) -> f64 {
    t.as_slice().iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn full_rank_compression_is_exact() {
    let a = common::picture(24, 18, 1);
    let c = compress(&a, 18, Method::FullTsvd, None, &settings()).unwrap();
    assert!(c.rel_error <= 1e-10, "{}", c.rel_error);
    let e = compress(&a, 18, Method::Tlbr, None, &settings()).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    assert!(matches!(
        compress(&a, 0, Method::FullTsvd, None, &settings()),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        compress(&a, 19, Method::FullTsvd, None, &settings()),
        Err(Error::Config(_))
    ));
}

#[test]
fn constructed_rank_ten() {
    let a = randn(40, 10, 3, 2).tprod(&randn(10, 30, 3, 3)).unwrap();
    for method in [Method::Tlbr, Method::FullTsvd] {
        let c = compress(&a, 10, method, None, &settings()).unwrap();
        assert!(c.rel_error <= 1e-9, "{method:?}: {}", c.rel_error);
    }
}

#[test]
fn methods_agree_and_error_decreases() {
    let a = common::picture(48, 40, 4);
    let mut last = (f64::INFINITY, f64::INFINITY);
    for k in [1, 3, 5, 8, 12] {
        let fast = compress(&a, k, Method::Tlbr, None, &settings()).unwrap();
        let full = compress(&a, k, Method::FullTsvd, None, &settings()).unwrap();
        assert!((fast.rel_error - full.rel_error).abs() <= 1e-6, "k = {k}");
        assert!(fast.iterations.is_some() && full.iterations.is_none());
        assert!(
            fast.rel_error <= last.0 && full.rel_error <= last.1,
            "k = {k}"
        );
        last = (fast.rel_error, full.rel_error);
    }
}

#[test]
fn face_db_invariants() {
    let images = cluster_images(3, 4);
    let db = FaceDatabase::new(&images).unwrap();
    assert_eq!(db.len(), 12);
    assert_eq!(db.x.dims(), (80, 12, 3));
    // column j of X is image j, stacked column by column within each colour plane
    let img = &images[5].image;
    assert_eq!(db.x.get(3 + 10 * 2, 5, 1), img.get(3, 2, 1));
    assert_eq!(
        vectorize(img).unwrap().get(3 + 10 * 2, 0, 1),
        img.get(3, 2, 1)
    );
    let sum = (0..12).fold(Tensor3::zeros(80, 1, 3).unwrap(), |acc, j| {
        acc.add(&db.centered.lateral(j).into_tensor()).unwrap()
    });
    assert!(max_abs(&sum) <= 1e-10);

    assert!(matches!(
        FaceDatabase::new(&images[..1]),
        Err(Error::Config(_))
    ));
    let mut odd = images.clone();
    odd[3].image = common::face(0, 3, 9, 8);
    assert!(matches!(
        FaceDatabase::new(&odd),
        Err(Error::InconsistentDims { .. })
    ));
}

#[test]
fn dataset_split() {
    let dir = tempfile::tempdir().unwrap();
    common::write_faces(dir.path(), 2, 3, 6, 5);
    std::fs::write(dir.path().join("person0/notes.txt"), "x").unwrap();
    std::fs::write(dir.path().join("README"), "x").unwrap();

    let all = build_face_db(dir.path(), 0, 1).unwrap();
    assert_eq!((all.db.len(), all.test.len()), (6, 0));
    let split = build_face_db(dir.path(), 1, 1).unwrap();
    assert_eq!((split.db.len(), split.test.len()), (4, 2));
    assert_eq!(
        split.db.labels,
        ["person0", "person0", "person1", "person1"]
    );
    assert_eq!(
        split
            .test
            .iter()
            .map(|t| t.label.as_str())
            .collect::<Vec<_>>(),
        ["person0", "person1"]
    );
    assert_eq!(build_face_db(dir.path(), 1, 1).unwrap(), split);
    let held: Vec<_> = (0..20)
        .map(|s| {
            build_face_db(dir.path(), 1, s).unwrap().test[0]
                .path
                .clone()
        })
        .collect();
    assert!(
        held.iter().any(|p| p != &held[0]),
        "the seed should move the held-out image"
    );

    let e = build_face_db(dir.path(), 3, 1).unwrap_err();
    assert!(matches!(
        e,
        Error::TooFewImages {
            count: 3,
            holdout: 3,
            ..
        }
    ));
    assert_eq!(e.exit_code(), 2);

    tlbr::image_io::save_image(
        &common::face(1, 9, 7, 5),
        &dir.path().join("person1/shot9.png"),
    )
    .unwrap();
    assert!(matches!(
        build_face_db(dir.path(), 0, 1),
        Err(Error::InconsistentDims { .. })
    ));
}

/// `U_kᴴ ⋆ U_k`
fn gram(u: &Tensor3) -> Tensor3 {
    let f = fft3(u);
    ifft3(&f.adjoint_mul(&f).unwrap()).unwrap()
}

#[test]
fn basis_is_orthonormal_and_contracts() {
    let db = FaceDatabase::new(&cluster_images(4, 4)).unwrap();
    let basis = train_basis(&db, 4, 10, &settings()).unwrap();
    assert_eq!(basis.u.dims(), (80, 4, 3));
    assert_eq!(basis.gallery.dims(), (4, 16, 3));
    let err = gram(&basis.u)
        .sub(&Tensor3::identity(4, 3).unwrap())
        .unwrap();
    assert!(max_abs(&err) <= 1e-9);

    let mut rng = NormalRng::new(5);
    for _ in 0..20 {
        let y = Tensor3::from_fn(80, 1, 3, |_, _, _| rng.normal()).unwrap();
        let f = fft3(&basis.u).adjoint_mul(&fft3(&y)).unwrap();
        assert!(ifft3(&f).unwrap().fnorm() <= y.fnorm() + 1e-10);
    }
    assert!(matches!(
        train_basis(&db, 4, 4, &settings()),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        train_basis(&db, 4, 17, &settings()),
        Err(Error::Config(_))
    ));
}

#[test]
fn basis_captures_a_two_slice_span() {
    // centered images c_1 W⃗_1 + c_2 W⃗_2 with tube coefficients
    let w = randn(60, 2, 3, 6);
    let coeff = randn(2, 9, 3, 7);
    let y = w.tprod(&coeff).unwrap();
    let images: Vec<_> = (0..9)
        .map(|j| {
            labeled(
                "x",
                j,
                Tensor3::new(10, 6, 3, y.lateral(j).into_tensor().into_vec()).unwrap(),
            )
        })
        .collect();
    let db = FaceDatabase::new(&images).unwrap();
    let basis = train_basis(&db, 2, 6, &settings()).unwrap();
    let captured = basis.gallery.fnorm().powi(2) / db.centered.fnorm().powi(2);
    assert!(captured >= 1.0 - 1e-8, "{captured}");
}

#[test]
fn near_full_basis_reconstructs_gallery() {
    let images = cluster_images(2, 3);
    let db = FaceDatabase::new(&images).unwrap();
    let basis = train_basis(&db, 5, 6, &settings()).unwrap();
    let back = basis.u.tprod(&basis.gallery).unwrap();
    let rel = back.rel_diff(&db.centered).unwrap();
    assert!(rel <= 1e-6, "{rel}");
}

#[test]
fn identify_training_images() {
    let images = cluster_images(3, 4);
    let db = FaceDatabase::new(&images).unwrap();
    let basis = train_basis(&db, 3, 8, &settings()).unwrap();
    let mut rng = NormalRng::new(8);
    for (i, img) in images.iter().enumerate() {
        let hit = basis.identify(&img.image).unwrap();
        assert_eq!(hit.index, i);
        assert!(hit.distance <= 1e-9, "{}", hit.distance);
        let noisy = Tensor3::from_fn(10, 8, 3, |a, b, c| {
            img.image.get(a, b, c) + 1e-6 * rng.normal()
        })
        .unwrap();
        assert_eq!(basis.identify(&noisy).unwrap().index, i);
    }
    let wrong = Tensor3::zeros(8, 10, 3).unwrap();
    assert!(matches!(basis.identify(&wrong), Err(Error::Tensor(_))));
}

#[test]
fn separated_clusters_are_recognized() {
    let train = cluster_images(2, 5);
    let db = FaceDatabase::new(&train).unwrap();
    let basis = train_basis(&db, 2, 6, &settings()).unwrap();
    let probes: Vec<_> = (0..2u64)
        .flat_map(|p| {
            (5..8).map(move |s| labeled(&format!("p{p}"), s as usize, common::face(p, s, 10, 8)))
        })
        .collect();
    let rows = identify_all(&basis, &probes).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(identification_rate(&rows), 100.0);
    assert_eq!(rows[4].probe, "p1/6.png");
}

#[test]
fn constant_shift_is_absorbed() {
    let images = cluster_images(3, 3);
    let shifted: Vec<_> = images
        .iter()
        .map(|i| LabeledImage {
            image: Tensor3::from_fn(10, 8, 3, |a, b, c| i.image.get(a, b, c) + 0.25).unwrap(),
            ..i.clone()
        })
        .collect();
    let b0 = train_basis(&FaceDatabase::new(&images).unwrap(), 3, 7, &settings()).unwrap();
    let b1 = train_basis(&FaceDatabase::new(&shifted).unwrap(), 3, 7, &settings()).unwrap();
    let probe = common::face(1, 11, 10, 8);
    let probe_shifted = Tensor3::from_fn(10, 8, 3, |a, b, c| probe.get(a, b, c) + 0.25).unwrap();
    let d0 = b0.identify(&probe).unwrap();
    let d1 = b1.identify(&probe_shifted).unwrap();
    assert_eq!(d0.index, d1.index);
    assert!((d0.distance - d1.distance).abs() <= 1e-9);
}

#[test]
fn ties_go_to_the_lowest_index() {
    let gallery = Tensor3::from_fn(1, 3, 1, |_, j, _| if j == 0 { 2.0 } else { 1.0 }).unwrap();
    let basis = ProjectionBasis {
        k: 1,
        m: 2,
        height: 1,
        width: 1,
        u: Tensor3::new(1, 1, 1, vec![1.0]).unwrap(),
        mean: Tensor3::zeros(1, 1, 1).unwrap(),
        gallery,
        labels: vec!["a".into(), "b".into(), "c".into()],
        names: vec!["a/0".into(), "b/0".into(), "c/0".into()],
    };
    let hit = basis
        .identify(&Tensor3::new(1, 1, 1, vec![1.0]).unwrap())
        .unwrap();
    assert_eq!((hit.index, hit.label.as_str(), hit.distance), (1, "b", 0.0));
}

#[test]
fn rate_edge_cases() {
    let row = |p: &str, a: &str| MatchRow {
        probe: "x".into(),
        predicted: p.into(),
        actual: a.into(),
        distance: 0.0,
    };
    assert_eq!(identification_rate(&[]), 0.0);
    assert_eq!(identification_rate(&[row("a", "b"), row("b", "a")]), 0.0);
    assert_eq!(identification_rate(&[row("a", "a"), row("b", "b")]), 100.0);
    assert_eq!(
        identification_rate(&[row("a", "a"), row("b", "a"), row("a", "a"), row("a", "a")]),
        75.0
    );
}

#[test]
fn bundle_round_trip() {
    let db = FaceDatabase::new(&cluster_images(2, 3)).unwrap();
    let basis = train_basis(&db, 2, 5, &settings()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    basis.save(dir.path()).unwrap();
    for f in ["basis.t3b", "mean.t3b", "gallery.t3b", "meta.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(ProjectionBasis::load(dir.path()).unwrap(), basis);

    let meta = dir.path().join("meta.json");
    let text = std::fs::read_to_string(&meta).unwrap();
    std::fs::write(&meta, text.replace("vec-frontal-column-major", "row-major")).unwrap();
    assert!(matches!(
        ProjectionBasis::load(dir.path()),
        Err(Error::Config(_))
    ));
}
