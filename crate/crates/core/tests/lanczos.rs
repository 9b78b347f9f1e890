use nalgebra::{DMatrix, DVector};
use tlbr_core::factor::spectral_svd;
use tlbr_core::lanczos::{extend_bidiag, lanczos_bidiag_with, LanczosError, LanczosOptions};
use tlbr_core::restart::ritz_augment;
use tlbr_core::rng::{randn, NormalRng};
use tlbr_core::tensor::{canonical_slice, identity_tensor};
use tlbr_core::{
    lanczos_bidiag, normalize_slice, t_qr, BidiagDecomp, DenseOperator, Error, FnOperator,
    LateralSlice, Mode, Tensor3, Tube,
};

fn unit_start(rows: usize, tubes: usize, seed: u64) -> LateralSlice {
    normalize_slice(
        &LateralSlice::from_tensor(randn(rows, 1, tubes, seed)).unwrap(),
        seed,
    )
    .unwrap()
    .0
}

fn orth_error(q: &Tensor3) -> f64 {
    let g = q.transpose().tprod(q).unwrap();
    g.sub(&identity_tensor(q.cols(), q.tubes()).unwrap())
        .unwrap()
        .fnorm()
}

/// The decomposition relations evaluated with tube-domain t-products.
fn check_in_tube_domain(a: &Tensor3, d: &BidiagDecomp, tol: f64) {
    let p = d.p_tensor().unwrap();
    let q = d.q_tensor().unwrap();
    let b = d.core_tensor().unwrap();
    let m = d.steps();
    assert!(orth_error(&p) <= tol, "P orthogonality {}", orth_error(&p));
    assert!(orth_error(&q) <= tol, "Q orthogonality {}", orth_error(&q));

    let ap = a.tprod(&p).unwrap();
    assert!(ap.sub(&q.tprod(&b).unwrap()).unwrap().fnorm() <= tol * ap.fnorm());

    let ahq = a.transpose().tprod(&q).unwrap();
    let r = d.residual().unwrap();
    let mut em_t = Tensor3::zeros(1, m, a.tubes()).unwrap();
    em_t.set(0, m - 1, 0, 1.0);
    let rhs = p
        .tprod(&b.transpose())
        .unwrap()
        .add(&r.tprod(&em_t).unwrap())
        .unwrap();
    assert!(ahq.sub(&rhs).unwrap().fnorm() <= tol * ahq.fnorm());

    let ph_r = p.transpose().tprod(&r).unwrap();
    assert!(ph_r.fnorm() <= tol * a.fnorm());
}

#[test]
fn invariants_on_random_tensor() {
    let a = randn(30, 20, 3, 1);
    let op = DenseOperator::new(&a);
    let d = lanczos_bidiag(&op, &unit_start(20, 3, 2), 8, 0).unwrap();
    assert_eq!(d.steps(), 8);
    assert!(d.check(&op).unwrap().max() <= 1e-10);
    check_in_tube_domain(&a, &d, 1e-10);

    let bt = d.bidiag().unwrap();
    assert_eq!((bt.alphas.len(), bt.betas.len()), (8, 7));
    let core = d.core_tensor().unwrap();
    assert!(bt.to_tensor().unwrap().rel_diff(&core).unwrap() <= 1e-14);
    let ext = bt.extended().unwrap();
    assert_eq!(ext.dims(), (8, 9, 3));
    assert!(ext.tube(7, 8).rel_diff(&d.beta_m().unwrap()).unwrap() <= 1e-14);
}

#[test]
fn wide_operator_and_callback_operator_agree() {
    let a = randn(12, 18, 4, 3);
    let dense = DenseOperator::new(&a);
    let at = a.transpose();
    let callbacks = FnOperator::new(
        (12, 18, 4),
        |x: &Tensor3| a.tprod(x),
        move |y: &Tensor3| at.tprod(y),
    );
    let p1 = unit_start(18, 4, 4);
    let d1 = lanczos_bidiag(&dense, &p1, 6, 0).unwrap();
    let d2 = lanczos_bidiag(&callbacks, &p1, 6, 0).unwrap();
    assert!(d1.check(&dense).unwrap().max() <= 1e-10);
    assert!(
        d1.core_tensor()
            .unwrap()
            .rel_diff(&d2.core_tensor().unwrap())
            .unwrap()
            <= 1e-10
    );
}

#[test]
fn identity_breaks_down_after_one_step() {
    let a = identity_tensor(4, 3).unwrap();
    let op = DenseOperator::new(&a);
    let e1 = canonical_slice(4, 1, 3).unwrap();
    match lanczos_bidiag(&op, &e1, 1, 0) {
        Err(LanczosError::Breakdown { step, partial }) => {
            assert_eq!(step, 1);
            let bt = partial.bidiag().unwrap();
            assert!(bt.alphas[0].rel_diff(&Tube::e1(3).unwrap()).unwrap() <= 1e-14);
            assert!(partial.residual().unwrap().fnorm() <= 1e-14);
            assert!(partial.check(&op).unwrap().max() <= 1e-12);
        }
        other => panic!("expected breakdown, got {other:?}"),
    }
}

#[test]
fn rejects_bad_start() {
    let op = DenseOperator::new(&randn(5, 4, 2, 0));
    let x = LateralSlice::from_tensor(randn(4, 1, 2, 1)).unwrap();
    assert!(matches!(
        lanczos_bidiag(&op, &x, 2, 0),
        Err(LanczosError::Algebra(Error::InvalidArgument(_)))
    ));
    let p1 = unit_start(4, 2, 1);
    assert!(matches!(
        lanczos_bidiag(&op, &p1, 5, 0),
        Err(LanczosError::Algebra(Error::IndexOutOfRange { .. }))
    ));
    assert!(matches!(
        lanczos_bidiag(&op, &unit_start(5, 2, 1), 2, 0),
        Err(LanczosError::Algebra(Error::DimMismatch { .. }))
    ));
}

/// Classical Golub–Kahan upper bidiagonalization with full
/// reorthogonalization, `A P = Q B`.
fn golub_kahan(a: &DMatrix<f64>, p1: &DVector<f64>, m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut ps: Vec<DVector<f64>> = vec![p1.clone()];
    let mut qs: Vec<DVector<f64>> = Vec::new();
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    for j in 0..m {
        let mut q = a * &ps[j];
        if j > 0 {
            q -= &qs[j - 1] * betas[j - 1];
        }
        for _ in 0..2 {
            for old in &qs {
                q -= old * old.dot(&q);
            }
        }
        let alpha = q.norm();
        q /= alpha;
        alphas.push(alpha);
        let mut r = a.transpose() * &q - &ps[j] * alpha;
        for _ in 0..2 {
            for old in &ps {
                r -= old * old.dot(&r);
            }
        }
        let beta = r.norm();
        betas.push(beta);
        ps.push(r / beta);
        qs.push(q);
    }
    (alphas, betas)
}

#[test]
fn single_tube_matches_golub_kahan() {
    let a = randn(15, 10, 1, 5);
    let p1 = unit_start(10, 1, 6);
    let d = lanczos_bidiag(&DenseOperator::new(&a), &p1, 7, 0).unwrap();
    let dense = DMatrix::from_fn(15, 10, |i, j| a.get(i, j, 0));
    let start = DVector::from_fn(10, |i, _| p1.get(i, 0, 0));
    let (alphas, betas) = golub_kahan(&dense, &start, 7);
    let bt = d.bidiag().unwrap();
    for j in 0..7 {
        assert!(
            (bt.alphas[j].values()[0] - alphas[j]).abs() <= 1e-10,
            "alpha {j}"
        );
    }
    for j in 0..6 {
        assert!(
            (bt.betas[j].values()[0] - betas[j]).abs() <= 1e-10,
            "beta {j}"
        );
    }
    assert!((d.beta_m().unwrap().values()[0] - betas[6]).abs() <= 1e-10);
}

#[test]
fn orthogonality_is_lost_without_reorthogonalization() {
    // Widely spread singular tubes make Ritz values converge fast, which is
    // when plain Lanczos loses orthogonality.
    let (size, n, m) = (60, 2, 40);
    let u = t_qr(&randn(size, size, n, 7), true).unwrap().q;
    let v = t_qr(&randn(size, size, n, 8), true).unwrap().q;
    let mut s = Tensor3::zeros(size, size, n).unwrap();
    for i in 0..size {
        s.set(i, i, 0, 0.7f64.powi(i as i32));
    }
    let a = u.tprod(&s).unwrap().tprod(&v.transpose()).unwrap();
    let op = DenseOperator::new(&a);
    let p1 = unit_start(size, n, 9);

    let off = LanczosOptions {
        reorthogonalize: false,
    };
    match lanczos_bidiag_with(&op, &p1, m, 0, off) {
        Ok(d) => {
            let drift = d.check(&op).unwrap().p_orthogonality;
            assert!(
                drift >= 1e-6,
                "drift without reorthogonalization only {drift}"
            );
        }
        // Losing orthogonality can also masquerade as a breakdown.
        Err(LanczosError::Breakdown { partial, .. }) => {
            assert!(partial.check(&op).unwrap().p_orthogonality >= 1e-6);
        }
        Err(e) => panic!("{e}"),
    }
    let d = lanczos_bidiag(&op, &p1, m, 0).unwrap();
    assert!(d.check(&op).unwrap().p_orthogonality <= 1e-10);
}

#[test]
fn basis_spans_the_krylov_space() {
    let a = randn(8, 6, 3, 10);
    let ata = a.transpose().tprod(&a).unwrap();
    let p1 = unit_start(6, 3, 11);
    let m = 5;
    let d = lanczos_bidiag(&DenseOperator::new(&a), &p1, m, 0).unwrap();
    let p = d.p_tensor().unwrap();
    let mut x: Tensor3 = p1.as_tensor().clone();
    for j in 0..m {
        let proj = p.tprod(&p.transpose().tprod(&x).unwrap()).unwrap();
        assert!(
            x.sub(&proj).unwrap().fnorm() <= 1e-8 * x.fnorm(),
            "power {j}"
        );
        x = ata.tprod(&x).unwrap();
    }
}

#[test]
fn normal_equations_residual_sits_on_last_slice() {
    let a = randn(30, 20, 3, 12);
    let d = lanczos_bidiag(&DenseOperator::new(&a), &unit_start(20, 3, 13), 8, 0).unwrap();
    let p = d.p_tensor().unwrap();
    let b = d.core_tensor().unwrap();
    let lhs = a.transpose().tprod(&a.tprod(&p).unwrap()).unwrap();
    let diff = lhs
        .sub(&p.tprod(&b.transpose().tprod(&b).unwrap()).unwrap())
        .unwrap();
    let scale = lhs.fnorm();
    assert!(diff.select_lateral(0..7).fnorm() <= 1e-9 * scale);
    let alpha_m = d.bidiag().unwrap().alphas[7].clone();
    let want = d.residual().unwrap().tprod(&alpha_m).unwrap();
    assert!(diff.select_lateral(7..8).sub(&want).unwrap().fnorm() <= 1e-9 * scale);
}

fn augmented(a: &Tensor3, k: usize, m: usize) -> BidiagDecomp {
    let op = DenseOperator::new(a);
    let d = lanczos_bidiag(&op, &unit_start(a.cols(), a.tubes(), 14), m, 0).unwrap();
    let svd = spectral_svd(&d.core_spectral(), false).unwrap();
    let mut rng = NormalRng::new(1);
    ritz_augment(&op, &d, &svd, k, Mode::Largest, &mut rng)
        .unwrap()
        .into_decomp()
}

#[test]
fn extend_to_current_size_is_a_no_op() {
    let a = randn(30, 20, 3, 15);
    let state = augmented(&a, 2, 6);
    assert_eq!(state.steps(), 3);
    let same = extend_bidiag(&DenseOperator::new(&a), state.clone(), 3, 0).unwrap();
    assert_eq!(same, state);
    assert!(matches!(
        extend_bidiag(&DenseOperator::new(&a), state, 2, 0),
        Err(LanczosError::Algebra(Error::IndexOutOfRange { .. }))
    ));
}

#[test]
fn extension_after_augmentation_keeps_relations_and_shape() {
    let (k, m) = (2, 6);
    let a = randn(30, 20, 3, 16);
    let op = DenseOperator::new(&a);
    let state = augmented(&a, k, m);
    let d = extend_bidiag(&op, state.clone(), m, 0).unwrap();
    assert_eq!(d.steps(), m);
    assert!(d.check(&op).unwrap().max() <= 1e-10);
    check_in_tube_domain(&a, &d, 1e-10);

    let p0 = state.p_tensor().unwrap();
    let p = d.p_tensor().unwrap();
    assert_eq!(p.select_lateral(0..k + 1).as_slice(), p0.as_slice());
    assert_eq!(
        d.q_tensor().unwrap().select_lateral(0..k + 1).as_slice(),
        state.q_tensor().unwrap().as_slice()
    );

    // arrowhead on the leading (k+1) block, bidiagonal afterwards
    let allowed = |i: usize, j: usize| i == j || (j == k && i < k) || (i >= k && j == i + 1);
    let core = d.core_spectral();
    for f in core.frames() {
        for i in 0..m {
            for j in 0..m {
                if !allowed(i, j) {
                    assert_eq!(f[(i, j)].norm(), 0.0, "entry ({i}, {j})");
                }
            }
        }
        for i in 0..k {
            assert!(f[(i, k)].norm() > 0.0);
        }
    }
}
