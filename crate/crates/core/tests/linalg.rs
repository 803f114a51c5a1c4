use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use stab_core::linalg::{minres, shift_invert_eigs, Cholesky, CsrMatrix, EigOptions};

/// Symmetric tridiagonal test matrix `tridiag(off, diag_i, off)`.
fn tridiagonal(diag: &[f64], off: f64) -> CsrMatrix {
    let n = diag.len();
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, diag[i]));
        if i + 1 < n {
            t.push((i, i + 1, off));
            t.push((i + 1, i, off));
        }
    }
    CsrMatrix::from_triplets(n, &t)
}

#[test]
fn triplets_are_summed() {
    let m = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, 4.0)]);
    assert_eq!(m.get(0, 0), 3.0);
    assert_eq!(m.get(1, 0), 4.0);
    assert_eq!(m.get(0, 1), 0.0);
}

#[test]
fn coo_text_lists_entries() {
    let m = CsrMatrix::from_triplets(2, &[(0, 1, 2.5), (1, 0, 2.5)]);
    let text = m.to_coo_text();
    assert_eq!(text, "0 1 2.5\n1 0 2.5\n");
}

#[test]
fn generalized_eigenvalues_match_dense_solver() {
    let n = 60;
    let diag: Vec<f64> = (0..n).map(|i| 2.0 + (i as f64 * 0.37).sin()).collect();
    let h = tridiagonal(&diag, -1.0);
    let mdiag: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (i as f64 * 0.11).cos()).collect();
    let m = CsrMatrix::diagonal(&mdiag);
    let r = shift_invert_eigs(&h, &m, -1.0, &EigOptions::new(5, 3), None).unwrap();
    assert!(r.all_converged());

    let s = DMatrix::from_fn(n, n, |i, j| h.get(i, j) / (mdiag[i] * mdiag[j]).sqrt());
    let mut exact: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().cloned().collect();
    exact.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (a, b) in r.values.iter().zip(&exact) {
        assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
    }
}

#[test]
fn indefinite_operator_is_handled_by_lowering_shift() {
    let n = 40;
    let diag: Vec<f64> = (0..n).map(|i| i as f64 - 5.5).collect();
    let h = tridiagonal(&diag, 0.0);
    let m = CsrMatrix::diagonal(&vec![1.0; n]);
    let r = shift_invert_eigs(&h, &m, 0.0, &EigOptions::new(3, 1), None).unwrap();
    assert!(r.shift < -5.5);
    for (k, v) in r.values.iter().enumerate() {
        assert!((v - (k as f64 - 5.5)).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cholesky_solves_diagonally_dominant_systems(d in prop::collection::vec(2.5f64..5.0, 5..40), off in -1.0f64..1.0) {
        let a = tridiagonal(&d, off);
        let chol = Cholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..d.len()).map(|i| (i as f64).cos()).collect();
        let x = chol.solve(&b);
        let r = a.matvec(&x);
        let err = r.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12);
    }

    #[test]
    fn minres_solves_indefinite_systems(d in prop::collection::vec(prop_oneof![-4.0f64..-1.5, 1.5f64..4.0], 5..40), off in -0.5f64..0.5) {
        let a = tridiagonal(&d, off);
        let b: Vec<f64> = (0..d.len()).map(|i| 1.0 + (i as f64).sin()).collect();
        let out = minres(&|x: &[f64]| a.matvec(x), &|r: &[f64]| r.to_vec(), &b, 1e-12, 500);
        prop_assert!(out.converged);
        let dense = DMatrix::from_fn(d.len(), d.len(), |i, j| a.get(i, j));
        let exact = dense.lu().solve(&DVector::from_vec(b.clone())).unwrap();
        let err = out.x.iter().zip(exact.iter()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-8, "err {}", err);
    }
}
