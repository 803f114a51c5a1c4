use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use stab_core::pointlab::cpn::{cpn_trace_check_with, lemma_sides};
use stab_core::pointlab::sphere::{sphere_gl_sum, sphere_gl_trace_with, sphere_ymh_sum, sphere_ymh_trace_with};
use stab_core::pointlab::*;
use stab_core::rng::stream;

fn unit_point(n: usize, seed: u64) -> DVector<f64> {
    let v = DVector::from_fn(n + 1, |i, _| ((i as u64 * 13 + seed) as f64 * 0.77).sin() + 0.1);
    v.normalize()
}

#[test]
fn trace_coefficients_are_consistent() {
    for n in 2..=8i64 {
        assert_eq!(n * n - (n - 1) * n - n, 0);
        assert_eq!(-(2 * n - n + 1 + 1) + 4, -(n - 2));
    }
}

#[test]
fn sphere_identities_for_all_dimensions() {
    for n in 2..=8 {
        let gl = sphere_gl_trace(n, 100, n as u64).unwrap();
        assert!(gl.max_deviation <= 1e-10, "gl n={n}: {}", gl.max_deviation);
        let ymh = sphere_ymh_trace(n, 100, n as u64).unwrap();
        assert!(ymh.max_deviation <= 1e-10, "ymh n={n}: {}", ymh.max_deviation);
        assert_eq!(gl.per_sample.len(), 100);
    }
}

#[test]
fn degenerate_dimensions_vanish() {
    // n = 2: only the curvature term survives; with F = 0 the sum vanishes.
    let r = sphere_ymh_trace_with(2, 50, 4, |d| d.f.fill(0.0)).unwrap();
    assert!(r.max_abs_deviation <= 1e-10);
    let mut rng = stream(9, "test");
    let mut d = FieldData::random(2, &mut rng);
    d.f.fill(0.0);
    assert!(sphere_ymh_sum(&unit_point(2, 1), &d).abs() < 1e-10 * (1.0 + d.ymh_density()));

    // n = 4: the curvature coefficient 4(4 - n) vanishes; with Du = 0 so does the sum.
    let mut d = FieldData::random(4, &mut rng);
    d.du.iter_mut().for_each(|z| *z = num_complex::Complex64::new(0.0, 0.0));
    assert!(sphere_ymh_sum(&unit_point(4, 2), &d).abs() < 1e-10 * (1.0 + d.ymh_density()));

    // n = 3, grad u = 0: the e-bracket coefficient vanishes.
    let mut d = FieldData::random(3, &mut rng);
    d.grad_u.fill(0.0);
    assert!(sphere_gl_sum(&unit_point(3, 3), &d).abs() < 1e-12 * (1.0 + d.e_eps));
}

#[test]
fn low_dimension_is_rejected() {
    assert!(sphere_gl_trace(1, 10, 0).is_err());
    assert!(cpn_frame_build(0).is_err());
    assert!(cpn_frame_build(4).is_err());
}

#[test]
fn cpn_frame_invariants() {
    for n in 1..=3 {
        let f = cpn_frame_build(n).unwrap();
        let inv = &f.invariants;
        assert_eq!(inv.q, n * (n + 2));
        assert_eq!(inv.dim_p, 2 * n);
        assert!(inv.ricci < 1e-6, "ricci {}", inv.ricci);
        assert!(cpn_lemma_prelim_check(&f, 50, 1) < 1e-6);
        let t = cpn_trace_check(&f, 50, 1);
        assert!(t.q1_relative < 1e-5 && t.q2q3_relative < 1e-5, "{t:?}");
    }
}

#[test]
fn cpn_eigenfunction_hessian_is_multiple_of_metric() {
    for n in 1..=3 {
        let h = cpn_eigenfunction_hessian(n).unwrap();
        assert!(h.tensor_deviation < 1e-6, "n={n}: {}", h.tensor_deviation);
        assert!(h.diagonal_deviation < 1e-6);
        assert!(h.laplacian_deviation < 1e-5);
        // Metric at the origin is 4 Id, so each diagonal entry is -2(n+1)/n.
        let nf = n as f64;
        assert!((h.coordinate[0][0] + 2.0 * (nf + 1.0) / nf).abs() < 1e-6);
    }
}

#[test]
fn cpn_trace_is_independent_of_killing_basis() {
    let f = cpn_frame_build(2).unwrap();
    for seed in [1, 2, 3] {
        let t = cpn_trace_check_with(&f, &f.rotated_basis(seed), 30, seed);
        assert!(t.q2q3_relative < 1e-5);
        assert!(t.q1_relative < 1e-5);
    }
}

fn jet(n: usize, seed: u64) -> InnerJet {
    let mut rng = stream(seed, "jet");
    let d = FieldData::random(n, &mut rng);
    InnerJet { x: d.grad_u.column(0).into_owned(), grad: DMatrix::from_fn(n, n, |i, j| d.f[(i, j)] + (i == j) as u8 as f64 * d.e_eps), grad_nabla_xx: None }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sphere_identities_hold_for_random_seeds(n in 2usize..=8, seed in any::<u64>()) {
        prop_assert!(sphere_gl_trace(n, 10, seed).unwrap().max_deviation <= 1e-10);
        prop_assert!(sphere_ymh_trace(n, 10, seed).unwrap().max_deviation <= 1e-10);
    }

    #[test]
    fn identities_survive_rescaled_data(n in 2usize..=8, seed in any::<u64>(), lambda in 0.01f64..100.0) {
        let gl = sphere_gl_trace_with(n, 10, seed, |d| *d = d.scaled(lambda)).unwrap();
        prop_assert!(gl.max_deviation <= 1e-10);
        let ymh = sphere_ymh_trace_with(n, 10, seed, |d| {
            let e = d.epsilon;
            *d = d.scaled(lambda);
            d.epsilon = e;
        }).unwrap();
        prop_assert!(ymh.max_deviation <= 1e-10);
    }

    #[test]
    fn gl_integrand_is_quadratic_in_field_data(n in 2usize..=6, seed in any::<u64>(), lambda in 0.1f64..10.0) {
        let mut rng = stream(seed, "scaling");
        let data = FieldData::random(n, &mut rng);
        let curv = ConstantCurvature { n, k: 1.0 };
        let j = jet(n, seed);
        let a = gl_inner_integrand(&j, &data, &curv);
        let b = gl_inner_integrand(&j, &data.scaled(lambda), &curv);
        prop_assert!((b - lambda * lambda * a).abs() <= 1e-9 * (1.0 + b.abs()));
    }

    #[test]
    fn sphere_sum_is_rotation_invariant(n in 2usize..=6, seed in any::<u64>()) {
        // The sum over a basis of R^{n+1} does not depend on the base point.
        let mut rng = stream(seed, "rotation");
        let data = FieldData::random(n, &mut rng);
        let a = sphere_gl_sum(&unit_point(n, seed % 1000), &data);
        let b = sphere_gl_sum(&unit_point(n, seed % 1000 + 17), &data);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + data.grad_u_norm2() + data.e_eps));
    }

    #[test]
    fn cpn_lemma_holds_for_random_vectors(n in 1usize..=3, seed in any::<u64>()) {
        let f = cpn_frame_build(n).unwrap();
        let m = 2 * n;
        let v: Vec<DVector<f64>> = (0..4).map(|k| DVector::from_fn(m, |i, _| ((seed % 997) as f64 + 3.1 * k as f64 + 1.7 * i as f64).sin())).collect();
        let (lhs, rhs) = lemma_sides(&f, &v[0], &v[1], &v[2], &v[3]);
        let scale: f64 = v.iter().map(|x| x.norm()).product();
        prop_assert!((lhs - rhs).abs() <= 1e-6 * scale.max(1.0), "{} vs {}", lhs, rhs);
    }
}
