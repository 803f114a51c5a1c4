use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use stab_core::geometry::{conformal_field_jet, Discretization};
use stab_core::gl::*;

fn disc(level: u32) -> Arc<Discretization> {
    Arc::new(Discretization::icosphere(level).unwrap())
}

fn field(seed: u64) -> impl Fn([f64; 3]) -> Complex64 {
    let s = seed as f64;
    move |x| {
        Complex64::new(
            0.4 * (s + x[0]).sin() + 0.3 * x[1] * x[2],
            0.5 * x[2] - 0.2 * (s * 0.7 + x[0] * x[1]).cos(),
        )
    }
}

#[test]
fn energy_of_constants() {
    let d = disc(3);
    let p = GlParams::new(0.4).unwrap();
    let one = GlState::constant(d.clone(), p, Complex64::new(0.6, 0.8)).unwrap();
    assert!(gl_energy(&one).unwrap().abs() < 1e-14);
    let zero = GlState::constant(d.clone(), p, Complex64::new(0.0, 0.0)).unwrap();
    let area: f64 = d.fem.face_areas.iter().sum();
    let expect = area / (4.0 * 0.16);
    assert!((gl_energy(&zero).unwrap() - expect).abs() < 1e-12 * expect);
}

#[test]
fn non_positive_epsilon_is_rejected() {
    assert!(GlParams::new(0.0).is_err());
    assert!(GlParams::new(f64::NAN).is_err());
}

#[test]
fn length_mismatch_is_reported() {
    let s = GlState::constant(disc(1), GlParams::new(0.5).unwrap(), Complex64::new(1.0, 0.0)).unwrap();
    assert!(hessian_form_apply(&s, &[Complex64::new(1.0, 0.0)]).is_err());
}

#[test]
fn hessian_matrix_agrees_with_operator() {
    let d = disc(2);
    let s = GlState::from_fn(d, GlParams::new(0.5).unwrap(), field(3)).unwrap();
    let h = gl_hessian_matrix(&s);
    assert!(h.max_asymmetry() < 1e-12);
    let v: Vec<Complex64> = (0..s.u.len()).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
    let a = to_real(&hessian_form_apply(&s, &v).unwrap());
    let b = h.matvec(&to_real(&v));
    let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(err < 1e-10);
    let quad: f64 = a.iter().zip(to_real(&v)).map(|(x, y)| x * y).sum();
    let second = gl_outer_second_variation(&s, &v).unwrap();
    assert!((quad - second).abs() < 1e-10 * quad.abs().max(1.0));
}

#[test]
fn zero_state_bottom_eigenvalue() {
    let eps = 0.5;
    let s = GlState::constant(disc(3), GlParams::new(eps).unwrap(), Complex64::new(0.0, 0.0)).unwrap();
    let sp = gl_spectrum(&s, 2, 1).unwrap();
    assert!((sp.lambda1() + 1.0 / (eps * eps)).abs() < 1e-7, "{}", sp.lambda1());
}

#[test]
fn unit_constant_is_stable() {
    let s = GlState::constant(disc(3), GlParams::new(0.5).unwrap(), Complex64::new(1.0, 0.0)).unwrap();
    let sp = gl_spectrum(&s, 3, 1).unwrap();
    assert!(sp.lambda1() > -1e-8);
    assert!(sp.lambda1().abs() < 1e-8, "phase rotation is a zero mode");
}

#[test]
fn vortex_pair_solve_and_certificate() {
    let d = disc(3);
    let p = GlParams::new(0.5).unwrap();
    let start = Ansatz::VortexPair.build(d, p, 1).unwrap();
    let (s, log) = gl_solve(&start, &GlSchedule::default()).unwrap();
    assert!(log.converged, "{}", log.message);
    assert!(residual_norm(&s).unwrap() < 1e-8);
    assert!(log.max_flow_increase() <= 0.0);
    assert!(gl_energy(&s).unwrap() <= gl_energy(&start).unwrap());

    // First inner variation vanishes at critical points up to quadrature.
    let jet = conformal_field_jet(&[0.2, -0.4, 0.9], 2).unwrap();
    let first = gl_inner_first(&s, &jet).unwrap();
    assert!(first.abs() < 0.05 * gl_energy(&s).unwrap(), "{first}");

    let cert = gl_instability_certificate(&s, 1e-8, 1).unwrap();
    assert!(cert.rayleigh_quotient < 0.0);
    assert_eq!(cert.source, CertificateSource::ConformalSpan);
    assert!(cert.inner_sum.abs() <= 1e-10 * cert.scale, "{}", cert.inner_sum);
    assert!(cert.outer_sum < 0.0);
}

#[test]
fn critical_form_matches_general_form() {
    let d = disc(4);
    let p = GlParams::new(0.5).unwrap();
    let (s, _) = gl_solve(&Ansatz::VortexPair.build(d, p, 1).unwrap(), &GlSchedule::default()).unwrap();
    for xi in [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.6, 0.0, 0.8]] {
        let jet = conformal_field_jet(&xi, 2).unwrap();
        let general = gl_inner_second_general(&s, &jet).unwrap();
        let critical = gl_inner_second_critical(&s, xi).unwrap();
        let scale = 1.0 + s.dirichlet() + gl_energy(&s).unwrap();
        assert!((general - critical).abs() < 0.02 * scale, "{xi:?}: {general} vs {critical}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_is_phase_invariant(seed in 0u64..1000, alpha in -3.2f64..3.2, eps in 0.2f64..1.5) {
        let s = GlState::from_fn(disc(2), GlParams::new(eps).unwrap(), field(seed)).unwrap();
        let r = Complex64::from_polar(1.0, alpha);
        let t = s.with_u(s.u.iter().map(|z| z * r).collect()).unwrap();
        let (a, b) = (gl_energy(&s).unwrap(), gl_energy(&t).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a);
        let ga = gl_gradient(&s).unwrap();
        let gb = gl_gradient(&t).unwrap();
        let err = ga.iter().zip(&gb).map(|(x, y)| (x * r - y).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-11);
    }

    #[test]
    fn gradient_matches_energy_differences(seed in 0u64..1000, eps in 0.3f64..1.5) {
        let s = GlState::from_fn(disc(2), GlParams::new(eps).unwrap(), field(seed)).unwrap();
        let v: Vec<Complex64> = (0..s.u.len()).map(|i| Complex64::new(((i as u64 + seed) as f64).sin(), (i as f64).cos())).collect();
        let h = 1e-5;
        let shift = |t: f64| s.with_u(s.u.iter().zip(&v).map(|(u, d)| u + d * t).collect()).unwrap();
        let fd = (gl_energy(&shift(h)).unwrap() - gl_energy(&shift(-h)).unwrap()) / (2.0 * h);
        let exact = gl_outer_first_variation(&s, &v).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-7 * exact.abs().max(1.0), "{} vs {}", fd, exact);
    }

    #[test]
    fn energy_is_invariant_under_conjugation(seed in 0u64..1000) {
        let s = GlState::from_fn(disc(2), GlParams::new(0.5).unwrap(), field(seed)).unwrap();
        let t = s.with_u(s.u.iter().map(|z| z.conj()).collect()).unwrap();
        prop_assert!((gl_energy(&s).unwrap() - gl_energy(&t).unwrap()).abs() < 1e-12 * gl_energy(&s).unwrap());
    }
}
