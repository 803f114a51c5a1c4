use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use stab_core::geometry::Discretization;
use stab_core::harness::checks::{gauge_errors, random_section, ymh_fd_errors};
use stab_core::ymh::*;

fn disc(level: u32) -> Arc<Discretization> {
    Arc::new(Discretization::icosphere(level).unwrap())
}

fn unit_state(d: Arc<Discretization>, degree: i64, eps: f64) -> YmhState {
    let b = bundle_init(d.clone(), degree).unwrap();
    YmhState::new(b, vec![Complex64::new(1.0, 0.0); d.mesh.num_vertices()], eps).unwrap()
}

#[test]
fn wrap_lands_in_half_open_interval() {
    assert_eq!(wrap(PI), PI);
    assert_eq!(wrap(-PI), PI);
    assert!((wrap(3.0 * PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
    assert!((wrap(0.25) - 0.25).abs() < 1e-15);
}

#[test]
fn bundle_has_requested_degree_and_constant_curvature() {
    let d = disc(3);
    let total = d.fem.total_area();
    for degree in -3..=3 {
        let b = bundle_init(d.clone(), degree).unwrap();
        assert_eq!(ymh_degree(&b).unwrap(), degree);
        let flux_sum: f64 = b.fluxes().iter().sum();
        assert!((flux_sum - 2.0 * PI * degree as f64).abs() < 1e-9);
        for (p, a) in b.fluxes().iter().zip(&d.fem.face_areas) {
            assert!((p - 2.0 * PI * degree as f64 * a / total).abs() < 1e-9);
        }
    }
}

#[test]
fn degree_too_large_for_mesh_is_rejected() {
    assert!(matches!(bundle_init(disc(0), 10), Err(stab_core::StabError::Admissibility(_))));
}

#[test]
fn energy_parts_of_trivial_pair() {
    // Constant curvature: eps^2 sum_f (2 pi d A_f / A)^2 / A_f = eps^2 (2 pi d)^2 / A.
    let d = disc(3);
    let eps = 0.3;
    let s = trivial_pair(d.clone(), 2, eps).unwrap();
    let parts = ymh_energy_parts(&s);
    let area = d.fem.total_area();
    let curv = eps * eps * (4.0 * PI).powi(2) / area;
    assert!((parts.curvature - curv).abs() < 1e-9 * curv);
    assert_eq!(parts.covariant, 0.0);
    assert!((parts.potential - area / (4.0 * eps * eps)).abs() < 1e-12 * parts.potential);
}

#[test]
fn flat_trivial_pair_quotient_is_minus_inverse_eps_squared() {
    let eps = 0.3;
    let s = trivial_pair(disc(3), 0, eps).unwrap();
    let q = trivial_pair_quotient(&s);
    assert!((q + 1.0 / (eps * eps)).abs() < 1e-10, "{q}");
}

#[test]
fn hessian_is_symmetric_and_annihilates_gauge_directions_at_critical_points() {
    let d = disc(3);
    let (s, log) = ymh_solve(&unit_state(d.clone(), 1, 0.3), &YmhSchedule::default()).unwrap();
    assert!(log.converged, "{}", log.message);
    assert_eq!(s.degree().unwrap(), 1);
    assert!(log.max_energy_increase() <= 1e-12);
    let h = ymh_hessian_matrix(&s);
    assert!(h.max_asymmetry() < 1e-10 * h.inf_norm());
    let phi: Vec<f64> = d.mesh.vertices.iter().map(|x| x[0] + 0.5 * x[1] * x[2]).collect();
    let g = gauge_direction(&s, &phi);
    let hg = h.matvec(&g);
    let ng: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nhg: f64 = hg.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(nhg < 1e-5 * h.inf_norm() * ng, "{nhg}");
}

#[test]
fn vortex_energy_is_near_bogomolny_bound() {
    let (s, _) = ymh_solve(&unit_state(disc(4), 1, 0.3), &YmhSchedule::default()).unwrap();
    let e = ymh_energy(&s).unwrap();
    assert!((e / (2.0 * PI) - 1.0).abs() < 0.02, "{}", e / (2.0 * PI));
    let rep = bogomolny_defect(&s).unwrap();
    assert_eq!(rep.degree, 1);
    assert!(rep.face_residuals.iter().all(|r| r[0] >= 0.0 && r[1] >= 0.0));
    assert!(rep.to_csv().starts_with("faceIndex,residA,residB,area\n"));
}

#[test]
fn coulomb_gauge_minimizes_weighted_phase_norm() {
    let s = random_section(&unit_state(disc(2), 1, 0.4), 5).unwrap();
    let g = GaugeFunction { phi: (0..s.u.len()).map(|i| 0.3 * (i as f64).sin()).collect() };
    let scrambled = gauge_transform(&s, &g).unwrap();
    let c = coulomb_project(&scrambled).unwrap();
    let norm = |st: &YmhState| -> f64 {
        st.bundle.theta.iter().zip(&st.disc().fem.edge_weights).map(|(t, w)| w * t * t).sum()
    };
    assert!(norm(&c) <= norm(&scrambled) + 1e-12);
    assert!((ymh_energy(&c).unwrap() - ymh_energy(&s).unwrap()).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gauge_invariance_and_quantization(seed in 0u64..10_000, degree in -2i64..=2) {
        let s = random_section(&unit_state(disc(2), degree, 0.4), seed).unwrap();
        let g = gauge_errors(&s, seed).unwrap();
        prop_assert!(g.energy < 1e-12);
        prop_assert!(g.max_flux_change < 1e-12);
        prop_assert!(g.max_modulus_change < 1e-12);
        prop_assert!(g.degree_preserved && g.quantized);
        prop_assert!(g.composition < 1e-12);
    }

    #[test]
    fn derivatives_match_differences(seed in 0u64..10_000, degree in -1i64..=1) {
        let s = random_section(&unit_state(disc(2), degree, 0.5), seed).unwrap();
        let e = ymh_fd_errors(&s, 1e-6, seed).unwrap();
        prop_assert!(e.gradient < 1e-6, "gradient {}", e.gradient);
        prop_assert!(e.hessian < 1e-5, "hessian {}", e.hessian);
    }

    #[test]
    fn gradient_is_orthogonal_to_gauge_orbit(seed in 0u64..10_000) {
        let s = random_section(&unit_state(disc(2), 1, 0.4), seed).unwrap();
        let nv = s.u.len();
        let phi: Vec<f64> = (0..nv).map(|i| ((i as u64 * 7 + seed) as f64).sin()).collect();
        let g = ymh_gradient_real(&s).unwrap();
        let dir = gauge_direction(&s, &phi);
        let dot: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        let scale = g.iter().map(|v| v * v).sum::<f64>().sqrt() * dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(dot.abs() < 1e-10 * scale.max(1.0));
    }
}
