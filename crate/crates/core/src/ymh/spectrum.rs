use std::sync::Arc;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use super::{bundle_init, gauge_projector, metric_matrix, pack, ymh_hessian_matrix, YmhState};
use crate::geometry::Discretization;
use crate::gl::SpectrumReport;
use crate::linalg::{shift_invert_eigs, EigOptions};
use crate::{Result, StabError};

/// Smallest `k` eigenvalues of the exact Hessian on the `N`-orthogonal
/// complement of the gauge orbit.
pub fn ymh_spectrum_gauge_fixed(state: &YmhState, k: usize, seed: u64) -> Result<SpectrumReport> {
    if k == 0 {
        return Err(StabError::InvalidArgument("k must be positive".into()));
    }
    let h = ymh_hessian_matrix(state);
    let n = metric_matrix(state);
    let proj = gauge_projector(state)?;
    let e2 = state.epsilon * state.epsilon;
    let hint = state.u.iter().map(|z| (z.norm_sqr() - 1.0) / e2).fold(0.0, f64::min) - 1.0;
    let rep: SpectrumReport = shift_invert_eigs(&h, &n, hint, &EigOptions::new(k, seed), Some(&proj))?.into();
    if !rep.all_converged() {
        return Err(StabError::NotConverged(format!("eigensolver: residuals {:?}", rep.residual_norms)));
    }
    Ok(rep)
}

/// Power-iteration estimate of the largest `|lambda|` of `N^{-1} H`.
pub fn hessian_norm_estimate(state: &YmhState, seed: u64) -> f64 {
    let h = ymh_hessian_matrix(state);
    let nd = state.metric_diag();
    let mut rng = crate::rng::stream(seed, "hessian-norm");
    let mut x: Vec<f64> = (0..nd.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut est = 0.0;
    for _ in 0..200 {
        let y: Vec<f64> = h.matvec(&x).iter().zip(&nd).map(|(a, b)| a / b).collect();
        let nx: f64 = x.iter().zip(&nd).map(|(a, b)| a * a * b).sum::<f64>().sqrt();
        let ny: f64 = y.iter().zip(&nd).map(|(a, b)| a * a * b).sum::<f64>().sqrt();
        est = ny / nx;
        x = y.iter().map(|v| v / ny).collect();
    }
    est
}

/// The pair `(0, D)` with `D` of constant curvature in degree `degree`.
pub fn trivial_pair(disc: Arc<Discretization>, degree: i64, epsilon: f64) -> Result<YmhState> {
    let nv = disc.mesh.num_vertices();
    let b = bundle_init(disc, degree)?;
    YmhState::new(b, vec![Complex64::new(0.0, 0.0); nv], epsilon)
}

/// Rayleigh quotient of the direction `(v = 1, a = 0)` in the natural metric.
pub fn trivial_pair_quotient(state: &YmhState) -> f64 {
    let h = ymh_hessian_matrix(state);
    let x = pack(&vec![Complex64::new(1.0, 0.0); state.u.len()], &vec![0.0; state.bundle.theta.len()]);
    let hx = h.matvec(&x);
    let num: f64 = hx.iter().zip(&x).map(|(a, b)| a * b).sum();
    let den: f64 = state.metric_diag().iter().zip(&x).map(|(n, b)| n * b * b).sum();
    num / den
}
