use num_complex::Complex64;

use super::{pack, wrap, LatticeBundle, YmhState};
use crate::linalg::{Cholesky, CsrMatrix};
use crate::{Result, StabError};

/// Vertex phases acting by `u_v -> e^{i phi_v} u_v` and
/// `theta_e -> theta_e + phi_j - phi_i` on the edge `i -> j`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeFunction {
    pub phi: Vec<f64>,
}

pub fn gauge_transform(state: &YmhState, g: &GaugeFunction) -> Result<YmhState> {
    let nv = state.u.len();
    if g.phi.len() != nv {
        return Err(StabError::LengthMismatch { expected: nv, got: g.phi.len() });
    }
    let u = state.u.iter().zip(&g.phi).map(|(z, &p)| z * Complex64::from_polar(1.0, p)).collect();
    let theta = state
        .disc()
        .mesh
        .edges
        .iter()
        .zip(&state.bundle.theta)
        .map(|(&[i, j], &t)| wrap(t + g.phi[j] - g.phi[i]))
        .collect();
    YmhState::new(LatticeBundle::new(state.bundle.disc.clone(), theta)?, u, state.epsilon)
}

/// Tangent to the gauge orbit, `(i phi u, d phi)`, on the packed unknowns.
pub fn gauge_direction(state: &YmhState, phi: &[f64]) -> Vec<f64> {
    let du: Vec<Complex64> = state.u.iter().zip(phi).map(|(z, &p)| Complex64::new(0.0, p) * z).collect();
    let dt: Vec<f64> = state.disc().mesh.edges.iter().map(|&[i, j]| phi[j] - phi[i]).collect();
    pack(&du, &dt)
}

/// `d^T y` for an edge field `y`.
fn codifferential(state: &YmhState, y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; state.u.len()];
    for (&[i, j], &v) in state.disc().mesh.edges.iter().zip(y) {
        out[j] += v;
        out[i] -= v;
    }
    out
}

/// Gram operator `G^T N G = diag(m |u|^2) + K` of the gauge directions,
/// pinned at vertex 0 when the section vanishes.
fn gauge_gram(state: &YmhState) -> Result<Cholesky> {
    let fem = &state.disc().fem;
    let d: Vec<f64> = state.u.iter().zip(&fem.lumped).map(|(z, m)| m * z.norm_sqr()).collect();
    let weight: f64 = d.iter().sum();
    let mut a = CsrMatrix::diagonal(&d).add_scaled(1.0, &fem.stiffness);
    if weight <= 1e-12 * fem.total_area() {
        let mut pin = vec![0.0; d.len()];
        pin[0] = 1.0;
        a = a.add_scaled(1.0, &CsrMatrix::diagonal(&pin));
    }
    Cholesky::factor(&a)
}

/// `N`-orthogonal projector onto the complement of the gauge directions.
pub fn gauge_projector(state: &YmhState) -> Result<impl Fn(&mut [f64]) + '_> {
    let chol = gauge_gram(state)?;
    let nv = state.u.len();
    Ok(move |x: &mut [f64]| {
        let fem = &state.disc().fem;
        let wt: Vec<f64> = x[2 * nv..].iter().zip(&fem.edge_weights).map(|(t, w)| t * w).collect();
        let mut b = codifferential(state, &wt);
        for v in 0..nv {
            let du = Complex64::new(x[2 * v], x[2 * v + 1]);
            b[v] += fem.lumped[v] * (state.u[v].conj() * du).im;
        }
        let phi = chol.solve(&b);
        let g = gauge_direction(state, &phi);
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= gi;
        }
    })
}

/// Gauge transformation to the representative minimizing
/// `sum_e w_e theta_e^2`; the gauge function has zero mean.
pub fn coulomb_project(state: &YmhState) -> Result<YmhState> {
    let fem = &state.disc().fem;
    let wt: Vec<f64> = state.bundle.theta.iter().zip(&fem.edge_weights).map(|(t, w)| -t * w).collect();
    let b = codifferential(state, &wt);
    let mut pin = vec![0.0; b.len()];
    pin[0] = 1.0;
    let a = fem.stiffness.add_scaled(1.0, &CsrMatrix::diagonal(&pin));
    let mut phi = Cholesky::factor(&a)?.solve(&b);
    let mean = phi.iter().sum::<f64>() / phi.len() as f64;
    phi.iter_mut().for_each(|p| *p -= mean);
    gauge_transform(state, &GaugeFunction { phi })
}
