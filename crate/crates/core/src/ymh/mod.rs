//! Lattice abelian Higgs model on the sphere mesh. Connections are edge
//! phases, curvature is the wrapped plaquette flux and sections live on
//! vertices in the trivialization fixed by the edge phases.

mod bogomolny;
mod gauge;
mod solve;
mod spectrum;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::geometry::Discretization;
use crate::linalg::{Cholesky, CsrMatrix};
use crate::{Result, StabError};

pub use bogomolny::{bogomolny_defect, face_frame_data, BogomolnyReport, FaceFrameData};
pub use gauge::{coulomb_project, gauge_direction, gauge_projector, gauge_transform, GaugeFunction};
pub use solve::{ymh_solve, YmhLog, YmhSchedule};
pub use spectrum::{hessian_norm_estimate, trivial_pair, trivial_pair_quotient, ymh_spectrum_gauge_fixed};

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap(a: f64) -> f64 {
    let mut w = a - 2.0 * PI * (a / (2.0 * PI)).round();
    if w <= -PI {
        w += 2.0 * PI;
    } else if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Edge phases of a U(1) connection; `theta[e]` belongs to the stored edge
/// orientation `edges[e][0] -> edges[e][1]`.
#[derive(Clone, Debug)]
pub struct LatticeBundle {
    pub theta: Vec<f64>,
    pub disc: Arc<Discretization>,
}

impl LatticeBundle {
    pub fn trivial(disc: Arc<Discretization>) -> Self {
        LatticeBundle { theta: vec![0.0; disc.mesh.num_edges()], disc }
    }

    pub fn new(disc: Arc<Discretization>, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != disc.mesh.num_edges() {
            return Err(StabError::LengthMismatch { expected: disc.mesh.num_edges(), got: theta.len() });
        }
        if !theta.iter().all(|t| t.is_finite()) {
            return Err(StabError::NonFinite("edge phases"));
        }
        Ok(LatticeBundle { theta, disc })
    }

    /// Signed phase sum around face `f` before wrapping.
    pub fn raw_flux(&self, f: usize) -> f64 {
        let m = &self.disc.mesh;
        (0..3).map(|k| m.face_edge_signs[f][k] * self.theta[m.face_edges[f][k]]).sum()
    }

    /// Wrapped plaquette fluxes.
    pub fn fluxes(&self) -> Vec<f64> {
        (0..self.disc.mesh.num_faces()).map(|f| wrap(self.raw_flux(f))).collect()
    }

    pub fn max_abs_flux(&self) -> f64 {
        self.fluxes().iter().map(|p| p.abs()).fold(0.0, f64::max)
    }
}

/// Target fluxes `2 pi d A_f / A` are realized exactly up to wrapping: the
/// phases are the least-squares solution of `d theta = c`, where `c` equals
/// the target except for an extra `-2 pi d` on face 0 that makes `c` exact.
pub fn bundle_init(disc: Arc<Discretization>, degree: i64) -> Result<LatticeBundle> {
    let m = &disc.mesh;
    let fem = &disc.fem;
    let total = fem.total_area();
    let amax = fem.face_areas.iter().cloned().fold(0.0, f64::max);
    if 2.0 * PI * (degree.unsigned_abs() as f64) * amax / total >= PI {
        return Err(StabError::Admissibility(format!(
            "degree {degree} needs plaquette flux of at least pi on a level-{} mesh",
            m.level
        )));
    }
    if degree == 0 {
        return Ok(LatticeBundle::trivial(disc));
    }
    let nf = m.num_faces();
    let d = degree as f64;
    let mut c: Vec<f64> = fem.face_areas.iter().map(|a| 2.0 * PI * d * a / total).collect();
    c[0] -= 2.0 * PI * d;
    // Dual face Laplacian d d^T with face 0 pinned by a unit diagonal bump.
    let ef = m.edge_faces();
    let mut trips = Vec::with_capacity(nf * 4 + 1);
    for f in 0..nf {
        trips.push((f, f, 3.0));
    }
    for &[l, r] in &ef {
        trips.push((l, r, -1.0));
        trips.push((r, l, -1.0));
    }
    trips.push((0, 0, 1.0));
    let lap = CsrMatrix::from_triplets(nf, &trips);
    let psi = Cholesky::factor(&lap)?.solve(&c);
    let theta: Vec<f64> = ef.iter().map(|&[l, r]| wrap(psi[l] - psi[r])).collect();
    let b = LatticeBundle::new(disc, theta)?;
    if ymh_degree(&b)? != degree {
        return Err(StabError::Admissibility("constructed bundle has the wrong degree".into()));
    }
    Ok(b)
}

/// `(1 / 2 pi) sum_f Phi_f`, an exact integer for admissible phases.
pub fn ymh_degree(bundle: &LatticeBundle) -> Result<i64> {
    let total: f64 = bundle.fluxes().iter().sum();
    let d = total / (2.0 * PI);
    let r = d.round();
    if (d - r).abs() >= 1e-9 {
        return Err(StabError::Admissibility(format!("total flux / 2 pi = {d} is not an integer")));
    }
    Ok(r as i64)
}

#[derive(Clone, Debug)]
pub struct YmhState {
    pub bundle: LatticeBundle,
    pub u: Vec<Complex64>,
    pub epsilon: f64,
}

/// Real unknowns `[re u_0, im u_0, ..., theta_0, ...]`.
pub fn pack(u: &[Complex64], theta: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(2 * u.len() + theta.len());
    for z in u {
        x.push(z.re);
        x.push(z.im);
    }
    x.extend_from_slice(theta);
    x
}

pub fn unpack(x: &[f64], nv: usize) -> (Vec<Complex64>, Vec<f64>) {
    let u = (0..nv).map(|i| Complex64::new(x[2 * i], x[2 * i + 1])).collect();
    (u, x[2 * nv..].to_vec())
}

impl YmhState {
    pub fn new(bundle: LatticeBundle, u: Vec<Complex64>, epsilon: f64) -> Result<Self> {
        let nv = bundle.disc.mesh.num_vertices();
        if u.len() != nv {
            return Err(StabError::LengthMismatch { expected: nv, got: u.len() });
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(StabError::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        if !u.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(StabError::NonFinite("section values"));
        }
        Ok(YmhState { bundle, u, epsilon })
    }

    pub fn disc(&self) -> &Discretization {
        &self.bundle.disc
    }

    pub fn num_unknowns(&self) -> usize {
        2 * self.u.len() + self.bundle.theta.len()
    }

    pub fn to_real(&self) -> Vec<f64> {
        pack(&self.u, &self.bundle.theta)
    }

    pub fn from_real(&self, x: &[f64]) -> Result<Self> {
        let (u, theta) = unpack(x, self.u.len());
        YmhState::new(LatticeBundle::new(self.bundle.disc.clone(), theta)?, u, self.epsilon)
    }

    pub fn degree(&self) -> Result<i64> {
        ymh_degree(&self.bundle)
    }

    pub fn max_modulus(&self) -> f64 {
        self.u.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Covariant edge differences `u_j - e^{i theta} u_i`.
    pub fn edge_differences(&self) -> Vec<Complex64> {
        self.disc()
            .mesh
            .edges
            .iter()
            .zip(&self.bundle.theta)
            .map(|(&[i, j], &t)| self.u[j] - Complex64::from_polar(1.0, t) * self.u[i])
            .collect()
    }

    /// Diagonal of the natural metric: lumped mass on `u`, cotangent
    /// weights on edges.
    pub fn metric_diag(&self) -> Vec<f64> {
        let fem = &self.disc().fem;
        let mut n: Vec<f64> = fem.lumped.iter().flat_map(|&m| [m, m]).collect();
        n.extend_from_slice(&fem.edge_weights);
        n
    }
}

/// Curvature, covariant Dirichlet and potential parts of the energy.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyParts {
    pub curvature: f64,
    pub covariant: f64,
    pub potential: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.curvature + self.covariant + self.potential
    }
}

pub fn ymh_energy_parts(state: &YmhState) -> EnergyParts {
    let fem = &state.disc().fem;
    let e2 = state.epsilon * state.epsilon;
    let curvature = e2 * state.bundle.fluxes().iter().zip(&fem.face_areas).map(|(p, a)| p * p / a).sum::<f64>();
    let covariant = state.edge_differences().iter().zip(&fem.edge_weights).map(|(z, w)| w * z.norm_sqr()).sum();
    let potential = state
        .u
        .iter()
        .zip(&fem.lumped)
        .map(|(z, m)| m * (1.0 - z.norm_sqr()).powi(2))
        .sum::<f64>()
        / (4.0 * e2);
    EnergyParts { curvature, covariant, potential }
}

/// `eps^2 sum_f Phi_f^2 / A_f + sum_e w_e |u_j - e^{i theta_e} u_i|^2 +
/// sum_v m_v (1 - |u_v|^2)^2 / (4 eps^2)`.
pub fn ymh_energy(state: &YmhState) -> Result<f64> {
    Ok(ymh_energy_parts(state).total())
}

/// Exact partial derivatives of [`ymh_energy`] with respect to the real
/// unknowns, returned as `(d/du as re + i im, d/dtheta)`.
pub fn ymh_gradient(state: &YmhState) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let disc = state.disc();
    let fem = &disc.fem;
    let m = &disc.mesh;
    let e2 = state.epsilon * state.epsilon;
    let mut gu: Vec<Complex64> = state
        .u
        .iter()
        .zip(&fem.lumped)
        .map(|(z, mv)| z * (-mv * (1.0 - z.norm_sqr()) / e2))
        .collect();
    let mut gt = vec![0.0; m.num_edges()];
    for (e, &[i, j]) in m.edges.iter().enumerate() {
        let w = fem.edge_weights[e];
        let rot = Complex64::from_polar(1.0, state.bundle.theta[e]);
        let q = rot * state.u[i];
        let z = state.u[j] - q;
        gu[j] += z * (2.0 * w);
        gu[i] -= rot.conj() * z * (2.0 * w);
        gt[e] += 2.0 * w * (state.u[j].conj() * q).im;
    }
    let fl = state.bundle.fluxes();
    for f in 0..m.num_faces() {
        let c = 2.0 * e2 * fl[f] / fem.face_areas[f];
        for k in 0..3 {
            gt[m.face_edges[f][k]] += c * m.face_edge_signs[f][k];
        }
    }
    Ok((gu, gt))
}

/// Gradient packed as a real covector.
pub fn ymh_gradient_real(state: &YmhState) -> Result<Vec<f64>> {
    let (gu, gt) = ymh_gradient(state)?;
    Ok(pack(&gu, &gt))
}

/// `sqrt(g^T N^{-1} g)` with the natural metric `N`.
pub fn gradient_norm(state: &YmhState) -> Result<f64> {
    let g = ymh_gradient_real(state)?;
    Ok(g.iter().zip(state.metric_diag()).map(|(gi, ni)| gi * gi / ni).sum::<f64>().sqrt())
}

/// Exact Hessian of the discrete energy on the packed real unknowns.
pub fn ymh_hessian_matrix(state: &YmhState) -> CsrMatrix {
    let disc = state.disc();
    let fem = &disc.fem;
    let m = &disc.mesh;
    let nv = state.u.len();
    let e2 = state.epsilon * state.epsilon;
    let n = state.num_unknowns();
    let te = |e: usize| 2 * nv + e;
    let mut trips: Vec<(usize, usize, f64)> = Vec::with_capacity(25 * m.num_edges() + 9 * m.num_faces() + 4 * nv);
    for (v, z) in state.u.iter().enumerate() {
        let c = fem.lumped[v] / e2;
        let s = z.norm_sqr() - 1.0;
        let (a, b) = (z.re, z.im);
        trips.push((2 * v, 2 * v, c * (s + 2.0 * a * a)));
        trips.push((2 * v, 2 * v + 1, c * 2.0 * a * b));
        trips.push((2 * v + 1, 2 * v, c * 2.0 * a * b));
        trips.push((2 * v + 1, 2 * v + 1, c * (s + 2.0 * b * b)));
    }
    for (e, &[i, j]) in m.edges.iter().enumerate() {
        let w2 = 2.0 * fem.edge_weights[e];
        let (s, c) = state.bundle.theta[e].sin_cos();
        let rot = [[c, -s], [s, c]];
        let ui = [state.u[i].re, state.u[i].im];
        let ru = [c * ui[0] - s * ui[1], s * ui[0] + c * ui[1]];
        let z = [state.u[j].re - ru[0], state.u[j].im - ru[1]];
        // Jacobian columns of z with respect to (re u_i, im u_i, re u_j, im u_j, theta).
        let jac: [[f64; 2]; 5] = [
            [-rot[0][0], -rot[1][0]],
            [-rot[0][1], -rot[1][1]],
            [1.0, 0.0],
            [0.0, 1.0],
            [ru[1], -ru[0]],
        ];
        let idx = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1, te(e)];
        for a in 0..5 {
            for b in 0..5 {
                let v = w2 * (jac[a][0] * jac[b][0] + jac[a][1] * jac[b][1]);
                trips.push((idx[a], idx[b], v));
            }
        }
        // Second derivatives: d2z/dtheta2 = R u_i, d2z/dtheta du_i = -R J.
        trips.push((te(e), te(e), w2 * (z[0] * ru[0] + z[1] * ru[1])));
        // -R J has columns -R e_2 = (s, -c) and R e_1 = (c, s).
        let cross = [z[0] * s - z[1] * c, z[0] * c + z[1] * s];
        for k in 0..2 {
            trips.push((te(e), 2 * i + k, w2 * cross[k]));
            trips.push((2 * i + k, te(e), w2 * cross[k]));
        }
    }
    for f in 0..m.num_faces() {
        let c = 2.0 * e2 / fem.face_areas[f];
        for a in 0..3 {
            for b in 0..3 {
                let v = c * m.face_edge_signs[f][a] * m.face_edge_signs[f][b];
                trips.push((te(m.face_edges[f][a]), te(m.face_edges[f][b]), v));
            }
        }
    }
    CsrMatrix::from_triplets(n, &trips)
}

/// Natural metric as a sparse diagonal matrix.
pub fn metric_matrix(state: &YmhState) -> CsrMatrix {
    CsrMatrix::diagonal(&state.metric_diag())
}
