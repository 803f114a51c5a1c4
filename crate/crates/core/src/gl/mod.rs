//! Ginzburg-Landau energy on the sphere mesh: energy, gradient, Hessian,
//! solvers, spectra and inner variations.

mod inner;
mod solve;
mod spectrum;

use std::sync::Arc;

use num_complex::Complex64;

use crate::geometry::Discretization;
use crate::linalg::CsrMatrix;
use crate::{Result, StabError};

pub use inner::{
    gl_inner_first, gl_inner_second_critical, gl_inner_second_general, inner_outer_gap, InnerOuterGap,
};
pub use solve::{gl_solve, GlSchedule, SolveLog, SolvePhase};
pub use spectrum::{
    conformal_directions, gl_instability_certificate, gl_morse_index, gl_spectrum, Certificate, CertificateSource,
    SpectrumReport,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlParams {
    pub epsilon: f64,
}

impl GlParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(StabError::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(GlParams { epsilon })
    }
}

/// Complex vertex field together with its parameters and mesh.
#[derive(Clone, Debug)]
pub struct GlState {
    pub u: Vec<Complex64>,
    pub params: GlParams,
    pub disc: Arc<Discretization>,
}

impl GlState {
    pub fn new(disc: Arc<Discretization>, u: Vec<Complex64>, params: GlParams) -> Result<Self> {
        let nv = disc.mesh.num_vertices();
        if u.len() != nv {
            return Err(StabError::LengthMismatch { expected: nv, got: u.len() });
        }
        let s = GlState { u, params, disc };
        s.check_finite()?;
        Ok(s)
    }

    /// State with `u(x_v) = f(x_v)` at every vertex.
    pub fn from_fn(disc: Arc<Discretization>, params: GlParams, f: impl Fn([f64; 3]) -> Complex64) -> Result<Self> {
        let u = disc.mesh.vertices.iter().map(|&x| f(x)).collect();
        Self::new(disc, u, params)
    }

    pub fn constant(disc: Arc<Discretization>, params: GlParams, c: Complex64) -> Result<Self> {
        Self::from_fn(disc, params, |_| c)
    }

    pub fn with_u(&self, u: Vec<Complex64>) -> Result<Self> {
        Self::new(self.disc.clone(), u, self.params)
    }

    fn check_finite(&self) -> Result<()> {
        if self.u.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(StabError::NonFinite("field values"))
        }
    }

    pub fn eps2(&self) -> f64 {
        self.params.epsilon * self.params.epsilon
    }

    pub fn max_modulus(&self) -> f64 {
        self.u.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Interleaved `(re, im)` real vector of length `2V`.
    pub fn to_real(&self) -> Vec<f64> {
        to_real(&self.u)
    }

    /// Dirichlet energy `int |grad u|^2`.
    pub fn dirichlet(&self) -> f64 {
        let fem = &self.disc.fem;
        let re: Vec<f64> = self.u.iter().map(|z| z.re).collect();
        let im: Vec<f64> = self.u.iter().map(|z| z.im).collect();
        fem.dirichlet(&re) + fem.dirichlet(&im)
    }

    /// Potential density `(1 - |u|^2)^2 / (4 eps^2)` at each vertex.
    pub fn potential_density(&self) -> Vec<f64> {
        let c = 1.0 / (4.0 * self.eps2());
        self.u.iter().map(|z| c * (1.0 - z.norm_sqr()).powi(2)).collect()
    }
}

pub fn to_real(u: &[Complex64]) -> Vec<f64> {
    u.iter().flat_map(|z| [z.re, z.im]).collect()
}

pub fn from_real(x: &[f64]) -> Vec<Complex64> {
    x.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

fn check_len(state: &GlState, v: &[Complex64]) -> Result<()> {
    if v.len() != state.u.len() {
        return Err(StabError::LengthMismatch { expected: state.u.len(), got: v.len() });
    }
    Ok(())
}

/// `E(u) = 1/2 int |grad u|^2 + sum_v m_v (1 - |u_v|^2)^2 / (4 eps^2)`.
pub fn gl_energy(state: &GlState) -> Result<f64> {
    state.check_finite()?;
    let pot: f64 = state.potential_density().iter().zip(&state.disc.fem.lumped).map(|(p, m)| p * m).sum();
    Ok(0.5 * state.dirichlet() + pot)
}

/// Energy differential as a covector: `dE(u)[v] = Re sum_v conj(g_v) v_v`.
pub fn gl_gradient(state: &GlState) -> Result<Vec<Complex64>> {
    state.check_finite()?;
    let fem = &state.disc.fem;
    let re: Vec<f64> = state.u.iter().map(|z| z.re).collect();
    let im: Vec<f64> = state.u.iter().map(|z| z.im).collect();
    let kr = fem.stiffness_apply(&re);
    let ki = fem.stiffness_apply(&im);
    let c = 1.0 / state.eps2();
    Ok(state
        .u
        .iter()
        .enumerate()
        .map(|(v, z)| Complex64::new(kr[v], ki[v]) + z * (c * fem.lumped[v] * (z.norm_sqr() - 1.0)))
        .collect())
}

/// Residual `r = M^{-1} dE(u)` with the lumped mass `M`, so that
/// `<r, v>_M = dE(u)[v]` and `r = 0` exactly at discrete critical points.
pub fn gl_residual(state: &GlState) -> Result<Vec<Complex64>> {
    let g = gl_gradient(state)?;
    Ok(g.iter().zip(&state.disc.fem.lumped).map(|(z, m)| z / m).collect())
}

/// Lumped-mass inner product `Re sum_v m_v conj(a_v) b_v`.
pub fn mass_dot(state: &GlState, a: &[Complex64], b: &[Complex64]) -> f64 {
    state.disc.fem.lumped.iter().zip(a.iter().zip(b)).map(|(m, (x, y))| m * (x.re * y.re + x.im * y.im)).sum()
}

/// `||r||_M` of the residual.
pub fn residual_norm(state: &GlState) -> Result<f64> {
    let r = gl_residual(state)?;
    Ok(mass_dot(state, &r, &r).sqrt())
}

/// `H v` where `H` is the Hessian of the discrete energy.
pub fn hessian_form_apply(state: &GlState, v: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(state, v)?;
    let fem = &state.disc.fem;
    let re: Vec<f64> = v.iter().map(|z| z.re).collect();
    let im: Vec<f64> = v.iter().map(|z| z.im).collect();
    let kr = fem.stiffness_apply(&re);
    let ki = fem.stiffness_apply(&im);
    let c = 1.0 / state.eps2();
    Ok((0..v.len())
        .map(|i| {
            let u = state.u[i];
            let dot = u.re * v[i].re + u.im * v[i].im;
            let m = c * fem.lumped[i];
            Complex64::new(kr[i], ki[i]) + v[i] * (m * (u.norm_sqr() - 1.0)) + u * (2.0 * m * dot)
        })
        .collect())
}

/// `L_u v = M^{-1} H v`, the operator of the second variation.
pub fn gl_hessian_apply(state: &GlState, v: &[Complex64]) -> Result<Vec<Complex64>> {
    let h = hessian_form_apply(state, v)?;
    Ok(h.iter().zip(&state.disc.fem.lumped).map(|(z, m)| z / m).collect())
}

/// `d^2E(u)(v, v) = int |grad v|^2 + ((|u|^2 - 1)|v|^2 + 2 (u.v)^2) / eps^2`.
pub fn gl_outer_second_variation(state: &GlState, v: &[Complex64]) -> Result<f64> {
    check_len(state, v)?;
    let fem = &state.disc.fem;
    let re: Vec<f64> = v.iter().map(|z| z.re).collect();
    let im: Vec<f64> = v.iter().map(|z| z.im).collect();
    let c = 1.0 / state.eps2();
    let pot: f64 = (0..v.len())
        .map(|i| {
            let u = state.u[i];
            let dot = u.re * v[i].re + u.im * v[i].im;
            fem.lumped[i] * c * ((u.norm_sqr() - 1.0) * v[i].norm_sqr() + 2.0 * dot * dot)
        })
        .sum();
    Ok(fem.dirichlet(&re) + fem.dirichlet(&im) + pot)
}

/// First outer variation `dE(u)[v]`.
pub fn gl_outer_first_variation(state: &GlState, v: &[Complex64]) -> Result<f64> {
    check_len(state, v)?;
    let g = gl_gradient(state)?;
    Ok(g.iter().zip(v).map(|(a, b)| a.re * b.re + a.im * b.im).sum())
}

/// Hessian as a sparse `2V x 2V` matrix on interleaved real unknowns.
pub fn gl_hessian_matrix(state: &GlState) -> CsrMatrix {
    let fem = &state.disc.fem;
    let nv = state.u.len();
    let c = 1.0 / state.eps2();
    let mut trips = Vec::with_capacity(2 * fem.stiffness.nnz() + 4 * nv);
    for (r, col, val) in fem.stiffness.iter() {
        trips.push((2 * r, 2 * col, val));
        trips.push((2 * r + 1, 2 * col + 1, val));
    }
    for (i, z) in state.u.iter().enumerate() {
        let m = c * fem.lumped[i];
        let s = z.norm_sqr() - 1.0;
        let (a, b) = (z.re, z.im);
        trips.push((2 * i, 2 * i, m * (s + 2.0 * a * a)));
        trips.push((2 * i, 2 * i + 1, m * 2.0 * a * b));
        trips.push((2 * i + 1, 2 * i, m * 2.0 * a * b));
        trips.push((2 * i + 1, 2 * i + 1, m * (s + 2.0 * b * b)));
    }
    CsrMatrix::from_triplets(2 * nv, &trips)
}

/// Lumped mass on interleaved real unknowns as a sparse diagonal matrix.
pub fn real_mass_matrix(state: &GlState) -> CsrMatrix {
    let trips: Vec<_> = state
        .disc
        .fem
        .lumped
        .iter()
        .enumerate()
        .flat_map(|(i, &m)| [(2 * i, 2 * i, m), (2 * i + 1, 2 * i + 1, m)])
        .collect();
    CsrMatrix::from_triplets(2 * state.u.len(), &trips)
}

/// Starting fields for the search for non-constant critical points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ansatz {
    /// `u = x1 + i x2`.
    VortexPair,
    /// `u = (x1 + i x2) x3`.
    ModulatedPair,
    /// Seeded random combination of spherical harmonics of degree at most 2.
    RandomHarmonics,
    /// `u = 0.5`.
    HalfConstant,
    /// `u = 0`.
    Zero,
}

impl Ansatz {
    pub const ALL: [Ansatz; 5] =
        [Ansatz::VortexPair, Ansatz::ModulatedPair, Ansatz::RandomHarmonics, Ansatz::HalfConstant, Ansatz::Zero];

    pub fn name(self) -> &'static str {
        match self {
            Ansatz::VortexPair => "vortex-pair",
            Ansatz::ModulatedPair => "modulated-pair",
            Ansatz::RandomHarmonics => "random-harmonics",
            Ansatz::HalfConstant => "half-constant",
            Ansatz::Zero => "zero",
        }
    }

    pub fn parse(s: &str) -> Option<Ansatz> {
        Self::ALL.iter().copied().find(|a| a.name() == s)
    }

    /// Builds the starting state; `seed` only matters for random harmonics.
    pub fn build(self, disc: Arc<Discretization>, params: GlParams, seed: u64) -> Result<GlState> {
        match self {
            Ansatz::VortexPair => GlState::from_fn(disc, params, |x| Complex64::new(x[0], x[1])),
            Ansatz::ModulatedPair => GlState::from_fn(disc, params, |x| Complex64::new(x[0], x[1]) * x[2]),
            Ansatz::HalfConstant => GlState::constant(disc, params, Complex64::new(0.5, 0.0)),
            Ansatz::Zero => GlState::constant(disc, params, Complex64::new(0.0, 0.0)),
            Ansatz::RandomHarmonics => {
                use rand_distr::{Distribution, StandardNormal};
                let mut rng = crate::rng::stream(seed, "gl-ansatz");
                let mut c = [[0.0f64; 2]; 9];
                for row in c.iter_mut() {
                    for v in row.iter_mut() {
                        *v = StandardNormal.sample(&mut rng);
                    }
                }
                GlState::from_fn(disc, params, move |x| {
                    let b = low_harmonics(x);
                    let mut z = Complex64::new(0.0, 0.0);
                    for k in 0..9 {
                        z += Complex64::new(c[k][0], c[k][1]) * b[k];
                    }
                    z
                })
            }
        }
    }
}

/// Real basis of spherical harmonics of degree at most 2 (unnormalized).
pub fn low_harmonics(x: [f64; 3]) -> [f64; 9] {
    [
        1.0,
        x[0],
        x[1],
        x[2],
        x[0] * x[1],
        x[1] * x[2],
        x[0] * x[2],
        x[0] * x[0] - x[1] * x[1],
        3.0 * x[2] * x[2] - 1.0,
    ]
}
