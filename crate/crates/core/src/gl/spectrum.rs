use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::inner::directional_derivative;
use super::{
    from_real, gl_hessian_matrix, gl_inner_second_critical, gl_outer_second_variation, hessian_form_apply, mass_dot,
    real_mass_matrix, GlState,
};
use crate::geometry::conformal_field_jet;
use crate::linalg::{shift_invert_eigs, EigOptions, EigResult};
use crate::{Result, StabError};

/// Smallest eigenpairs of a symmetric pencil.
#[derive(Clone, Debug)]
pub struct SpectrumReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Mass-orthonormal eigenvectors on the real unknowns.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `||(H - lambda M) v|| / ||M v||`.
    pub residual_norms: Vec<f64>,
    pub converged: Vec<bool>,
    pub shift: f64,
    pub solves: usize,
}

impl From<EigResult> for SpectrumReport {
    fn from(r: EigResult) -> Self {
        SpectrumReport {
            eigenvalues: r.values,
            eigenvectors: r.vectors,
            residual_norms: r.residuals,
            converged: r.converged,
            shift: r.shift,
            solves: r.solves,
        }
    }
}

impl SpectrumReport {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,eigenvalue,residualNorm\n");
        for (i, (l, r)) in self.eigenvalues.iter().zip(&self.residual_norms).enumerate() {
            s.push_str(&format!("{i},{l:.17e},{r:.17e}\n"));
        }
        s
    }
}

/// Lower bound for the spectrum: the potential part of the Hessian is at
/// least `min_v (|u_v|^2 - 1) / eps^2` times the mass.
fn shift_hint(state: &GlState) -> f64 {
    let c = 1.0 / state.eps2();
    state.u.iter().map(|z| c * (z.norm_sqr() - 1.0)).fold(f64::INFINITY, f64::min) - 1.0
}

/// `k` smallest eigenvalues of `L_u`, i.e. of the pencil (Hessian, lumped
/// mass) on the real `2V`-dimensional space.
pub fn gl_spectrum(state: &GlState, k: usize, seed: u64) -> Result<SpectrumReport> {
    let nv = state.u.len();
    if k == 0 || k > nv / 2 {
        return Err(StabError::InvalidArgument(format!("k = {k} outside 1..={}", nv / 2)));
    }
    let h = gl_hessian_matrix(state);
    let m = real_mass_matrix(state);
    let rep: SpectrumReport = shift_invert_eigs(&h, &m, shift_hint(state), &EigOptions::new(k, seed), None)?.into();
    if !rep.all_converged() {
        return Err(StabError::NotConverged(format!(
            "eigensolver: residuals {:?}",
            rep.residual_norms
        )));
    }
    Ok(rep)
}

/// Number of eigenvalues below `-tol` on the real space, certified by a
/// computed eigenvalue at or above `-tol`.
pub fn gl_morse_index(state: &GlState, tol: f64, seed: u64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(StabError::InvalidArgument("tol must be positive".into()));
    }
    let mut k = 8;
    loop {
        let rep = gl_spectrum(state, k, seed)?;
        let idx = rep.eigenvalues.iter().filter(|&&l| l < -tol).count();
        if idx < k {
            return Ok(idx);
        }
        if 2 * k > state.u.len() / 2 {
            return Err(StabError::NotConverged("index exceeds the computable range".into()));
        }
        k *= 2;
    }
}

/// `v_i = <grad u, X_{e_i}>` for the three coordinate directions.
pub fn conformal_directions(state: &GlState) -> Result<[Vec<Complex64>; 3]> {
    let mut out: [Vec<Complex64>; 3] = Default::default();
    for (i, o) in out.iter_mut().enumerate() {
        let mut xi = [0.0; 3];
        xi[i] = 1.0;
        *o = directional_derivative(state, &conformal_field_jet(&xi, 2)?, &state.u)?;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateSource {
    ConformalSpan,
    Spectrum,
    None,
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub source: CertificateSource,
    pub direction: Option<Vec<Complex64>>,
    /// Rayleigh quotient of the returned direction, or the smallest computed
    /// eigenvalue when nothing negative was found.
    pub rayleigh_quotient: f64,
    /// Smallest quotient over the span of the conformal directions, if the
    /// span is non-trivial.
    pub span_quotient: Option<f64>,
    /// `sum_i d^2E(v_i, v_i)`.
    pub outer_sum: f64,
    /// `sum_i d^2E(X_i, X_i)` in its specialized form.
    pub inner_sum: f64,
    /// Scale `1 + int |grad u|^2 + E` for relative tolerances.
    pub scale: f64,
}

/// Minimizes the Rayleigh quotient over `span{v_i}`. Returns the quotient and
/// the coefficients, or `None` when the span is numerically trivial.
fn span_minimum(state: &GlState, dirs: &[Vec<Complex64>]) -> Result<Option<(f64, Vec<f64>)>> {
    let k = dirs.len();
    let hv: Vec<Vec<Complex64>> = dirs.iter().map(|d| hessian_form_apply(state, d)).collect::<Result<_>>()?;
    let mut h = DMatrix::zeros(k, k);
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            h[(i, j)] = hv[j].iter().zip(&dirs[i]).map(|(a, b)| a.re * b.re + a.im * b.im).sum::<f64>();
            m[(i, j)] = mass_dot(state, &dirs[i], &dirs[j]);
        }
    }
    let h = (&h + h.transpose()) * 0.5;
    let m = (&m + m.transpose()) * 0.5;
    let em = SymmetricEigen::new(m);
    let top = em.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-14 * state.disc.fem.total_area() * (1.0 + state.max_modulus().powi(2));
    if top <= floor {
        return Ok(None);
    }
    let keep: Vec<usize> = (0..k).filter(|&i| em.eigenvalues[i] > 1e-10 * top).collect();
    let mut basis = DMatrix::zeros(k, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let s = 1.0 / em.eigenvalues[i].sqrt();
        for r in 0..k {
            basis[(r, c)] = em.eigenvectors[(r, i)] * s;
        }
    }
    let reduced = basis.transpose() * &h * &basis;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let er = SymmetricEigen::new(reduced);
    let (imin, lmin) = er
        .eigenvalues
        .iter()
        .cloned()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    let coeffs = &basis * er.eigenvectors.column(imin);
    Ok(Some((lmin, coeffs.iter().cloned().collect())))
}

/// Searches for a negative direction of the second variation, first in the
/// span of the conformal directions and then among the smallest eigenpairs.
pub fn gl_instability_certificate(state: &GlState, tol: f64, seed: u64) -> Result<Certificate> {
    let dirs = conformal_directions(state)?;
    let mut outer_sum = 0.0;
    let mut inner_sum = 0.0;
    for (i, d) in dirs.iter().enumerate() {
        outer_sum += gl_outer_second_variation(state, d)?;
        let mut xi = [0.0; 3];
        xi[i] = 1.0;
        inner_sum += gl_inner_second_critical(state, xi)?;
    }
    let scale = 1.0 + state.dirichlet() + super::gl_energy(state)?;
    let span = span_minimum(state, &dirs)?;
    let span_quotient = span.as_ref().map(|s| s.0);
    if let Some((q, c)) = &span {
        if *q < -tol {
            let n = state.u.len();
            let dir: Vec<Complex64> = (0..n).map(|v| dirs[0][v] * c[0] + dirs[1][v] * c[1] + dirs[2][v] * c[2]).collect();
            return Ok(Certificate {
                source: CertificateSource::ConformalSpan,
                direction: Some(dir),
                rayleigh_quotient: *q,
                span_quotient,
                outer_sum,
                inner_sum,
                scale,
            });
        }
    }
    let rep = gl_spectrum(state, 4, seed)?;
    let l1 = rep.lambda1();
    let (source, direction) = if l1 < -tol {
        (CertificateSource::Spectrum, Some(from_real(&rep.eigenvectors[0])))
    } else {
        (CertificateSource::None, None)
    };
    Ok(Certificate { source, direction, rayleigh_quotient: l1, span_quotient, outer_sum, inner_sum, scale })
}
