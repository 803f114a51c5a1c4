//! Numerical oracles shared by experiments and tests.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{flow_point, Discretization, FieldJet};
use crate::gl::{gl_energy, gl_gradient, gl_inner_first, gl_inner_second_general, hessian_form_apply, GlParams, GlState};
use crate::rng::stream;
use crate::ymh::{
    gauge_transform, ymh_energy, ymh_gradient_real, ymh_hessian_matrix, GaugeFunction, YmhState,
};
use crate::Result;

/// Smooth test field used by the flow-difference oracles.
pub fn smooth_field(x: [f64; 3]) -> Complex64 {
    Complex64::new(0.3 + x[0] + 0.5 * x[1] * x[2], 0.2 * x[2] - 0.4 * x[0] * x[0] + 0.1)
}

/// Time steps of the flow differences, coarsest first.
pub const FLOW_STEPS: [f64; 4] = [0.04, 0.02, 0.01, 0.005];

#[derive(Clone, Debug)]
pub struct FlowDifferences {
    pub first: f64,
    pub second: f64,
    /// Centered first and second differences of `t -> E(phi_t^* u)`.
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub evaluations: usize,
}

impl FlowDifferences {
    pub fn first_relative(&self) -> f64 {
        (self.d1[self.d1.len() - 1] - self.first).abs() / self.first.abs()
    }

    pub fn second_relative(&self) -> f64 {
        (self.d2[self.d2.len() - 1] - self.second).abs() / self.second.abs()
    }

    pub fn first_order(&self) -> f64 {
        observed_order(&self.d1)
    }

    pub fn second_order(&self) -> f64 {
        observed_order(&self.d2)
    }
}

/// Smallest `log2` ratio of successive increments of a sequence computed
/// with halving steps.
pub fn observed_order(seq: &[f64]) -> f64 {
    let inc: Vec<f64> = seq.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    inc.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min)
}

/// Inner variations of the energy of [`smooth_field`] along `jet`, together
/// with centered differences of the energy of the analytically pulled back
/// field `u(phi_t(x))`.
pub fn flow_differences(disc: Arc<Discretization>, epsilon: f64, jet: &FieldJet) -> Result<FlowDifferences> {
    let p = GlParams::new(epsilon)?;
    let s = GlState::from_fn(disc.clone(), p, smooth_field)?;
    let first = gl_inner_first(&s, jet)?;
    let second = gl_inner_second_general(&s, jet)?;
    let energy = |t: f64| -> Result<f64> {
        let st = GlState::from_fn(disc.clone(), p, |x| {
            let y = flow_point(jet, &x, t);
            smooth_field([y[0], y[1], y[2]])
        })?;
        gl_energy(&st)
    };
    let e0 = energy(0.0)?;
    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    for t in FLOW_STEPS {
        let (ep, em) = (energy(t)?, energy(-t)?);
        d1.push((ep - em) / (2.0 * t));
        d2.push((ep - 2.0 * e0 + em) / (t * t));
    }
    Ok(FlowDifferences { first, second, d1, d2, evaluations: 1 + 2 * FLOW_STEPS.len() })
}

fn normal_vec(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn rel_vec(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let n: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    d / n.max(1e-300)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdErrors {
    pub gradient: f64,
    pub hessian: f64,
}

/// Central-difference checks of the GL gradient and Hessian along a random
/// direction, with step `h`.
pub fn gl_fd_errors(state: &GlState, h: f64, seed: u64) -> Result<FdErrors> {
    let mut rng = stream(seed, "fd-gl");
    let n = state.u.len();
    let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))).collect();
    let shifted = |s: f64| state.with_u(state.u.iter().zip(&v).map(|(u, d)| u + d * s).collect());
    let (sp, sm) = (shifted(h)?, shifted(-h)?);
    let g = gl_gradient(state)?;
    let exact: f64 = g.iter().zip(&v).map(|(a, b)| a.re * b.re + a.im * b.im).sum();
    let fd = (gl_energy(&sp)? - gl_energy(&sm)?) / (2.0 * h);
    let hv = crate::gl::to_real(&hessian_form_apply(state, &v)?);
    let gp = crate::gl::to_real(&gl_gradient(&sp)?);
    let gm = crate::gl::to_real(&gl_gradient(&sm)?);
    let hfd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    Ok(FdErrors { gradient: rel(fd, exact), hessian: rel_vec(&hfd, &hv) })
}

/// As [`gl_fd_errors`] for the lattice YMH energy.
pub fn ymh_fd_errors(state: &YmhState, h: f64, seed: u64) -> Result<FdErrors> {
    let mut rng = stream(seed, "fd-ymh");
    let x = state.to_real();
    let v = normal_vec(x.len(), &mut rng);
    let at = |s: f64| state.from_real(&x.iter().zip(&v).map(|(a, d)| a + s * d).collect::<Vec<_>>());
    let (sp, sm) = (at(h)?, at(-h)?);
    let g = ymh_gradient_real(state)?;
    let exact: f64 = g.iter().zip(&v).map(|(a, b)| a * b).sum();
    let fd = (ymh_energy(&sp)? - ymh_energy(&sm)?) / (2.0 * h);
    let hv = ymh_hessian_matrix(state).matvec(&v);
    let gp = ymh_gradient_real(&sp)?;
    let gm = ymh_gradient_real(&sm)?;
    let hfd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    Ok(FdErrors { gradient: rel(fd, exact), hessian: rel_vec(&hfd, &hv) })
}

/// Seeded random section of moderate modulus on the given bundle.
pub fn random_section(state: &YmhState, seed: u64) -> Result<YmhState> {
    let mut rng = stream(seed, "ymh-section");
    let u = state
        .u
        .iter()
        .map(|_| Complex64::new(0.6 + 0.3 * rng.random::<f64>(), 0.4 * rng.random::<f64>() - 0.2))
        .collect();
    YmhState::new(state.bundle.clone(), u, state.epsilon)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugeErrors {
    /// `|E(g.s) - E(s)| / (1 + E(s))`.
    pub energy: f64,
    pub max_flux_change: f64,
    pub max_modulus_change: f64,
    pub degree_preserved: bool,
    /// `|g1.(g2.s) - (g1 + g2).s|` over all unknowns.
    pub composition: f64,
    /// Degree unchanged after random edge perturbations below the wrap margin.
    pub quantized: bool,
}

pub fn gauge_errors(state: &YmhState, seed: u64) -> Result<GaugeErrors> {
    let mut rng = stream(seed, "gauge-check");
    let nv = state.u.len();
    let mut phi = || GaugeFunction { phi: (0..nv).map(|_| std::f64::consts::PI * (2.0 * rng.random::<f64>() - 1.0)).collect() };
    let (g1, g2) = (phi(), phi());
    let t = gauge_transform(state, &g1)?;
    let e = ymh_energy(state)?;
    let energy = (ymh_energy(&t)? - e).abs() / (1.0 + e);
    let max_flux_change =
        state.bundle.fluxes().iter().zip(t.bundle.fluxes()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let max_modulus_change = state.u.iter().zip(&t.u).map(|(a, b)| (a.norm() - b.norm()).abs()).fold(0.0, f64::max);
    let degree_preserved = t.degree()? == state.degree()?;
    let both = gauge_transform(&gauge_transform(state, &g2)?, &g1)?;
    let sum = GaugeFunction { phi: g1.phi.iter().zip(&g2.phi).map(|(a, b)| a + b).collect() };
    let direct = gauge_transform(state, &sum)?;
    let du = both.u.iter().zip(&direct.u).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let dt = both
        .bundle
        .theta
        .iter()
        .zip(&direct.bundle.theta)
        .map(|(a, b)| crate::ymh::wrap(a - b).abs())
        .fold(0.0, f64::max);
    let margin = std::f64::consts::PI - state.bundle.max_abs_flux();
    let delta = 0.49 * margin / 3.0;
    let theta: Vec<f64> = state.bundle.theta.iter().map(|a| a + delta * (2.0 * rng.random::<f64>() - 1.0)).collect();
    let perturbed = crate::ymh::LatticeBundle::new(state.bundle.disc.clone(), theta)?;
    let quantized = crate::ymh::ymh_degree(&perturbed)? == state.degree()?;
    Ok(GaugeErrors { energy, max_flux_change, max_modulus_change, degree_preserved, composition: du.max(dt), quantized })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_quadratic_sequence() {
        let seq: Vec<f64> = FLOW_STEPS.iter().map(|t| 1.0 + 3.0 * t * t).collect();
        assert!((observed_order(&seq) - 2.0).abs() < 1e-9);
    }
}
