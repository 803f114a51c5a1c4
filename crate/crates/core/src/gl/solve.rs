use num_complex::Complex64;

use super::{
    from_real, gl_energy, gl_gradient, gl_hessian_matrix, real_mass_matrix, residual_norm, to_real, GlState,
};
use crate::linalg::{lanczos::factor_shifted, minres, Cholesky, CsrMatrix};
use crate::{Result, StabError};

#[derive(Clone, Debug, PartialEq)]
pub struct GlSchedule {
    pub flow_steps: usize,
    pub flow_step: f64,
    /// Residual level at which the flow hands over to Newton.
    pub switch_tol: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub line_search: bool,
}

impl Default for GlSchedule {
    fn default() -> Self {
        GlSchedule {
            flow_steps: 4000,
            flow_step: 0.05,
            switch_tol: 1e-2,
            newton_tol: 1e-8,
            newton_max_iter: 60,
            line_search: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolvePhase {
    Flow,
    Newton,
}

#[derive(Clone, Debug, Default)]
pub struct SolveLog {
    pub energies: Vec<f64>,
    pub residuals: Vec<f64>,
    pub phases: Vec<SolvePhase>,
    pub flow_steps: usize,
    pub rejected_flow_steps: usize,
    pub newton_steps: usize,
    pub minres_iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub message: String,
}

impl SolveLog {
    fn record(&mut self, phase: SolvePhase, e: f64, r: f64) {
        self.energies.push(e);
        self.residuals.push(r);
        self.phases.push(phase);
    }

    /// Largest energy increase between consecutive flow iterates.
    pub fn max_flow_increase(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for i in 1..self.energies.len() {
            if self.phases[i] == SolvePhase::Flow && self.phases[i - 1] == SolvePhase::Flow {
                worst = worst.max(self.energies[i] - self.energies[i - 1]);
            }
        }
        worst
    }
}

fn flow_matrix(state: &GlState, tau: f64, stab: f64) -> Result<Cholesky> {
    let fem = &state.disc.fem;
    let d: Vec<f64> = fem.lumped.iter().map(|m| m * (1.0 + tau * stab)).collect();
    let a = CsrMatrix::diagonal(&d).add_scaled(tau, &fem.stiffness);
    Cholesky::factor(&a)
}

/// One stabilized semi-implicit step of the `L^2` gradient flow,
/// `(M + tau K + tau S M) u+ = M u + tau S M u - tau M f(u)`.
fn flow_step(state: &GlState, chol: &Cholesky, tau: f64, stab: f64) -> Vec<Complex64> {
    let m = &state.disc.fem.lumped;
    let c = 1.0 / state.eps2();
    let mut re = Vec::with_capacity(m.len());
    let mut im = Vec::with_capacity(m.len());
    for (i, z) in state.u.iter().enumerate() {
        let f = z * (c * (z.norm_sqr() - 1.0));
        let rhs = z * (m[i] * (1.0 + tau * stab)) - f * (tau * m[i]);
        re.push(rhs.re);
        im.push(rhs.im);
    }
    chol.solve_in_place(&mut re);
    chol.solve_in_place(&mut im);
    re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()
}

/// Gradient flow until the residual drops below `switch_tol`, then Newton
/// with preconditioned MINRES and backtracking on the residual norm.
pub fn gl_solve(state: &GlState, schedule: &GlSchedule) -> Result<(GlState, SolveLog)> {
    if !(schedule.flow_step > 0.0 && schedule.newton_tol > 0.0 && schedule.switch_tol > 0.0) {
        return Err(StabError::InvalidArgument("step sizes and tolerances must be positive".into()));
    }
    let mut log = SolveLog::default();
    let mut cur = state.clone();
    let mut e = gl_energy(&cur)?;
    let mut r = residual_norm(&cur)?;
    log.record(SolvePhase::Flow, e, r);

    let stab = 2.0 / cur.eps2();
    let mut tau = schedule.flow_step;
    let mut chol = flow_matrix(&cur, tau, stab)?;
    let mut accepted_since_change = 0usize;
    while r > schedule.switch_tol && r > schedule.newton_tol && log.flow_steps < schedule.flow_steps {
        let next = cur.with_u(flow_step(&cur, &chol, tau, stab))?;
        let e_next = gl_energy(&next)?;
        if e_next > e {
            log.rejected_flow_steps += 1;
            tau *= 0.5;
            if tau < 1e-12 {
                log.message = "flow step underflow".into();
                break;
            }
            chol = flow_matrix(&cur, tau, stab)?;
            accepted_since_change = 0;
            continue;
        }
        cur = next;
        e = e_next;
        r = residual_norm(&cur)?;
        log.flow_steps += 1;
        log.record(SolvePhase::Flow, e, r);
        accepted_since_change += 1;
        if accepted_since_change >= 25 && tau < 1.0 {
            tau = (tau * 2.0).min(1.0);
            chol = flow_matrix(&cur, tau, stab)?;
            accepted_since_change = 0;
        }
    }

    while r > schedule.newton_tol && log.newton_steps < schedule.newton_max_iter {
        let h = gl_hessian_matrix(&cur);
        let mass = real_mass_matrix(&cur);
        let c = 1.0 / cur.eps2();
        let sigma = cur.u.iter().map(|z| c * (z.norm_sqr() - 1.0)).fold(f64::INFINITY, f64::min) - 1.0;
        let (pre, _) = factor_shifted(&h, &mass, sigma)?;
        let g = to_real(&gl_gradient(&cur)?);
        let b: Vec<f64> = g.iter().map(|x| -x).collect();
        let out = minres(&|x| h.matvec(x), &|x| pre.solve(x), &b, 1e-12, 400);
        log.minres_iterations += out.iterations;
        let dir = from_real(&out.x);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<Complex64> = cur.u.iter().zip(&dir).map(|(u, d)| u + d * alpha).collect();
            let ts = cur.with_u(trial)?;
            let tr = residual_norm(&ts)?;
            if !schedule.line_search || tr < (1.0 - 1e-4 * alpha) * r {
                accepted = Some((ts, tr));
                break;
            }
            alpha *= 0.5;
        }
        log.newton_steps += 1;
        match accepted {
            Some((ts, tr)) => {
                cur = ts;
                r = tr;
                e = gl_energy(&cur)?;
                log.record(SolvePhase::Newton, e, r);
            }
            None => {
                log.message = "line search failed".into();
                break;
            }
        }
    }
    log.final_residual = r;
    log.converged = r <= schedule.newton_tol;
    if log.message.is_empty() {
        log.message = if log.converged { "converged".into() } else { "iteration limit".into() };
    }
    Ok((cur, log))
}
