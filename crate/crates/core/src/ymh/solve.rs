use std::collections::VecDeque;

use super::{gradient_norm, metric_matrix, ymh_energy, ymh_gradient_real, ymh_hessian_matrix, YmhState};
use crate::linalg::{lanczos::factor_shifted, minres};
use crate::{Result, StabError};

#[derive(Clone, Debug, PartialEq)]
pub struct YmhSchedule {
    pub tol: f64,
    pub max_iter: usize,
    pub memory: usize,
    /// Gradient norm at which L-BFGS hands over to Newton polishing.
    pub polish_below: f64,
    pub newton_max_iter: usize,
}

impl Default for YmhSchedule {
    fn default() -> Self {
        YmhSchedule { tol: 1e-8, max_iter: 20000, memory: 12, polish_below: 1e-4, newton_max_iter: 30 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct YmhLog {
    pub energies: Vec<f64>,
    pub gradient_norms: Vec<f64>,
    pub lbfgs_iterations: usize,
    pub newton_steps: usize,
    pub minres_iterations: usize,
    pub guard_rejections: usize,
    pub converged: bool,
    pub message: String,
}

impl YmhLog {
    /// Largest increase between consecutive logged energies.
    pub fn max_energy_increase(&self) -> f64 {
        self.energies.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A step is admissible when every plaquette flux stays strictly inside
/// `(-pi, pi)` by a margin and the degree is unchanged.
fn admissible(state: &YmhState, degree: i64) -> bool {
    state.bundle.max_abs_flux() < std::f64::consts::PI - 1e-6 && matches!(state.degree(), Ok(d) if d == degree)
}

fn trial(state: &YmhState, x: &[f64], dir: &[f64], alpha: f64) -> Result<YmhState> {
    let y: Vec<f64> = x.iter().zip(dir).map(|(a, b)| a + alpha * b).collect();
    state.from_real(&y)
}

/// L-BFGS in the natural metric with Armijo backtracking, followed by Newton
/// steps solved with preconditioned MINRES. Every accepted step keeps the
/// energy non-increasing and the degree fixed.
pub fn ymh_solve(state: &YmhState, schedule: &YmhSchedule) -> Result<(YmhState, YmhLog)> {
    if !(schedule.tol > 0.0) {
        return Err(StabError::InvalidArgument("tolerance must be positive".into()));
    }
    let degree = state.degree()?;
    let nd = state.metric_diag();
    let mut log = YmhLog::default();
    let mut cur = state.clone();
    let mut e = ymh_energy(&cur)?;
    let mut g = ymh_gradient_real(&cur)?;
    let gnorm = |g: &[f64]| g.iter().zip(&nd).map(|(a, n)| a * a / n).sum::<f64>().sqrt();
    let mut gn = gnorm(&g);
    log.energies.push(e);
    log.gradient_norms.push(gn);

    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut gamma = 1e-3;
    while gn > schedule.tol.max(schedule.polish_below) && log.lbfgs_iterations < schedule.max_iter {
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let mut r: Vec<f64> = q.iter().zip(&nd).map(|(a, n)| gamma * a / n).collect();
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &r);
            r.iter_mut().zip(s).for_each(|(ri, si)| *ri += (a - b) * si);
        }
        let mut dir: Vec<f64> = r.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            hist.clear();
            dir = g.iter().zip(&nd).map(|(a, n)| -gamma * a / n).collect();
            slope = dot(&g, &dir);
        }
        let x = cur.to_real();
        let mut alpha = 1.0;
        let mut next = None;
        for _ in 0..60 {
            let t = trial(&cur, &x, &dir, alpha)?;
            if admissible(&t, degree) {
                let et = ymh_energy(&t)?;
                if et <= e + 1e-4 * alpha * slope {
                    next = Some((t, et));
                    break;
                }
            } else {
                log.guard_rejections += 1;
            }
            alpha *= 0.5;
        }
        let Some((t, et)) = next else {
            log.message = "line search failed".into();
            break;
        };
        let gt = ymh_gradient_real(&t)?;
        let s: Vec<f64> = dir.iter().map(|d| alpha * d).collect();
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            let yny: f64 = y.iter().zip(&nd).map(|(a, n)| a * a / n).sum();
            gamma = sy / yny;
            hist.push_back((s, y, 1.0 / sy));
            if hist.len() > schedule.memory {
                hist.pop_front();
            }
        }
        cur = t;
        e = et;
        g = gt;
        gn = gnorm(&g);
        log.lbfgs_iterations += 1;
        log.energies.push(e);
        log.gradient_norms.push(gn);
    }

    // Inexact Newton; the preconditioner is factored once since the
    // Hessian barely moves during the polish.
    let mut pre = None;
    while gn > schedule.tol && log.newton_steps < schedule.newton_max_iter && log.message.is_empty() {
        let h = ymh_hessian_matrix(&cur);
        if pre.is_none() {
            pre = Some(factor_shifted(&h, &metric_matrix(&cur), -1.0)?.0);
        }
        let pc = pre.as_ref().expect("factored above");
        let b: Vec<f64> = g.iter().map(|v| -v).collect();
        let forcing = (gn / (1.0 + gn)).sqrt().clamp(1e-6, 1e-2);
        let out = minres(&|v| h.matvec(v), &|v| pc.solve(v), &b, forcing, 400);
        log.minres_iterations += out.iterations;
        let x = cur.to_real();
        let slope = dot(&g, &out.x);
        let mut alpha = 1.0;
        let mut next = None;
        for _ in 0..40 {
            let t = trial(&cur, &x, &out.x, alpha)?;
            if admissible(&t, degree) {
                let et = ymh_energy(&t)?;
                let gt = ymh_gradient_real(&t)?;
                let gtn = gnorm(&gt);
                let decrease = slope < 0.0 && et <= e + 1e-4 * alpha * slope;
                if decrease || (et <= e + 1e-13 * (1.0 + e.abs()) && gtn < gn) {
                    next = Some((t, et, gt, gtn));
                    break;
                }
            } else {
                log.guard_rejections += 1;
            }
            alpha *= 0.5;
        }
        log.newton_steps += 1;
        let Some((t, et, gt, gtn)) = next else {
            log.message = "newton line search failed".into();
            break;
        };
        cur = t;
        e = et.min(e);
        g = gt;
        gn = gtn;
        log.energies.push(et);
        log.gradient_norms.push(gn);
    }
    log.converged = gn <= schedule.tol;
    if log.message.is_empty() {
        log.message = if log.converged { "converged".into() } else { "iteration limit".into() };
    }
    debug_assert!((gradient_norm(&cur)? - gn).abs() <= 1e-9 * (1.0 + gn));
    Ok((cur, log))
}
