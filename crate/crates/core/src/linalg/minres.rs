//! Preconditioned MINRES for symmetric, possibly indefinite or singular
//! systems.

use super::dot;

#[derive(Clone, Debug)]
pub struct MinresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final estimate of the preconditioned residual norm relative to the
    /// initial one.
    pub rel_residual: f64,
    pub converged: bool,
}

/// Solves `A x = b` with symmetric `A` and symmetric positive-definite
/// preconditioner applied through `precond` (which computes `P^{-1} r`).
pub fn minres(
    apply: &dyn Fn(&[f64]) -> Vec<f64>,
    precond: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> MinresOutcome {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut yv = precond(&r1);
    let beta1 = dot(&r1, &yv).max(0.0).sqrt();
    if beta1 == 0.0 {
        return MinresOutcome { x, iterations: 0, rel_residual: 0.0, converged: true };
    }
    let mut r2 = r1.clone();
    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut itn = 0;
    let mut rel = 1.0;
    while itn < max_iter {
        itn += 1;
        let s = 1.0 / beta;
        let v: Vec<f64> = yv.iter().map(|t| s * t).collect();
        let mut yy = apply(&v);
        if itn >= 2 {
            let f = beta / oldb;
            for (a, b) in yy.iter_mut().zip(&r1) {
                *a -= f * b;
            }
        }
        let alfa = dot(&v, &yy);
        let f = alfa / beta;
        for (a, b) in yy.iter_mut().zip(&r2) {
            *a -= f * b;
        }
        r1 = std::mem::replace(&mut r2, yy);
        yv = precond(&r2);
        oldb = beta;
        beta = dot(&r2, &yv).max(0.0).sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let denom = 1.0 / gamma;
        let w1 = std::mem::replace(&mut w2, std::mem::take(&mut w));
        w = v
            .iter()
            .zip(&w1)
            .zip(&w2)
            .map(|((vi, a), b)| (vi - oldeps * a - delta * b) * denom)
            .collect();
        for (xi, wi) in x.iter_mut().zip(&w) {
            *xi += phi * wi;
        }
        rel = phibar / beta1;
        if rel <= tol || beta == 0.0 {
            return MinresOutcome { x, iterations: itn, rel_residual: rel, converged: true };
        }
    }
    MinresOutcome { x, iterations: itn, rel_residual: rel, converged: false }
}
