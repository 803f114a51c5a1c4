use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use super::{gl_inner_integrand, sphere_frame, ymh_inner_integrand, ConstantCurvature, FieldData, InnerJet, TraceReport};
use crate::rng::stream;
use crate::{Result, StabError};

/// Jet of `X_xi = xi - <x, xi> x` at `x` in the frame `frame`; with `full`
/// it also carries `nabla (nabla_X X) = f^2 Id - X X^T`.
pub fn conformal_jet(x: &DVector<f64>, frame: &[DVector<f64>], xi: &DVector<f64>, full: bool) -> InnerJet {
    let n = frame.len();
    let f = x.dot(xi);
    let xv = DVector::from_fn(n, |i, _| frame[i].dot(xi));
    let grad = DMatrix::identity(n, n) * (-f);
    let grad_nabla_xx = full.then(|| DMatrix::identity(n, n) * (f * f) - &xv * xv.transpose());
    InnerJet { x: xv, grad, grad_nabla_xx }
}

fn random_point(n: usize, rng: &mut impl rand::Rng) -> DVector<f64> {
    loop {
        let v: DVector<f64> = DVector::from_fn(n + 1, |_, _| StandardNormal.sample(rng));
        let nv = v.norm();
        if nv > 1e-3 {
            return v / nv;
        }
    }
}

fn basis_vector(m: usize, k: usize) -> DVector<f64> {
    DVector::from_fn(m, |i, _| if i == k { 1.0 } else { 0.0 })
}

/// `sum_xi` of the critical-point integrand of the second inner variation
/// over the standard basis of `R^{n+1}`.
pub fn sphere_gl_sum(x: &DVector<f64>, data: &FieldData) -> f64 {
    let n = x.len() - 1;
    let frame = sphere_frame(x);
    let curv = ConstantCurvature { n, k: 1.0 };
    (0..=n)
        .map(|k| gl_inner_integrand(&conformal_jet(x, &frame, &basis_vector(n + 1, k), false), data, &curv))
        .sum()
}

/// `sum_xi` of the YMH stability integrand over the standard basis.
pub fn sphere_ymh_sum(x: &DVector<f64>, data: &FieldData) -> f64 {
    let n = x.len() - 1;
    let frame = sphere_frame(x);
    let curv = ConstantCurvature { n, k: 1.0 };
    (0..=n)
        .map(|k| ymh_inner_integrand(&conformal_jet(x, &frame, &basis_vector(n + 1, k), false), data, &curv))
        .sum()
}

/// `4 (4 - n) eps^2 |F|^2 + 2 (2 - n) |Du|^2`.
pub fn sphere_ymh_target(n: usize, data: &FieldData) -> f64 {
    let n = n as f64;
    let e2 = data.epsilon * data.epsilon;
    4.0 * (4.0 - n) * e2 * data.f_norm2() + 2.0 * (2.0 - n) * data.du_norm2()
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(StabError::InvalidArgument(format!("dimension {n} < 2")));
    }
    Ok(())
}

/// Largest deviation of `sum_xi` of the GL integrand from
/// `-(n-2)|grad u|^2`, relative to `1 + |grad u|^2 + e`.
pub fn sphere_gl_trace(n: usize, samples: usize, seed: u64) -> Result<TraceReport> {
    sphere_gl_trace_with(n, samples, seed, |_| {})
}

/// As [`sphere_gl_trace`] with `modify` applied to every data sample.
pub fn sphere_gl_trace_with(
    n: usize,
    samples: usize,
    seed: u64,
    modify: impl Fn(&mut FieldData),
) -> Result<TraceReport> {
    check_dim(n)?;
    let mut rng = stream(seed, "pointlab-sphere-gl");
    let devs = (0..samples)
        .map(|_| {
            let x = random_point(n, &mut rng);
            let mut data = FieldData::random(n, &mut rng);
            modify(&mut data);
            let g2 = data.grad_u_norm2();
            let dev = sphere_gl_sum(&x, &data) + (n as f64 - 2.0) * g2;
            (dev, 1.0 + g2 + data.e_eps)
        })
        .collect();
    Ok(TraceReport::from_samples("sphere-gl", n, seed, devs))
}

/// Largest deviation of `sum_xi` of the YMH integrand from
/// `4(4-n) eps^2 |F|^2 + 2(2-n)|Du|^2`, relative to
/// `1 + e + eps^2 |F|^2 + |Du|^2`.
pub fn sphere_ymh_trace(n: usize, samples: usize, seed: u64) -> Result<TraceReport> {
    sphere_ymh_trace_with(n, samples, seed, |_| {})
}

/// As [`sphere_ymh_trace`] with `modify` applied to every data sample.
pub fn sphere_ymh_trace_with(
    n: usize,
    samples: usize,
    seed: u64,
    modify: impl Fn(&mut FieldData),
) -> Result<TraceReport> {
    check_dim(n)?;
    let mut rng = stream(seed, "pointlab-sphere-ymh");
    let devs = (0..samples)
        .map(|_| {
            let x = random_point(n, &mut rng);
            let mut data = FieldData::random(n, &mut rng);
            modify(&mut data);
            let e2 = data.epsilon * data.epsilon;
            let dev = sphere_ymh_sum(&x, &data) - sphere_ymh_target(n, &data);
            (dev, 1.0 + data.ymh_density() + e2 * data.f_norm2() + data.du_norm2())
        })
        .collect();
    Ok(TraceReport::from_samples("sphere-ymh", n, seed, devs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_dimension() {
        assert!(sphere_gl_trace(1, 3, 1).is_err());
        assert!(sphere_ymh_trace(0, 3, 1).is_err());
    }

    #[test]
    fn conformal_jet_divergence() {
        let x = DVector::from_vec(vec![0.0, 0.6, 0.8]);
        let frame = sphere_frame(&x);
        let xi = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let j = conformal_jet(&x, &frame, &xi, true);
        assert!((j.div() + 2.0 * 0.8).abs() < 1e-15);
        assert!((j.x.norm_squared() - (1.0 - 0.64)).abs() < 1e-14);
    }
}
