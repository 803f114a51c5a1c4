//! Flows of the analytic fields in [`super::jet`].

use super::jet::{FieldJet, JetKind};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|c| *c /= n);
    v
}

/// Time-`t` flow of `X_xi` starting at `x`. The polar angle from `xi` obeys
/// `tan(theta(t)/2) = e^{-|xi| t} tan(theta/2)`.
pub fn conformal_flow(x: &[f64], xi: &[f64], t: f64) -> Vec<f64> {
    let s = dot(xi, xi).sqrt();
    if s == 0.0 {
        return x.to_vec();
    }
    let e: Vec<f64> = xi.iter().map(|c| c / s).collect();
    let c = dot(x, &e);
    let perp: Vec<f64> = x.iter().zip(&e).map(|(xi, ei)| xi - c * ei).collect();
    let sn = dot(&perp, &perp).sqrt();
    if sn == 0.0 {
        return x.to_vec();
    }
    let theta = 2.0 * ((-s * t).exp() * sn).atan2(1.0 + c);
    let (st, ct) = theta.sin_cos();
    e.iter().zip(&perp).map(|(ei, pi)| ct * ei + st * pi / sn).collect()
}

/// Classical fourth-order Runge-Kutta integration of `x' = field(x)` with
/// `steps` equal steps, renormalized onto the sphere at the end.
pub fn rk4_flow(x: &[f64], field: &dyn Fn(&[f64]) -> Vec<f64>, t: f64, steps: usize) -> Vec<f64> {
    let h = t / steps as f64;
    let mut y = x.to_vec();
    let m = y.len();
    let shifted = |y: &[f64], k: &[f64], c: f64| -> Vec<f64> { (0..m).map(|i| y[i] + c * k[i]).collect() };
    for _ in 0..steps {
        let k1 = field(&y);
        let k2 = field(&shifted(&y, &k1, h / 2.0));
        let k3 = field(&shifted(&y, &k2, h / 2.0));
        let k4 = field(&shifted(&y, &k3, h));
        for i in 0..m {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    normalized(y)
}

fn rotate(x: &[f64], a: &[f64; 3], t: f64) -> Vec<f64> {
    let s = dot(a, a).sqrt();
    if s == 0.0 {
        return x.to_vec();
    }
    let k = [a[0] / s, a[1] / s, a[2] / s];
    let (st, ct) = (s * t).sin_cos();
    let kx = [k[1] * x[2] - k[2] * x[1], k[2] * x[0] - k[0] * x[2], k[0] * x[1] - k[1] * x[0]];
    let kd = dot(&k, x);
    (0..3).map(|i| x[i] * ct + kx[i] * st + k[i] * kd * (1.0 - ct)).collect()
}

/// Time-`t` flow of `jet`: closed form for conformal and rotation fields,
/// Runge-Kutta with step at most `1e-3` otherwise.
pub fn flow_point(jet: &FieldJet, x: &[f64], t: f64) -> Vec<f64> {
    match &jet.kind {
        JetKind::Conformal(xi) => conformal_flow(x, xi, t),
        JetKind::Rotation(a) => rotate(x, a, t),
        JetKind::LinearCombination => {
            let steps = ((t.abs() / 1e-3).ceil() as usize).max(1);
            rk4_flow(x, &|y: &[f64]| jet.eval_x(y), t, steps)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::jet::{conformal_field_jet, rotation_field_jet};

    #[test]
    fn poles_are_fixed() {
        let xi = [0.0, 0.6, 0.8];
        let m: Vec<f64> = xi.iter().map(|c| -c).collect();
        for t in [-1.0, 0.3, 5.0] {
            let p = conformal_flow(&xi, &xi, t);
            let q = conformal_flow(&m, &xi, t);
            for i in 0..3 {
                assert!((p[i] - xi[i]).abs() < 1e-15);
                assert!((q[i] - m[i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn closed_form_matches_runge_kutta() {
        let xi = [0.0, 0.6, 0.8];
        let jet = conformal_field_jet(&xi, 2).unwrap();
        let x = normalized(vec![0.7, -0.4, 0.2]);
        let a = conformal_flow(&x, &xi, 0.3);
        let b = rk4_flow(&x, &|y: &[f64]| jet.eval_x(y), 0.3, 300);
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-10, "{a:?} {b:?}");
        }
    }

    #[test]
    fn rotation_closed_form_matches_runge_kutta() {
        let jet = rotation_field_jet(&[0.3, -0.5, 1.1]).unwrap();
        let x = normalized(vec![0.2, 0.4, -0.9]);
        let a = flow_point(&jet, &x, 0.7);
        let b = rk4_flow(&x, &|y: &[f64]| jet.eval_x(y), 0.7, 700);
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn velocity_at_zero_is_the_field() {
        let xi = [0.3, -0.1, 0.5, 0.2];
        let jet = conformal_field_jet(&xi, 3).unwrap();
        let x = normalized(vec![0.1, 0.5, -0.5, 0.7]);
        let h = 1e-5;
        let p = conformal_flow(&x, &xi, h);
        let m = conformal_flow(&x, &xi, -h);
        let v = jet.eval_x(&x);
        for i in 0..4 {
            assert!(((p[i] - m[i]) / (2.0 * h) - v[i]).abs() < 1e-9);
        }
    }
}
