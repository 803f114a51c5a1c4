//! Analytic vector fields on the unit sphere `S^n` in `R^{n+1}` together
//! with the derivatives needed by the inner-variation formulas.
//!
//! Every field has the form `X(x) = xi - <x, xi> x + A x` with `A`
//! antisymmetric: `A = 0` gives the conformal field `X_xi`, `xi = 0` gives
//! a Killing field.

use super::v3::V3;
use crate::{Result, StabError};

#[derive(Clone, Debug, PartialEq)]
pub enum JetKind {
    Conformal(Vec<f64>),
    Rotation(V3),
    LinearCombination,
}

#[derive(Clone, Debug)]
pub struct FieldJet {
    /// Intrinsic dimension of the sphere.
    pub n: usize,
    pub xi: Vec<f64>,
    /// Antisymmetric `(n+1) x (n+1)` matrix, row major.
    pub a: Vec<f64>,
    pub kind: JetKind,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conformal field `X_xi(x) = xi - <x, xi> x` on `S^n`.
pub fn conformal_field_jet(xi: &[f64], n: usize) -> Result<FieldJet> {
    if n == 0 || xi.len() != n + 1 {
        return Err(StabError::InvalidArgument(format!(
            "conformal field on S^{n} needs a vector of length {}, got {}",
            n + 1,
            xi.len()
        )));
    }
    let m = n + 1;
    Ok(FieldJet { n, xi: xi.to_vec(), a: vec![0.0; m * m], kind: JetKind::Conformal(xi.to_vec()) })
}

/// Killing field `X(x) = a x x` on `S^2`.
pub fn rotation_field_jet(a: &[f64]) -> Result<FieldJet> {
    if a.len() != 3 {
        return Err(StabError::InvalidArgument(format!(
            "rotation fields need ambient dimension 3, got {}",
            a.len()
        )));
    }
    #[rustfmt::skip]
    let m = vec![
        0.0, -a[2], a[1],
        a[2], 0.0, -a[0],
        -a[1], a[0], 0.0,
    ];
    Ok(FieldJet { n: 2, xi: vec![0.0; 3], a: m, kind: JetKind::Rotation([a[0], a[1], a[2]]) })
}

impl FieldJet {
    /// Field `xi - <x, xi> x + A x` for an arbitrary antisymmetric `A`.
    pub fn general(xi: &[f64], a: &[f64]) -> Result<FieldJet> {
        let m = xi.len();
        if m < 2 || a.len() != m * m {
            return Err(StabError::InvalidArgument("matrix size does not match vector".into()));
        }
        for i in 0..m {
            for j in 0..m {
                if (a[i * m + j] + a[j * m + i]).abs() > 1e-14 * (1.0 + a[i * m + j].abs()) {
                    return Err(StabError::InvalidArgument("matrix is not antisymmetric".into()));
                }
            }
        }
        Ok(FieldJet { n: m - 1, xi: xi.to_vec(), a: a.to_vec(), kind: JetKind::LinearCombination })
    }

    /// `self + c * other`.
    pub fn combine(&self, c: f64, other: &FieldJet) -> Result<FieldJet> {
        if self.n != other.n {
            return Err(StabError::InvalidArgument("fields live on different spheres".into()));
        }
        let xi: Vec<f64> = self.xi.iter().zip(&other.xi).map(|(a, b)| a + c * b).collect();
        let a: Vec<f64> = self.a.iter().zip(&other.a).map(|(a, b)| a + c * b).collect();
        Ok(FieldJet { n: self.n, xi, a, kind: JetKind::LinearCombination })
    }

    fn dim(&self) -> usize {
        self.n + 1
    }

    fn apply_a(&self, v: &[f64]) -> Vec<f64> {
        let m = self.dim();
        (0..m).map(|i| dot(&self.a[i * m..(i + 1) * m], v)).collect()
    }

    fn project(x: &[f64], v: &[f64]) -> Vec<f64> {
        let s = dot(x, v);
        v.iter().zip(x).map(|(vi, xi)| vi - s * xi).collect()
    }

    /// `f_xi(x) = <x, xi>`.
    pub fn potential(&self, x: &[f64]) -> f64 {
        dot(x, &self.xi)
    }

    pub fn eval_x(&self, x: &[f64]) -> Vec<f64> {
        let f = self.potential(x);
        let ax = self.apply_a(x);
        (0..self.dim()).map(|i| self.xi[i] - f * x[i] + ax[i]).collect()
    }

    /// Ambient derivative `D_v X` (not projected).
    fn ambient_deriv(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let f = self.potential(x);
        let vx = dot(v, &self.xi);
        let av = self.apply_a(v);
        (0..self.dim()).map(|i| -vx * x[i] - f * v[i] + av[i]).collect()
    }

    /// Covariant derivative `nabla_v X` for tangent `v`.
    pub fn eval_grad_x(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        Self::project(x, &self.ambient_deriv(x, v))
    }

    /// `nabla_X X`.
    pub fn eval_nabla_xx(&self, x: &[f64]) -> Vec<f64> {
        let xv = self.eval_x(x);
        self.eval_grad_x(x, &xv)
    }

    /// Covariant derivative of `Y = nabla_X X` in the tangent direction `v`.
    pub fn eval_grad_nabla_xx(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let f = self.potential(x);
        let vx = dot(v, &self.xi);
        let xv = self.eval_x(x);
        let dvx = self.ambient_deriv(x, v);
        let p_dvx = Self::project(x, &dvx);
        let p_a_dvx = Self::project(x, &self.apply_a(&dvx));
        let x_ax = dot(x, &self.apply_a(&xv));
        (0..self.dim()).map(|i| -vx * xv[i] - f * p_dvx[i] + p_a_dvx[i] - x_ax * v[i]).collect()
    }

    /// `Div X = -n f_xi` (the rotational part is divergence free).
    pub fn eval_div(&self, x: &[f64]) -> f64 {
        -(self.n as f64) * self.potential(x)
    }

    /// `(L_X g)(v, w) = <nabla_v X, w> + <nabla_w X, v>`.
    pub fn eval_lie_g(&self, x: &[f64], v: &[f64], w: &[f64]) -> f64 {
        dot(&self.eval_grad_x(x, v), w) + dot(&self.eval_grad_x(x, w), v)
    }

    /// `Div(nabla_X X)` computed as a trace over an orthonormal tangent frame.
    pub fn eval_div_nabla_xx(&self, x: &[f64]) -> f64 {
        tangent_basis(x).iter().map(|e| dot(&self.eval_grad_nabla_xx(x, e), e)).sum()
    }

    /// Derivative of `Div X` along `X`, i.e. `-n <X, xi>`.
    pub fn eval_x_div(&self, x: &[f64]) -> f64 {
        -(self.n as f64) * dot(&self.eval_x(x), &self.xi)
    }

    /// Point-wise helpers for the two-sphere.
    pub fn x3(&self, x: V3) -> V3 {
        to3(&self.eval_x(&x))
    }

    pub fn grad3(&self, x: V3, v: V3) -> V3 {
        to3(&self.eval_grad_x(&x, &v))
    }

    pub fn nabla_xx3(&self, x: V3) -> V3 {
        to3(&self.eval_nabla_xx(&x))
    }

    pub fn grad_nabla_xx3(&self, x: V3, v: V3) -> V3 {
        to3(&self.eval_grad_nabla_xx(&x, &v))
    }
}

fn to3(v: &[f64]) -> V3 {
    [v[0], v[1], v[2]]
}

/// Orthonormal basis of the tangent space `x^perp` by Gram-Schmidt on the
/// standard basis, dropping the most parallel coordinate direction.
pub fn tangent_basis(x: &[f64]) -> Vec<Vec<f64>> {
    let m = x.len();
    let skip = (0..m)
        .max_by(|&i, &j| x[i].abs().partial_cmp(&x[j].abs()).unwrap().then(j.cmp(&i)))
        .unwrap_or(0);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m - 1);
    for k in (0..m).filter(|&k| k != skip) {
        let mut v = vec![0.0; m];
        v[k] = 1.0;
        for _ in 0..2 {
            let s = dot(&v, x);
            for i in 0..m {
                v[i] -= s * x[i];
            }
            for b in &basis {
                let s = dot(&v, b);
                for i in 0..m {
                    v[i] -= s * b[i];
                }
            }
        }
        let nv = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|c| *c /= nv);
        basis.push(v);
    }
    basis
}
