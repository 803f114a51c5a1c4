//! Pointwise checks of the trace identities in a single tangent space.
//!
//! Everything here works in orthonormal frame components: vectors are
//! `DVector`s of length `n`, a field jet stores `X` and the matrix of
//! `nabla X` with column `j` equal to `nabla_{e_j} X`.

pub mod cpn;
pub mod lattice;
pub mod sphere;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

pub use cpn::{
    cpn_eigenfunction_hessian, cpn_frame_build, cpn_lemma_prelim_check, cpn_trace_check, CpnFrame, CpnTrace,
    EigenfunctionHessian,
};
pub use lattice::{lattice_per_xi_integrands, sphere_per_xi_stability_integrand};
pub use sphere::{sphere_gl_trace, sphere_ymh_trace};

/// Riemann tensor as the four-form `(X, Y, Z, W) -> <R_{X,Y} Z, W>`.
pub trait Curvature {
    fn dim(&self) -> usize;
    fn riemann(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>, w: &DVector<f64>) -> f64;

    /// `Ric(X, Y) = sum_i <R_{e_i,X} Y, e_i>`.
    fn ricci(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let e = DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
                self.riemann(&e, x, y, &e)
            })
            .sum()
    }
}

/// Space form of sectional curvature `k`.
#[derive(Clone, Copy, Debug)]
pub struct ConstantCurvature {
    pub n: usize,
    pub k: f64,
}

impl Curvature for ConstantCurvature {
    fn dim(&self) -> usize {
        self.n
    }
    fn riemann(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>, w: &DVector<f64>) -> f64 {
        self.k * (y.dot(z) * x.dot(w) - x.dot(z) * y.dot(w))
    }
}

/// Dense components `R[a][b][c][d] = <R_{e_a,e_b} e_c, e_d>` in an
/// orthonormal frame.
#[derive(Clone, Debug)]
pub struct TensorCurvature {
    pub n: usize,
    pub r: Vec<f64>,
}

impl TensorCurvature {
    pub fn at(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        self.r[((a * n + b) * n + c) * n + d]
    }
}

impl Curvature for TensorCurvature {
    fn dim(&self) -> usize {
        self.n
    }
    fn riemann(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>, w: &DVector<f64>) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                let xy = x[a] * y[b];
                if xy == 0.0 {
                    continue;
                }
                for c in 0..n {
                    let xyz = xy * z[c];
                    if xyz == 0.0 {
                        continue;
                    }
                    for d in 0..n {
                        s += xyz * w[d] * self.at(a, b, c, d);
                    }
                }
            }
        }
        s
    }
}

/// Field data at a point: energy density stand-in, `grad u` for a complex
/// `u` (column 0 real part, column 1 imaginary part), curvature `F`,
/// covariant derivative `Du` and the Higgs value.
#[derive(Clone, Debug)]
pub struct FieldData {
    pub e_eps: f64,
    pub grad_u: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub du: Vec<Complex64>,
    pub u: Complex64,
    pub epsilon: f64,
}

impl FieldData {
    /// Normal draws for every entry, `F` antisymmetrized, `e_eps` and
    /// `epsilon` made positive.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let mut g = || -> f64 { StandardNormal.sample(rng) };
        let e_eps = g().abs();
        let grad_u = DMatrix::from_fn(n, 2, |_, _| g());
        let a = DMatrix::from_fn(n, n, |_, _| g());
        let f = (&a - a.transpose()) * 0.5;
        let du = (0..n).map(|_| Complex64::new(g(), g())).collect();
        let u = Complex64::new(g(), g());
        let epsilon = 0.1 + g().abs();
        FieldData { e_eps, grad_u, f, du, u, epsilon }
    }

    pub fn dim(&self) -> usize {
        self.grad_u.nrows()
    }

    /// `sum_a |grad u^a|^2`.
    pub fn grad_u_norm2(&self) -> f64 {
        self.grad_u.norm_squared()
    }

    /// `|F|^2 = 1/2 sum F_ik^2`.
    pub fn f_norm2(&self) -> f64 {
        0.5 * self.f.norm_squared()
    }

    pub fn du_norm2(&self) -> f64 {
        self.du.iter().map(|z| z.norm_sqr()).sum()
    }

    /// YMH density `eps^2 |F|^2 + |Du|^2 + (1 - |u|^2)^2 / (4 eps^2)`.
    pub fn ymh_density(&self) -> f64 {
        let e2 = self.epsilon * self.epsilon;
        e2 * self.f_norm2() + self.du_norm2() + (1.0 - self.u.norm_sqr()).powi(2) / (4.0 * e2)
    }

    /// `S_ij = eps^2 sum_k F_ik F_jk + Re <D_i u, D_j u>`.
    pub fn stress(&self) -> DMatrix<f64> {
        let n = self.dim();
        let e2 = self.epsilon * self.epsilon;
        let ff = &self.f * self.f.transpose() * e2;
        DMatrix::from_fn(n, n, |i, j| ff[(i, j)] + (self.du[i].conj() * self.du[j]).re)
    }

    /// Same data multiplied by `lambda`, with `e_eps` scaled by `lambda^2`.
    pub fn scaled(&self, lambda: f64) -> Self {
        FieldData {
            e_eps: self.e_eps * lambda * lambda,
            grad_u: &self.grad_u * lambda,
            f: &self.f * lambda,
            du: self.du.iter().map(|z| z * lambda).collect(),
            u: self.u,
            epsilon: self.epsilon,
        }
    }
}

/// First and second derivatives of a vector field at a point.
#[derive(Clone, Debug)]
pub struct InnerJet {
    pub x: DVector<f64>,
    /// Column `j` is `nabla_{e_j} X`.
    pub grad: DMatrix<f64>,
    /// Column `j` is `nabla_{e_j} (nabla_X X)`; needed away from critical
    /// points only.
    pub grad_nabla_xx: Option<DMatrix<f64>>,
}

impl InnerJet {
    pub fn div(&self) -> f64 {
        self.grad.trace()
    }

    /// `(L_X g)_{ij} = <nabla_i X, e_j> + <nabla_j X, e_i>`.
    pub fn lie_g(&self) -> DMatrix<f64> {
        &self.grad + self.grad.transpose()
    }
}

/// `(Div X)^2 - Ric(X, X) - <nabla_i X, e_j><nabla_j X, e_i>`, plus
/// `Div nabla_X X` when the jet carries it.
pub fn gl_q1(jet: &InnerJet, curv: &dyn Curvature) -> f64 {
    let div = jet.div();
    let g = &jet.grad;
    let mut q = div * div - curv.ricci(&jet.x, &jet.x) - (g * g).trace();
    if let Some(gy) = &jet.grad_nabla_xx {
        q += gy.trace();
    }
    q
}

/// `2 <nabla_{grad u} X, grad u> Div X - R(grad u, X, X, grad u)
/// + |nabla_{grad u} X|^2`, plus `<nabla_{grad u} nabla_X X, grad u>` when
/// the jet carries it, summed over the real components of `u`.
pub fn gl_q2(jet: &InnerJet, grad_u: &DMatrix<f64>, curv: &dyn Curvature) -> f64 {
    let div = jet.div();
    let mut q = 0.0;
    for a in 0..grad_u.ncols() {
        let w = grad_u.column(a).into_owned();
        let gw = &jet.grad * &w;
        q += 2.0 * gw.dot(&w) * div - curv.riemann(&w, &jet.x, &jet.x, &w) + gw.norm_squared();
        if let Some(gy) = &jet.grad_nabla_xx {
            q += (gy * &w).dot(&w);
        }
    }
    q
}

/// `|L_X g _| grad u|^2`, summed over the real components of `u`.
pub fn gl_q3(jet: &InnerJet, grad_u: &DMatrix<f64>) -> f64 {
    let l = jet.lie_g();
    (0..grad_u.ncols()).map(|a| (&l * grad_u.column(a)).norm_squared()).sum()
}

/// Integrand of the second inner variation `e Q1 - Q2 + Q3`.
pub fn gl_inner_integrand(jet: &InnerJet, data: &FieldData, curv: &dyn Curvature) -> f64 {
    data.e_eps * gl_q1(jet, curv) - gl_q2(jet, &data.grad_u, curv) + gl_q3(jet, &data.grad_u)
}

/// Integrand of the YMH stability inequality along `X`.
pub fn ymh_inner_integrand(jet: &InnerJet, data: &FieldData, curv: &dyn Curvature) -> f64 {
    ymh_stress_integrand(jet, data.ymh_density(), &data.stress(), &data.f, data.epsilon, curv)
}

/// The same integrand from the density `e`, the stress `S`, the curvature
/// matrix `F` and `eps`.
pub fn ymh_stress_integrand(
    jet: &InnerJet,
    e: f64,
    s: &DMatrix<f64>,
    f: &DMatrix<f64>,
    epsilon: f64,
    curv: &dyn Curvature,
) -> f64 {
    let n = jet.x.len();
    let g = &jet.grad;
    let div = jet.div();
    let l = jet.lie_g();
    let basis: Vec<DVector<f64>> =
        (0..n).map(|i| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 })).collect();
    let gtg = g.transpose() * g;

    let mut total = e * (div * div - curv.ricci(&jet.x, &jet.x) - (g * g).trace());
    for i in 0..n {
        for j in 0..n {
            let sij = s[(i, j)];
            total -= 4.0 * div * g[(j, i)] * sij;
            let rij = curv.riemann(&basis[i], &jet.x, &jet.x, &basis[j]);
            total += 2.0 * (rij - gtg[(i, j)]) * sij;
        }
    }
    // sum_{ijkl} L_ij L_kl F_ik F_jl
    let quart = l.component_mul(&(f * &l * f.transpose())).sum();
    total += epsilon * epsilon * quart;
    total += 2.0 * (&l * l.transpose()).component_mul(s).sum();
    total
}

/// Orthonormal basis of the complement of `x` in `R^{n+1}`.
pub fn sphere_frame(x: &DVector<f64>) -> Vec<DVector<f64>> {
    let m = x.len();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(m - 1);
    let mut all = vec![x.clone()];
    for k in 0..m {
        let mut v = DVector::from_fn(m, |i, _| if i == k { 1.0 } else { 0.0 });
        for _ in 0..2 {
            for b in &all {
                let c = v.dot(b);
                v -= b * c;
            }
        }
        let nv = v.norm();
        if nv > 0.3 {
            v /= nv;
            all.push(v.clone());
            out.push(v);
        }
        if out.len() == m - 1 {
            break;
        }
    }
    out
}

/// Outcome of a sampled identity check.
#[derive(Clone, Debug, Serialize)]
pub struct TraceReport {
    pub identity: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    /// Largest `|deviation| / scale` over the samples.
    pub max_deviation: f64,
    pub max_abs_deviation: f64,
    /// Scale attained at the sample with the largest relative deviation.
    pub scale: f64,
    pub per_sample: Vec<f64>,
}

impl TraceReport {
    pub(crate) fn from_samples(identity: &str, n: usize, seed: u64, devs: Vec<(f64, f64)>) -> Self {
        let mut max_rel = 0.0;
        let mut max_abs: f64 = 0.0;
        let mut scale = 1.0;
        for &(d, s) in &devs {
            max_abs = max_abs.max(d.abs());
            if d.abs() / s >= max_rel {
                max_rel = d.abs() / s;
                scale = s;
            }
        }
        TraceReport {
            identity: identity.to_string(),
            n,
            samples: devs.len(),
            seed,
            max_deviation: max_rel,
            max_abs_deviation: max_abs,
            scale,
            per_sample: devs.iter().map(|d| d.0).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn constant_curvature_ricci() {
        let mut rng = stream(3, "t");
        for n in 2..7 {
            let c = ConstantCurvature { n, k: 1.0 };
            let x = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            assert!((c.ricci(&x, &x) - (n as f64 - 1.0) * x.norm_squared()).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_is_orthonormal() {
        let x = DVector::from_vec(vec![0.6, 0.0, 0.8, 0.0]);
        let f = sphere_frame(&x);
        assert_eq!(f.len(), 3);
        for (i, a) in f.iter().enumerate() {
            assert!(a.dot(&x).abs() < 1e-14);
            for (j, b) in f.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((a.dot(b) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn random_data_has_antisymmetric_f() {
        let d = FieldData::random(5, &mut stream(1, "t"));
        assert_eq!(d.f.clone() + d.f.transpose(), DMatrix::zeros(5, 5));
        assert!(d.epsilon > 0.0 && d.e_eps >= 0.0);
    }
}
