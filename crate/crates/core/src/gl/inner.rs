use num_complex::Complex64;

use super::{gl_outer_first_variation, gl_outer_second_variation, GlState};
use crate::geometry::jet::tangent_basis;
use crate::geometry::v3::{self, V3};
use crate::geometry::FieldJet;
use crate::{Result, StabError};

/// Per-face data for the inner-variation quadratures. The face gradient is
/// parallel to the face plane, hence tangent to the sphere at the outward
/// face normal, which serves as the quadrature point.
pub(crate) struct FaceSample {
    pub x: V3,
    pub area: f64,
    pub grad: [V3; 2],
    /// Gradient part `|grad u|^2 / 2` of the energy density.
    pub e: f64,
}

pub(crate) fn face_samples(state: &GlState) -> Vec<FaceSample> {
    let fem = &state.disc.fem;
    let re: Vec<f64> = state.u.iter().map(|z| z.re).collect();
    let im: Vec<f64> = state.u.iter().map(|z| z.im).collect();
    (0..fem.faces().len())
        .map(|f| {
            let grad = [fem.face_gradient(f, &re), fem.face_gradient(f, &im)];
            let e = 0.5 * (v3::dot(grad[0], grad[0]) + v3::dot(grad[1], grad[1]));
            FaceSample { x: fem.face_normals[f], area: fem.face_areas[f], grad, e }
        })
        .collect()
}

/// Quadrature of the potential against a geometric coefficient, using the
/// face mean of the vertex potentials at each face point.
fn potential_integral(state: &GlState, c: impl Fn(V3) -> f64) -> f64 {
    let fem = &state.disc.fem;
    let pot = state.potential_density();
    fem.faces()
        .iter()
        .enumerate()
        .map(|(f, t)| {
            let p = (pot[t[0]] + pot[t[1]] + pot[t[2]]) / 3.0;
            fem.face_areas[f] * p * c(fem.face_normals[f])
        })
        .sum()
}

/// `(Div X)^2 - Ric(X, X) - tr(nabla X nabla X) + Div nabla_X X` on `S^2`.
fn density_coefficient(jet: &FieldJet, x: V3) -> f64 {
    let xv = jet.x3(x);
    let e: Vec<V3> = tangent_basis(&x).iter().map(|b| [b[0], b[1], b[2]]).collect();
    let ge: Vec<V3> = e.iter().map(|&ei| jet.grad3(x, ei)).collect();
    let div = jet.eval_div(&x);
    let mut tr = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            tr += v3::dot(ge[i], e[j]) * v3::dot(ge[j], e[i]);
        }
    }
    let div_y: f64 = (0..2).map(|i| v3::dot(jet.grad_nabla_xx3(x, e[i]), e[i])).sum();
    div * div - v3::dot(xv, xv) - tr + div_y
}

fn check_jet(jet: &FieldJet) -> Result<()> {
    if jet.n != 2 {
        return Err(StabError::InvalidArgument(format!("mesh fields need a jet on S^2, got S^{}", jet.n)));
    }
    Ok(())
}

/// `dE(u)(X) = int <nabla_{grad u} X, grad u> - e(u) Div X`.
pub fn gl_inner_first(state: &GlState, jet: &FieldJet) -> Result<f64> {
    check_jet(jet)?;
    let mut total = 0.0;
    for s in face_samples(state) {
        let mut t = -s.e * jet.eval_div(&s.x);
        for g in &s.grad {
            t += v3::dot(jet.grad3(s.x, *g), *g);
        }
        total += s.area * t;
    }
    Ok(total + potential_integral(state, |x| -jet.eval_div(&x)))
}

/// Second inner variation `d^2E(u)(X, X)` for an arbitrary jet, with the
/// constant-curvature tensor of the unit sphere.
pub fn gl_inner_second_general(state: &GlState, jet: &FieldJet) -> Result<f64> {
    check_jet(jet)?;
    let mut total = 0.0;
    for s in face_samples(state) {
        let x = s.x;
        let xv = jet.x3(x);
        let e: Vec<V3> = tangent_basis(&x).iter().map(|b| [b[0], b[1], b[2]]).collect();
        let div = jet.eval_div(&x);
        let mut t = s.e * density_coefficient(jet, x);
        let x2 = v3::dot(xv, xv);
        for g in &s.grad {
            let gx = jet.grad3(x, *g);
            let a = v3::dot(gx, *g);
            let g2 = v3::dot(*g, *g);
            let curv = g2 * x2 - v3::dot(*g, xv).powi(2);
            let second = v3::dot(jet.grad_nabla_xx3(x, *g), *g);
            t -= 2.0 * a * div - curv + v3::dot(gx, gx) + second;
            for &ei in &e {
                let lie = v3::dot(gx, ei) + v3::dot(jet.grad3(x, ei), *g);
                t += lie * lie;
            }
        }
        total += s.area * t;
    }
    Ok(total + potential_integral(state, |x| density_coefficient(jet, x)))
}

/// Second inner variation along the conformal field of the unit vector `xi`
/// in its specialized form, valid at critical points.
pub fn gl_inner_second_critical(state: &GlState, xi: V3) -> Result<f64> {
    if (v3::norm(xi) - 1.0).abs() > 1e-12 {
        return Err(StabError::InvalidArgument("xi must be a unit vector".into()));
    }
    let n = 2.0;
    let mut total = 0.0;
    for s in face_samples(state) {
        let f = v3::dot(s.x, xi);
        let f2 = f * f;
        let xv = v3::sub(xi, v3::scale(f, s.x));
        let g2: f64 = s.grad.iter().map(|g| v3::dot(*g, *g)).sum();
        let gx2: f64 = s.grad.iter().map(|g| v3::dot(*g, xv).powi(2)).sum();
        let t = s.e * (n * n * f2 - (n - 1.0) * (1.0 - f2) - n * f2)
            - (2.0 * n * f2 * g2 - (1.0 - f2) * g2 + gx2 + f2 * g2)
            + 4.0 * f2 * g2;
        total += s.area * t;
    }
    let coeff = |x: V3| {
        let f2 = v3::dot(x, xi).powi(2);
        n * n * f2 - (n - 1.0) * (1.0 - f2) - n * f2
    };
    Ok(total + potential_integral(state, coeff))
}

/// `<grad u, X>` at every vertex from the projected vertex gradient.
pub fn directional_derivative(state: &GlState, jet: &FieldJet, u: &[Complex64]) -> Result<Vec<Complex64>> {
    let fem = &state.disc.fem;
    let re: Vec<f64> = u.iter().map(|z| z.re).collect();
    let im: Vec<f64> = u.iter().map(|z| z.im).collect();
    let gr = fem.vertex_gradient(&re)?;
    let gi = fem.vertex_gradient(&im)?;
    Ok(fem
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, &x)| {
            let xv = jet.x3(x);
            Complex64::new(v3::dot(gr[v], xv), v3::dot(gi[v], xv))
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerOuterGap {
    pub inner: f64,
    pub outer: f64,
    pub first: f64,
    /// `inner - (outer + first)`.
    pub gap: f64,
}

/// Compares `d^2E(X, X)` with `d^2E(X u, X u) + dE(X X u)`.
pub fn inner_outer_gap(state: &GlState, jet: &FieldJet) -> Result<InnerOuterGap> {
    let inner = gl_inner_second_general(state, jet)?;
    let w = directional_derivative(state, jet, &state.u)?;
    let ww = directional_derivative(state, jet, &w)?;
    let outer = gl_outer_second_variation(state, &w)?;
    let first = gl_outer_first_variation(state, &ww)?;
    Ok(InnerOuterGap { inner, outer, first, gap: inner - outer - first })
}
