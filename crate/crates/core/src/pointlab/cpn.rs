//! Complex projective space in the affine chart `z -> [1 : z]` with the
//! Fubini-Study metric scaled so that `Ric = (n+1)/2 g`.
//!
//! Real coordinates interleave `x_{2k} = Re z_k`, `x_{2k+1} = Im z_k`.
//! Metric derivatives are taken numerically; the Killing fields induced by
//! `su(n+1)` are quadratic polynomials in `z` and are differentiated exactly.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{gl_q1, gl_q2, gl_q3, Curvature, FieldData, InnerJet, TensorCurvature};
use crate::rng::stream;
use crate::{Result, StabError};

const STEP: f64 = 1e-4;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `1` for real coordinates, `i` for imaginary ones.
fn coord_unit(a: usize) -> Complex64 {
    if a % 2 == 0 {
        c(1.0, 0.0)
    } else {
        c(0.0, 1.0)
    }
}

fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.chunks(2).map(|p| c(p[0], p[1])).collect()
}

/// Real metric components `g_ab` at real coordinates `x`.
pub fn chart_metric(x: &[f64]) -> DMatrix<f64> {
    let z = to_complex(x);
    let m = x.len();
    let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    let d = (1.0 + r2) * (1.0 + r2);
    DMatrix::from_fn(m, m, |a, b| {
        let (j, k) = (a / 2, b / 2);
        let mut h = -z[j] * z[k].conj();
        if j == k {
            h += 1.0 + r2;
        }
        (coord_unit(a).conj() * h * coord_unit(b)).re * 4.0 / d
    })
}

/// Central difference of `f` along coordinate `a` with one Richardson step.
fn d1<F: Fn(&[f64]) -> DMatrix<f64>>(f: &F, x: &[f64], a: usize) -> DMatrix<f64> {
    let diff = |h: f64| {
        let mut p = x.to_vec();
        let mut q = x.to_vec();
        p[a] += h;
        q[a] -= h;
        (f(&p) - f(&q)) / (2.0 * h)
    };
    (diff(STEP / 2.0) * 4.0 - diff(STEP)) / 3.0
}

/// Second central difference along `a` and `b` with one Richardson step.
fn d2<F: Fn(&[f64]) -> DMatrix<f64>>(f: &F, x: &[f64], a: usize, b: usize) -> DMatrix<f64> {
    let shifted = |da: f64, db: f64| {
        let mut p = x.to_vec();
        p[a] += da;
        p[b] += db;
        f(&p)
    };
    let diff = |h: f64| {
        if a == b {
            (shifted(h, 0.0) - f(x) * 2.0 + shifted(-h, 0.0)) / (h * h)
        } else {
            (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) / (4.0 * h * h)
        }
    };
    (diff(STEP / 2.0) * 4.0 - diff(STEP)) / 3.0
}

/// Metric, Christoffel symbols and curvature at a point of the chart.
#[derive(Clone, Debug)]
pub struct ChartGeometry {
    pub dim: usize,
    pub metric: DMatrix<f64>,
    /// `gamma[a][b][c] = Gamma^a_{bc}`.
    pub gamma: Vec<f64>,
    /// `dgamma[e][a][b][c] = d_e Gamma^a_{bc}`.
    pub dgamma: Vec<f64>,
    /// Columns form a `g`-orthonormal frame.
    pub frame: DMatrix<f64>,
    pub frame_inv: DMatrix<f64>,
}

impl ChartGeometry {
    pub fn new(x: &[f64]) -> Result<Self> {
        let m = x.len();
        let g = chart_metric(x);
        let gi = g
            .clone()
            .try_inverse()
            .ok_or_else(|| StabError::InvalidArgument("singular chart metric".into()))?;
        let dg: Vec<DMatrix<f64>> = (0..m).map(|a| d1(&chart_metric, x, a)).collect();
        let ddg: Vec<Vec<DMatrix<f64>>> =
            (0..m).map(|e| (0..m).map(|f| d2(&chart_metric, x, e, f)).collect()).collect();
        let idx3 = |a: usize, b: usize, cc: usize| (a * m + b) * m + cc;
        let mut gamma = vec![0.0; m * m * m];
        for a in 0..m {
            for b in 0..m {
                for cc in 0..m {
                    let mut s = 0.0;
                    for d in 0..m {
                        s += gi[(a, d)] * (dg[b][(d, cc)] + dg[cc][(d, b)] - dg[d][(b, cc)]);
                    }
                    gamma[idx3(a, b, cc)] = 0.5 * s;
                }
            }
        }
        let mut dgamma = vec![0.0; m * m * m * m];
        for e in 0..m {
            let dgi = -(&gi * &dg[e] * &gi);
            for a in 0..m {
                for b in 0..m {
                    for cc in 0..m {
                        let mut s = 0.0;
                        for d in 0..m {
                            s += dgi[(a, d)] * (dg[b][(d, cc)] + dg[cc][(d, b)] - dg[d][(b, cc)]);
                            s += gi[(a, d)] * (ddg[e][b][(d, cc)] + ddg[e][cc][(d, b)] - ddg[e][d][(b, cc)]);
                        }
                        dgamma[e * m * m * m + idx3(a, b, cc)] = 0.5 * s;
                    }
                }
            }
        }
        // Frame g^{-1/2}.
        let eig = SymmetricEigen::new(g.clone());
        let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
        let frame = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
        let frame_inv = frame.clone().try_inverse().expect("frame of a positive metric");
        Ok(ChartGeometry { dim: m, metric: g, gamma, dgamma, frame, frame_inv })
    }

    pub fn gamma(&self, a: usize, b: usize, cc: usize) -> f64 {
        let m = self.dim;
        self.gamma[(a * m + b) * m + cc]
    }

    pub fn dgamma(&self, e: usize, a: usize, b: usize, cc: usize) -> f64 {
        let m = self.dim;
        self.dgamma[((e * m + a) * m + b) * m + cc]
    }

    /// `R^a_{bcd}` with `R(d_c, d_d) d_b = R^a_{bcd} d_a`.
    pub fn riemann_coord(&self, a: usize, b: usize, cc: usize, d: usize) -> f64 {
        let m = self.dim;
        let mut r = self.dgamma(cc, a, d, b) - self.dgamma(d, a, cc, b);
        for e in 0..m {
            r += self.gamma(a, cc, e) * self.gamma(e, d, b) - self.gamma(a, d, e) * self.gamma(e, cc, b);
        }
        r
    }

    /// Curvature four-form in the orthonormal frame.
    pub fn curvature(&self) -> TensorCurvature {
        let m = self.dim;
        // Coordinate four-form R_{cdbl} = <R(d_c, d_d) d_b, d_l>.
        let mut rc = vec![0.0; m * m * m * m];
        for cc in 0..m {
            for d in 0..m {
                for b in 0..m {
                    for l in 0..m {
                        let mut s = 0.0;
                        for a in 0..m {
                            s += self.riemann_coord(a, b, cc, d) * self.metric[(a, l)];
                        }
                        rc[((cc * m + d) * m + b) * m + l] = s;
                    }
                }
            }
        }
        let e = &self.frame;
        let mut r = vec![0.0; m * m * m * m];
        // Transform one index at a time.
        let mut cur = rc;
        for slot in 0..4 {
            let mut next = vec![0.0; m * m * m * m];
            let stride = m.pow(3 - slot as u32);
            for idx in 0..m * m * m * m {
                let k = (idx / stride) % m;
                let base = idx - k * stride;
                let mut s = 0.0;
                for p in 0..m {
                    s += e[(p, k)] * cur[base + p * stride];
                }
                next[idx] = s;
            }
            cur = next;
        }
        r.copy_from_slice(&cur);
        TensorCurvature { n: m, r }
    }

    pub fn to_frame(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.frame_inv * v
    }

    /// Coordinate matrix `T^a_b` of an endomorphism in frame components.
    pub fn endo_to_frame(&self, t: &DMatrix<f64>) -> DMatrix<f64> {
        &self.frame_inv * t * &self.frame
    }
}

/// Complex structure on real coordinates.
pub fn complex_structure(m: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(m, m);
    for k in 0..m / 2 {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

/// Value of the Killing field `W_A` at chart point `z` as a complex vector.
pub fn killing_field(a: &DMatrix<Complex64>, z: &[Complex64]) -> Vec<Complex64> {
    let n = z.len();
    let mut w = vec![a[(0, 0)]; n + 1];
    for k in 0..=n {
        w[k] = a[(k, 0)] + (0..n).map(|j| a[(k, j + 1)] * z[j]).sum::<Complex64>();
    }
    (0..n).map(|k| w[k + 1] - z[k] * w[0]).collect()
}

/// `W_A` by central differences of `t -> chart(exp(tA) (1, z))`.
pub fn killing_field_numeric(a: &DMatrix<Complex64>, z: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = z.len();
    let lift = DVector::from_fn(n + 1, |i, _| if i == 0 { c(1.0, 0.0) } else { z[i - 1] });
    let chart = |t: f64| -> Vec<Complex64> {
        let w = (a * c(t, 0.0)).exp() * &lift;
        (1..=n).map(|k| w[k] / w[0]).collect()
    };
    let (p, q) = (chart(h), chart(-h));
    p.iter().zip(&q).map(|(x, y)| (x - y) / (2.0 * h)).collect()
}

/// Jet of a Killing field at the base point in frame components.
#[derive(Clone, Debug)]
pub struct KillingJet {
    pub matrix: DMatrix<Complex64>,
    pub value: DVector<f64>,
    /// Column `j` is `nabla_{e_j} V`.
    pub grad: DMatrix<f64>,
    /// `hess[b]` has column `c` equal to `nabla^2_{e_b, e_c} V`.
    pub hess: Vec<DMatrix<f64>>,
}

impl KillingJet {
    fn build(a: &DMatrix<Complex64>, x: &[f64], geo: &ChartGeometry) -> Self {
        let m = x.len();
        let n = m / 2;
        let z = to_complex(x);
        let s0 = a[(0, 0)] + (0..n).map(|j| a[(0, j + 1)] * z[j]).sum::<Complex64>();
        let w = killing_field(a, &z);
        // dw[k][mm] = dW_k/dz_mm, ddw[k][mm][l] = d^2W_k/dz_mm dz_l.
        let dw = |k: usize, mm: usize| -> Complex64 {
            let mut v = a[(k + 1, mm + 1)] - z[k] * a[(0, mm + 1)];
            if k == mm {
                v -= s0;
            }
            v
        };
        let ddw = |k: usize, mm: usize, l: usize| -> Complex64 {
            let mut v = c(0.0, 0.0);
            if k == mm {
                v -= a[(0, l + 1)];
            }
            if k == l {
                v -= a[(0, mm + 1)];
            }
            v
        };
        let comp = |z: Complex64, a: usize| if a % 2 == 0 { z.re } else { z.im };
        let val = DVector::from_fn(m, |aa, _| comp(w[aa / 2], aa));
        // dv[(a, b)] = d_b V^a
        let dv = DMatrix::from_fn(m, m, |aa, b| comp(coord_unit(b) * dw(aa / 2, b / 2), aa));
        // ddv[cc][(a, b)] = d_c d_b V^a
        let ddv: Vec<DMatrix<f64>> = (0..m)
            .map(|cc| {
                DMatrix::from_fn(m, m, |aa, b| {
                    comp(coord_unit(cc) * coord_unit(b) * ddw(aa / 2, b / 2, cc / 2), aa)
                })
            })
            .collect();
        let mut cov = DMatrix::zeros(m, m);
        for aa in 0..m {
            for b in 0..m {
                let mut s = dv[(aa, b)];
                for cc in 0..m {
                    s += geo.gamma(aa, b, cc) * val[cc];
                }
                cov[(aa, b)] = s;
            }
        }
        // cov2[cc][(a, b)] = (nabla^2_{c,b} V)^a
        let cov2: Vec<DMatrix<f64>> = (0..m)
            .map(|cc| {
                DMatrix::from_fn(m, m, |aa, b| {
                    let mut s = ddv[cc][(aa, b)];
                    for d in 0..m {
                        s += geo.dgamma(cc, aa, b, d) * val[d] + geo.gamma(aa, b, d) * dv[(d, cc)];
                        s -= geo.gamma(d, cc, b) * cov[(aa, d)];
                        s += geo.gamma(aa, cc, d) * cov[(d, b)];
                    }
                    s
                })
            })
            .collect();
        let e = &geo.frame;
        let hess = (0..m)
            .map(|bf| {
                let mut mat = DMatrix::zeros(m, m);
                for cc in 0..m {
                    mat += &cov2[cc] * e[(cc, bf)];
                }
                geo.endo_to_frame(&mat)
            })
            .collect();
        KillingJet { matrix: a.clone(), value: geo.to_frame(&val), grad: geo.endo_to_frame(&cov), hess }
    }

    /// Linear combination of jets.
    fn combine(jets: &[KillingJet], w: &[f64]) -> KillingJet {
        let mut out = jets[0].clone();
        out.matrix *= c(w[0], 0.0);
        out.value *= w[0];
        out.grad *= w[0];
        for h in out.hess.iter_mut() {
            *h *= w[0];
        }
        for (j, &wk) in jets.iter().zip(w).skip(1) {
            out.matrix += &j.matrix * c(wk, 0.0);
            out.value += &j.value * wk;
            out.grad += &j.grad * wk;
            for (h, hj) in out.hess.iter_mut().zip(&j.hess) {
                *h += hj * wk;
            }
        }
        out
    }

    /// Jet of `J V` with `nabla (nabla_{JV} JV)` for the inner variation.
    pub fn rotated(&self, j: &DMatrix<f64>) -> InnerJet {
        let x = j * &self.value;
        let g = j * &self.grad;
        let m = x.len();
        let mut gy = &g * &g;
        for b in 0..m {
            let col = j * &self.hess[b] * &x;
            for a in 0..m {
                gy[(a, b)] += col[a];
            }
        }
        InnerJet { x, grad: g, grad_nabla_xx: Some(gy) }
    }
}

/// Basis of `su(n+1)` orthonormal under `(A, B) = 2 tr(A B^*)`.
pub fn su_basis(n: usize) -> Vec<DMatrix<Complex64>> {
    let d = n + 1;
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut a = DMatrix::zeros(d, d);
            a[(j, k)] = c(0.5, 0.0);
            a[(k, j)] = c(-0.5, 0.0);
            out.push(a);
            let mut b = DMatrix::zeros(d, d);
            b[(j, k)] = c(0.0, 0.5);
            b[(k, j)] = c(0.0, 0.5);
            out.push(b);
        }
    }
    for l in 1..d {
        let norm = (2.0 * (l * (l + 1)) as f64).sqrt();
        let mut a = DMatrix::zeros(d, d);
        for i in 0..l {
            a[(i, i)] = c(0.0, 1.0 / norm);
        }
        a[(l, l)] = c(0.0, -(l as f64) / norm);
        out.push(a);
    }
    out
}

/// `2 tr(A B^*)`.
pub fn killing_inner(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    2.0 * (a * b.adjoint()).trace().re
}

#[derive(Clone, Debug)]
pub struct CpnFrame {
    pub n: usize,
    pub base: Vec<f64>,
    pub geometry: ChartGeometry,
    pub curvature: TensorCurvature,
    /// `J` in frame components.
    pub j: DMatrix<f64>,
    /// Orthonormal basis of Killing fields.
    pub killing: Vec<KillingJet>,
    /// Orthonormal bases of the fields with vanishing covariant derivative
    /// and of those vanishing at the base point.
    pub p_part: Vec<KillingJet>,
    pub f_part: Vec<KillingJet>,
    pub invariants: FrameInvariants,
}

/// Measured defects of the frame invariants.
#[derive(Clone, Debug, Serialize)]
pub struct FrameInvariants {
    pub q: usize,
    pub dim_p: usize,
    pub p_max_grad: f64,
    pub f_max_value: f64,
    pub p_isometry: f64,
    pub ricci: f64,
    pub coordinate_length: f64,
    pub kahler_symmetry: f64,
    pub pair_symmetry: f64,
    pub bracket_pp: f64,
    pub bracket_pf: f64,
    pub numeric_field: f64,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a: f64, &b| a.max(b.abs()))
}

fn random_unit(m: usize, rng: &mut impl Rng) -> DVector<f64> {
    let v: DVector<f64> = DVector::from_fn(m, |_, _| StandardNormal.sample(rng));
    let nv = v.norm();
    v / nv
}

/// Builds the frame at `z = 0` and measures its invariants; fails when one
/// of them is violated.
pub fn cpn_frame_build(n: usize) -> Result<CpnFrame> {
    if !(1..=3).contains(&n) {
        return Err(StabError::InvalidArgument(format!("complex dimension {n} outside 1..=3")));
    }
    let m = 2 * n;
    let base = vec![0.0; m];
    let geo = ChartGeometry::new(&base)?;
    let curvature = geo.curvature();
    let j = geo.endo_to_frame(&complex_structure(m));
    let basis = su_basis(n);
    let killing: Vec<KillingJet> = basis.iter().map(|a| KillingJet::build(a, &base, &geo)).collect();
    let q = killing.len();

    // Split by the evaluation map.
    let ev = DMatrix::from_fn(m, q, |a, k| killing[k].value[a]);
    let svd = ev.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-8).count();
    // Complete the right singular vectors to an orthonormal basis of R^q.
    let mut rows: Vec<DVector<f64>> = order.iter().take(rank).map(|&i| vt.row(i).transpose()).collect();
    for k in 0..q {
        let mut v = DVector::from_fn(q, |i, _| if i == k { 1.0 } else { 0.0 });
        for _ in 0..2 {
            for r in &rows {
                let cc = v.dot(r);
                v -= r * cc;
            }
        }
        let nv = v.norm();
        if nv > 1e-6 {
            rows.push(v / nv);
        }
        if rows.len() == q {
            break;
        }
    }
    let jets_of = |r: &[DVector<f64>]| -> Vec<KillingJet> {
        r.iter().map(|w| KillingJet::combine(&killing, w.as_slice())).collect()
    };
    let p_part = jets_of(&rows[..rank]);
    let f_part = jets_of(&rows[rank..]);

    let p_max_grad = p_part.iter().map(|k| max_abs(&k.grad)).fold(0.0, f64::max);
    let f_max_value = f_part.iter().map(|k| k.value.amax()).fold(0.0, f64::max);
    let mut p_isometry: f64 = 0.0;
    for (a, ka) in p_part.iter().enumerate() {
        for (b, kb) in p_part.iter().enumerate() {
            let want = killing_inner(&ka.matrix, &kb.matrix);
            p_isometry = p_isometry.max((ka.value.dot(&kb.value) - want).abs());
            if a == b {
                p_isometry = p_isometry.max((want - 1.0).abs());
            }
        }
    }
    let ric = DMatrix::from_fn(m, m, |a, b| {
        let ea = DVector::from_fn(m, |i, _| if i == a { 1.0 } else { 0.0 });
        let eb = DVector::from_fn(m, |i, _| if i == b { 1.0 } else { 0.0 });
        curvature.ricci(&ea, &eb)
    });
    let ricci = max_abs(&(ric - DMatrix::identity(m, m) * ((n as f64 + 1.0) / 2.0)));
    let coordinate_length =
        (0..m).map(|a| (geo.metric[(a, a)].sqrt() - 2.0).abs()).fold(0.0, f64::max);

    let mut rng = stream(n as u64, "cpn-frame-samples");
    let mut kahler_symmetry: f64 = 0.0;
    let mut pair_symmetry: f64 = 0.0;
    for _ in 0..20 {
        let v: Vec<DVector<f64>> = (0..4).map(|_| random_unit(m, &mut rng)).collect();
        let r0 = curvature.riemann(&v[0], &v[1], &v[2], &v[3]);
        let rj = curvature.riemann(&(&j * &v[0]), &(&j * &v[1]), &v[2], &v[3]);
        let rp = curvature.riemann(&v[2], &v[3], &v[0], &v[1]);
        kahler_symmetry = kahler_symmetry.max((rj - r0).abs());
        pair_symmetry = pair_symmetry.max((rp - r0).abs());
    }

    let field_at = |a: &DMatrix<Complex64>| KillingJet::build(a, &base, &geo);
    let mut bracket_pp: f64 = 0.0;
    for x in &p_part {
        for y in &p_part {
            let br = &x.matrix * &y.matrix - &y.matrix * &x.matrix;
            bracket_pp = bracket_pp.max(field_at(&br).value.amax());
        }
    }
    let mut bracket_pf: f64 = 0.0;
    for x in &p_part {
        for v in &f_part {
            let br = &x.matrix * &v.matrix - &v.matrix * &x.matrix;
            bracket_pf = bracket_pf.max(max_abs(&field_at(&br).grad));
        }
    }

    let zs: Vec<Complex64> = (0..n).map(|_| c(0.3 * rng.random::<f64>(), 0.3 * rng.random::<f64>())).collect();
    let numeric_field = basis
        .iter()
        .map(|a| {
            let w = killing_field(a, &zs);
            let wn = killing_field_numeric(a, &zs, 1e-4);
            w.iter().zip(&wn).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);

    let invariants = FrameInvariants {
        q,
        dim_p: p_part.len(),
        p_max_grad,
        f_max_value,
        p_isometry,
        ricci,
        coordinate_length,
        kahler_symmetry,
        pair_symmetry,
        bracket_pp,
        bracket_pf,
        numeric_field,
    };
    let fail = |what: &str, v: f64| Err(StabError::InvalidArgument(format!("frame invariant `{what}` violated: {v:e}")));
    if q != (n + 1) * (n + 1) - 1 || p_part.len() != m {
        return fail("dimension split", p_part.len() as f64);
    }
    let checks = [
        ("p_max_grad", p_max_grad, 1e-8),
        ("f_max_value", f_max_value, 1e-12),
        ("p_isometry", p_isometry, 1e-8),
        ("ricci", ricci, 1e-6),
        ("coordinate_length", coordinate_length, 1e-8),
        ("kahler_symmetry", kahler_symmetry, 1e-6),
        ("pair_symmetry", pair_symmetry, 1e-6),
        ("bracket_pp", bracket_pp, 1e-8),
        ("bracket_pf", bracket_pf, 1e-8),
        ("numeric_field", numeric_field, 1e-6),
    ];
    for (what, v, tol) in checks {
        if !(v <= tol) {
            return fail(what, v);
        }
    }
    Ok(CpnFrame { n, base, geometry: geo, curvature, j, killing, p_part, f_part, invariants })
}

impl CpnFrame {
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// The Killing basis rotated by a random orthogonal matrix.
    pub fn rotated_basis(&self, seed: u64) -> Vec<KillingJet> {
        let q = self.killing.len();
        let mut rng = stream(seed, "cpn-basis");
        let a = DMatrix::from_fn(q, q, |_, _| StandardNormal.sample(&mut rng));
        let o = a.qr().q();
        (0..q)
            .map(|k| {
                let w: Vec<f64> = (0..q).map(|i| o[(i, k)]).collect();
                KillingJet::combine(&self.killing, &w)
            })
            .collect()
    }
}

/// Largest deviation of
/// `sum_k <nabla_X J V_k, Y><nabla_W J V_k, Z> = <R_{X,JY} JW, Z>` over
/// random unit tangent vectors.
pub fn cpn_lemma_prelim_check(frame: &CpnFrame, samples: usize, seed: u64) -> f64 {
    let m = frame.dim();
    let mut rng = stream(seed, "cpn-lemma");
    let jg: Vec<DMatrix<f64>> = frame.killing.iter().map(|k| &frame.j * &k.grad).collect();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let v: Vec<DVector<f64>> = (0..4).map(|_| random_unit(m, &mut rng)).collect();
        worst = worst.max(lemma_deviation(frame, &jg, &v[0], &v[1], &v[2], &v[3]));
    }
    worst
}

/// Both sides of the preliminary lemma for given vectors.
pub fn lemma_sides(
    frame: &CpnFrame,
    x: &DVector<f64>,
    y: &DVector<f64>,
    w: &DVector<f64>,
    z: &DVector<f64>,
) -> (f64, f64) {
    let jg: Vec<DMatrix<f64>> = frame.killing.iter().map(|k| &frame.j * &k.grad).collect();
    let lhs = jg.iter().map(|g| y.dot(&(g * x)) * z.dot(&(g * w))).sum();
    let rhs = frame.curvature.riemann(x, &(&frame.j * y), &(&frame.j * w), z);
    (lhs, rhs)
}

fn lemma_deviation(
    frame: &CpnFrame,
    jg: &[DMatrix<f64>],
    x: &DVector<f64>,
    y: &DVector<f64>,
    w: &DVector<f64>,
    z: &DVector<f64>,
) -> f64 {
    let lhs: f64 = jg.iter().map(|g| y.dot(&(g * x)) * z.dot(&(g * w))).sum();
    let rhs = frame.curvature.riemann(x, &(&frame.j * y), &(&frame.j * w), z);
    (lhs - rhs).abs()
}

#[derive(Clone, Debug, Serialize)]
pub struct CpnTrace {
    pub samples: usize,
    /// `max |sum_k Q1(J V_k)|`.
    pub q1_sum: f64,
    /// `max |sum_k (-Q2 + Q3)(J V_k)|`.
    pub q2q3_sum: f64,
    /// Largest `1 + e + |grad u|^2` over the samples.
    pub scale: f64,
    /// Largest relative deviations.
    pub q1_relative: f64,
    pub q2q3_relative: f64,
}

/// Sums of `Q1` and `-Q2 + Q3` over `J V_k` for the given basis, with the
/// field data drawn from `seed`.
pub fn cpn_trace_check_with(frame: &CpnFrame, basis: &[KillingJet], samples: usize, seed: u64) -> CpnTrace {
    let m = frame.dim();
    let mut rng = stream(seed, "cpn-trace");
    let jets: Vec<InnerJet> = basis.iter().map(|k| k.rotated(&frame.j)).collect();
    let q1: f64 = jets.iter().map(|jt| gl_q1(jt, &frame.curvature)).sum();
    let mut out = CpnTrace { samples, q1_sum: q1.abs(), q2q3_sum: 0.0, scale: 1.0, q1_relative: 0.0, q2q3_relative: 0.0 };
    for _ in 0..samples {
        let data = FieldData::random(m, &mut rng);
        let s: f64 = jets
            .iter()
            .map(|jt| -gl_q2(jt, &data.grad_u, &frame.curvature) + gl_q3(jt, &data.grad_u))
            .sum();
        let scale = 1.0 + data.e_eps + data.grad_u_norm2();
        out.q2q3_sum = out.q2q3_sum.max(s.abs());
        out.scale = out.scale.max(scale);
        out.q2q3_relative = out.q2q3_relative.max(s.abs() / scale);
        out.q1_relative = out.q1_relative.max(data.e_eps * q1.abs() / scale);
    }
    if samples == 0 {
        out.q1_relative = q1.abs();
    }
    out
}

/// [`cpn_trace_check_with`] for the frame's own basis.
pub fn cpn_trace_check(frame: &CpnFrame, samples: usize, seed: u64) -> CpnTrace {
    cpn_trace_check_with(frame, &frame.killing, samples, seed)
}

/// `f_w` for `w = diag(1, -1/n, ..., -1/n)` on the chart.
pub fn eigenfunction(n: usize, x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (1.0 - r2 / n as f64) / (1.0 + r2)
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenfunctionHessian {
    pub n: usize,
    /// Coordinate components `nabla^2 f(d_a, d_b)`.
    pub coordinate: Vec<Vec<f64>>,
    /// `max |nabla^2 f + (n+1)/(2n) g|`.
    pub tensor_deviation: f64,
    /// `max |nabla^2 f(d_a, d_a) + 2(n+1)/n|`.
    pub diagonal_deviation: f64,
    /// `max |nabla^2_{X_k,X_l} f - nabla^2_{Y_k,Y_l} f|`, `max |nabla^2_{X_k,Y_l} f|`.
    pub xy_symmetry: f64,
    pub mixed: f64,
    /// `|Delta f + (n+1) f|` at the base point.
    pub laplacian_deviation: f64,
}

/// Covariant Hessian of `f_w` at `z = 0` by central differences.
pub fn cpn_eigenfunction_hessian(n: usize) -> Result<EigenfunctionHessian> {
    if !(1..=3).contains(&n) {
        return Err(StabError::InvalidArgument(format!("complex dimension {n} outside 1..=3")));
    }
    let m = 2 * n;
    let x = vec![0.0; m];
    let geo = ChartGeometry::new(&x)?;
    let scalar = |p: &[f64]| DMatrix::from_element(1, 1, eigenfunction(n, p));
    let df: Vec<f64> = (0..m).map(|a| d1(&scalar, &x, a)[(0, 0)]).collect();
    let h = DMatrix::from_fn(m, m, |a, b| {
        let mut v = d2(&scalar, &x, a, b)[(0, 0)];
        for cc in 0..m {
            v -= geo.gamma(cc, a, b) * df[cc];
        }
        v
    });
    if h.iter().any(|v| !v.is_finite()) {
        return Err(StabError::NonFinite("eigenfunction hessian"));
    }
    let nf = n as f64;
    let target = &geo.metric * (-(nf + 1.0) / (2.0 * nf));
    let tensor_deviation = max_abs(&(&h - target));
    let diagonal_deviation = (0..m).map(|a| (h[(a, a)] + 2.0 * (nf + 1.0) / nf).abs()).fold(0.0, f64::max);
    let mut xy_symmetry: f64 = 0.0;
    let mut mixed: f64 = 0.0;
    for k in 0..n {
        for l in 0..n {
            xy_symmetry = xy_symmetry.max((h[(2 * k, 2 * l)] - h[(2 * k + 1, 2 * l + 1)]).abs());
            mixed = mixed.max(h[(2 * k, 2 * l + 1)].abs());
        }
    }
    let gi = geo.metric.clone().try_inverse().expect("positive metric");
    let lap = gi.component_mul(&h).sum();
    let laplacian_deviation = (lap + (nf + 1.0) * eigenfunction(n, &x)).abs();
    Ok(EigenfunctionHessian {
        n,
        coordinate: (0..m).map(|a| (0..m).map(|b| h[(a, b)]).collect()).collect(),
        tensor_deviation,
        diagonal_deviation,
        xy_symmetry,
        mixed,
        laplacian_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn su_basis_is_orthonormal_and_traceless() {
        for n in 1..=3 {
            let b = su_basis(n);
            assert_eq!(b.len(), (n + 1) * (n + 1) - 1);
            for (i, a) in b.iter().enumerate() {
                assert!(a.trace().norm() < 1e-15);
                assert!((a + a.adjoint()).norm() < 1e-15);
                for (j, bb) in b.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((killing_inner(a, bb) - want).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn metric_at_origin_is_four_times_identity() {
        let g = chart_metric(&[0.0; 4]);
        assert!((g - DMatrix::identity(4, 4) * 4.0).norm() < 1e-15);
    }

    #[test]
    fn frame_builds_for_small_dimensions() {
        for n in 1..=2 {
            let f = cpn_frame_build(n).unwrap();
            assert_eq!(f.invariants.dim_p, 2 * n);
        }
        assert!(cpn_frame_build(0).is_err());
        assert!(cpn_frame_build(4).is_err());
    }
}
