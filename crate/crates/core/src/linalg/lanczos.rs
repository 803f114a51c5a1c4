//! Shift-invert block Lanczos for the smallest eigenvalues of the symmetric
//! pencil `H v = lambda M v`.
//!
//! The operator `(H - sigma M)^{-1} M` is self-adjoint in the `M` inner
//! product, so the Krylov basis is kept `M`-orthonormal with full
//! reorthogonalization and restarted thickly from the leading Ritz vectors.
//! Ritz pairs are extracted by Rayleigh-Ritz on `H` itself.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};

use super::{dot, Cholesky, CsrMatrix};
use crate::{Result, StabError};

/// A symmetric linear operator on `R^n`.
pub trait LinearOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOp for CsrMatrix {
    fn dim(&self) -> usize {
        CsrMatrix::dim(self)
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y)
    }
}

#[derive(Clone, Debug)]
pub struct EigOptions {
    /// Number of smallest eigenpairs wanted.
    pub k: usize,
    /// Block size (at least 4).
    pub block: usize,
    /// Largest basis before a restart.
    pub max_basis: usize,
    pub max_restarts: usize,
    /// Relative residual `||(H - lambda M) v|| / ||M v||` for convergence.
    pub tol: f64,
    pub seed: u64,
}

impl EigOptions {
    pub fn new(k: usize, seed: u64) -> Self {
        let block = 4.max(k.min(8));
        EigOptions {
            k,
            block,
            max_basis: (3 * k + 4 * block).max(40),
            max_restarts: 60,
            tol: 1e-8,
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigResult {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// `M`-orthonormal eigenvectors.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
    /// Shift actually used for the factorization.
    pub shift: f64,
    /// Operator applications (linear solves).
    pub solves: usize,
}

impl EigResult {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// Factors `H - sigma M`, lowering `sigma` until the factorization succeeds.
/// Returns the factor and the shift used.
pub fn factor_shifted(h: &CsrMatrix, m: &CsrMatrix, sigma_hint: f64) -> Result<(Cholesky, f64)> {
    let mut sigma = sigma_hint;
    for _ in 0..40 {
        let s = h.add_scaled(-sigma, m);
        match Cholesky::factor(&s) {
            Ok(c) => return Ok((c, sigma)),
            Err(_) => sigma -= 2.0 * sigma.abs().max(1e-3),
        }
    }
    Err(StabError::LinearSolve(format!(
        "no positive-definite shift found below {sigma_hint}"
    )))
}

/// Smallest `opts.k` eigenpairs of `H v = lambda M v`.
///
/// `sigma_hint` must be a guess for a shift below the smallest eigenvalue;
/// it is lowered automatically when `H - sigma M` is not positive definite.
/// When `project` is given, every basis vector is passed through it; it must
/// be an `M`-orthogonal projector onto a subspace invariant under `M^{-1} H`.
pub fn shift_invert_eigs(
    h: &CsrMatrix,
    m: &CsrMatrix,
    sigma_hint: f64,
    opts: &EigOptions,
    project: Option<&dyn Fn(&mut [f64])>,
) -> Result<EigResult> {
    let n = h.dim();
    if opts.k == 0 || opts.k > n {
        return Err(StabError::InvalidArgument(format!("k = {} outside 1..={n}", opts.k)));
    }
    let (chol, sigma) = factor_shifted(h, m, sigma_hint)?;
    let block = opts.block.max(4).min(n);
    let max_basis = opts.max_basis.max(opts.k + 2 * block).min(n);

    let mut solves = 0usize;
    let apply_op = |q: &[f64], solves: &mut usize| -> (Vec<f64>, Vec<f64>) {
        let mq = m.matvec(q);
        let y = chol.solve(&mq);
        *solves += 1;
        (mq, y)
    };

    let mut rng = crate::rng::stream(opts.seed, "lanczos-start");
    let mut candidates: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();

    let mut basis = Basis::default();
    let mut g = DMatrix::<f64>::zeros(0, 0);

    let mut best: Option<EigResult> = None;
    for _restart in 0..opts.max_restarts {
        while basis.q.len() < max_basis {
            let mut added = extend_basis(&mut candidates, &mut basis, h, m, project, &apply_op, &mut solves);
            if added == 0 {
                // Invariant subspace: refill with fresh random directions.
                candidates = (0..block)
                    .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
                    .collect();
                added = extend_basis(&mut candidates, &mut basis, h, m, project, &apply_op, &mut solves);
                if added == 0 {
                    break;
                }
            }
            g = projected_matrix(&basis.q, &basis.hq);
            let start = basis.q.len() - added;
            candidates = basis.y[start..].to_vec();
            if basis.q.len() >= opts.k {
                let res = ritz(&basis, &g, opts.k);
                let done = res.all_converged(opts.tol);
                best = Some(res.into_result(opts.tol, sigma, solves));
                if done {
                    return Ok(best.unwrap());
                }
            }
        }
        // Thick restart from the lowest Ritz vectors.
        let keep = (opts.k + block).min(basis.q.len().saturating_sub(block)).max(opts.k);
        let eig = sorted_eig(&g);
        let s = eig.1.columns(0, keep).into_owned();
        basis = Basis {
            q: combine(&basis.q, &s),
            mq: combine(&basis.mq, &s),
            hq: combine(&basis.hq, &s),
            y: combine(&basis.y, &s),
        };
        g = projected_matrix(&basis.q, &basis.hq);
        candidates = basis.y[..block.min(keep)].to_vec();
    }
    best.ok_or_else(|| StabError::NotConverged("eigensolver produced no Ritz pairs".into()))
}

/// `M`-orthonormal basis with its images under `M`, `H` and the
/// shift-invert operator.
#[derive(Default)]
struct Basis {
    q: Vec<Vec<f64>>,
    mq: Vec<Vec<f64>>,
    hq: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
}

fn extend_basis(
    candidates: &mut Vec<Vec<f64>>,
    basis: &mut Basis,
    h: &CsrMatrix,
    m: &CsrMatrix,
    project: Option<&dyn Fn(&mut [f64])>,
    apply_op: &dyn Fn(&[f64], &mut usize) -> (Vec<f64>, Vec<f64>),
    solves: &mut usize,
) -> usize {
    let mut added = 0;
    for mut c in candidates.drain(..) {
        if let Some(p) = project {
            p(&mut c);
        }
        let scale0 = m_norm(m, &c);
        if scale0 == 0.0 || !scale0.is_finite() {
            continue;
        }
        for _pass in 0..2 {
            for (qj, mqj) in basis.q.iter().zip(basis.mq.iter()) {
                let a = dot(mqj, &c);
                for (ci, qi) in c.iter_mut().zip(qj) {
                    *ci -= a * qi;
                }
            }
        }
        let nc = m_norm(m, &c);
        if nc <= 1e-10 * scale0 {
            continue;
        }
        for ci in c.iter_mut() {
            *ci /= nc;
        }
        let (mc, yc) = apply_op(&c, solves);
        basis.hq.push(h.matvec(&c));
        basis.q.push(c);
        basis.mq.push(mc);
        basis.y.push(yc);
        added += 1;
    }
    added
}

fn m_norm(m: &CsrMatrix, v: &[f64]) -> f64 {
    dot(&m.matvec(v), v).max(0.0).sqrt()
}

/// `Q^T H Q`, symmetrized.
fn projected_matrix(q: &[Vec<f64>], hq: &[Vec<f64>]) -> DMatrix<f64> {
    let k = q.len();
    let mut g = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let a = 0.5 * (dot(&q[i], &hq[j]) + dot(&q[j], &hq[i]));
            g[(i, j)] = a;
            g[(j, i)] = a;
        }
    }
    g
}

/// Eigen-decomposition with eigenvalues sorted in ascending order.
fn sorted_eig(g: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(g.clone());
    let mut idx: Vec<usize> = (0..g.nrows()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(g.nrows(), g.nrows());
    for (c, &i) in idx.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

fn combine(basis: &[Vec<f64>], s: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let n = basis[0].len();
    (0..s.ncols())
        .map(|c| {
            let mut out = vec![0.0; n];
            for (j, bj) in basis.iter().enumerate() {
                let w = s[(j, c)];
                if w != 0.0 {
                    for (o, b) in out.iter_mut().zip(bj) {
                        *o += w * b;
                    }
                }
            }
            out
        })
        .collect()
}

struct RitzSet {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
}

impl RitzSet {
    fn all_converged(&self, tol: f64) -> bool {
        self.residuals.iter().all(|&r| r <= tol)
    }

    fn into_result(self, tol: f64, shift: f64, solves: usize) -> EigResult {
        let converged = self.residuals.iter().map(|&r| r <= tol).collect();
        EigResult {
            values: self.values,
            vectors: self.vectors,
            residuals: self.residuals,
            converged,
            shift,
            solves,
        }
    }
}

fn ritz(basis: &Basis, g: &DMatrix<f64>, k: usize) -> RitzSet {
    let (theta, s) = sorted_eig(g);
    let s = s.columns(0, k).into_owned();
    let vectors = combine(&basis.q, &s);
    let hz = combine(&basis.hq, &s);
    let mz = combine(&basis.mq, &s);
    let mut residuals = Vec::with_capacity(k);
    for i in 0..k {
        let lambda = theta[i];
        let r: f64 = hz[i]
            .iter()
            .zip(&mz[i])
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let denom = dot(&mz[i], &mz[i]).sqrt();
        residuals.push(if denom > 0.0 { r / denom } else { f64::INFINITY });
    }
    RitzSet { values: theta[..k].to_vec(), vectors, residuals }
}
