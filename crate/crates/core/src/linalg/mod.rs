//! Sparse matrices, factorizations and iterative solvers.

pub mod chol;
pub mod lanczos;
pub mod minres;
pub mod sparse;

pub use chol::Cholesky;
pub use lanczos::{shift_invert_eigs, EigOptions, EigResult, LinearOp};
pub use minres::{minres, MinresOutcome};
pub use sparse::CsrMatrix;

/// Euclidean dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Weighted dot product `sum_i w_i a_i b_i`.
pub fn wdot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((wi, x), y)| wi * x * y).sum()
}
