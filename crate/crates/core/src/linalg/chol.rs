//! Sparse Cholesky factorization of symmetric positive-definite matrices.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::{Mat, Side};

use super::CsrMatrix;
use crate::{Result, StabError};

/// `L L^T` factorization of a symmetric positive-definite [`CsrMatrix`].
pub struct Cholesky {
    n: usize,
    llt: Llt<usize, f64>,
}

impl Cholesky {
    /// Factors `a`, reading only its lower triangle. Fails when a pivot is
    /// not positive, which certifies that `a` is not positive definite.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        faer::set_global_parallelism(faer::Par::Seq);
        let m = a.to_faer();
        let llt = m
            .sp_cholesky(Side::Lower)
            .map_err(|e| StabError::LinearSolve(format!("cholesky: {e}")))?;
        Ok(Cholesky { n: a.dim(), llt })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let mut rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.llt.solve_in_place(rhs.as_mut());
        for (i, bi) in b.iter_mut().enumerate() {
            *bi = rhs[(i, 0)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
