//! Dense symmetric helpers with condition-number guards.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

/// Matrices whose condition number exceeds this are treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Above this, a block is still inverted but the result is flagged.
pub const NEAR_SINGULAR: f64 = 1e8;

/// Ratio of extreme eigenvalues of a symmetric matrix. Infinite when the
/// smallest eigenvalue is not positive.
pub fn symmetric_condition(eigenvalues: &DVector<f64>) -> f64 {
    let max = eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if eigenvalues.is_empty() {
        return 1.0;
    }
    if min <= 0.0 || max <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Cholesky factor of a symmetric positive-definite matrix, admitted only
/// when its condition number is at most [`CONDITION_LIMIT`].
#[derive(Debug, Clone)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
    condition: f64,
}

impl SpdFactor {
    /// Returns the condition number as the error value when the guard trips.
    pub fn new(m: &DMatrix<f64>) -> Result<Self, f64> {
        let mut sym = m.clone();
        symmetrize(&mut sym);
        let condition = symmetric_condition(&SymmetricEigen::new(sym.clone()).eigenvalues);
        if !condition.is_finite() || condition > CONDITION_LIMIT {
            return Err(condition);
        }
        let chol = Cholesky::new(sym).ok_or(f64::INFINITY)?;
        Ok(SpdFactor { chol, condition })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(b)
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }
}

/// Inverse of a symmetric positive semi-definite block via its eigen
/// decomposition.
#[derive(Debug, Clone)]
pub struct GuardedInverse {
    pub inverse: DMatrix<f64>,
    pub condition: f64,
}

impl GuardedInverse {
    pub fn near_singular(&self) -> bool {
        self.condition > NEAR_SINGULAR
    }
}

/// Inverts a symmetric matrix, failing with the condition number when it
/// exceeds [`CONDITION_LIMIT`].
pub fn guarded_symmetric_inverse(m: DMatrix<f64>) -> Result<GuardedInverse, f64> {
    let mut sym = m;
    symmetrize(&mut sym);
    let eig = SymmetricEigen::new(sym);
    let condition = symmetric_condition(&eig.eigenvalues);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(condition);
    }
    let inv_vals = eig.eigenvalues.map(|l| 1.0 / l);
    let v = &eig.eigenvectors;
    let mut inverse = v * DMatrix::from_diagonal(&inv_vals) * v.transpose();
    symmetrize(&mut inverse);
    Ok(GuardedInverse { inverse, condition })
}
