//! Symmetric matrix utilities: spectral roots, SPD inverses, conditioning.
//!
//! Every routine here goes through a symmetric eigendecomposition, so roots
//! are symmetric by construction and eigenvalues are available for
//! positive-definiteness decisions.

use nalgebra::{DMatrix, DVector, Dim, Matrix, RawStorage, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues at or below this are treated as zero (or as a failure of
/// positive definiteness, depending on the caller).
pub const EIGEN_CLAMP: f64 = 1e-12;

/// Symmetry tolerance accepted by the root routines.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Condition numbers above this are treated as structural singularity.
pub const CONDITION_LIMIT: f64 = 1e12;

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Averages `m` with its transpose.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest absolute entry of any matrix or vector.
pub fn max_abs<R: Dim, C: Dim, S: RawStorage<f64, R, C>>(m: &Matrix<f64, R, C, S>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

/// Eigendecomposition of a symmetric matrix, after checking symmetry.
pub fn sym_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    check_square(m)?;
    let asymmetry = max_asymmetry(m);
    if asymmetry > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(SymmetricEigen::new(symmetrize(m)))
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    let eig = sym_eigen(m)?;
    Ok(eig.eigenvalues.min())
}

/// Ratio of largest to smallest eigenvalue; infinite when the smallest is not positive.
pub fn condition_number(m: &DMatrix<f64>) -> Result<f64> {
    let eig = sym_eigen(m)?;
    let lo = eig.eigenvalues.min();
    let hi = eig.eigenvalues.max();
    if lo <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(hi / lo)
}

fn spectral_apply(eig: &SymmetricEigen<f64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let u = &eig.eigenvectors;
    let d = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&v| f(v)));
    let scaled = u * DMatrix::from_diagonal(&d);
    symmetrize(&(scaled * u.transpose()))
}

/// Symmetric positive-semidefinite square root `S` with `S * S = m`.
///
/// Eigenvalues in `[-EIGEN_CLAMP, 0)` are clamped to zero; anything more
/// negative is reported as [`Error::NegativeEigenvalue`].
pub fn sym_sqrt_pd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = sym_eigen(m)?;
    let lo = eig.eigenvalues.min();
    if lo < -EIGEN_CLAMP {
        return Err(Error::NegativeEigenvalue { eigenvalue: lo });
    }
    Ok(spectral_apply(&eig, |v| v.max(0.0).sqrt()))
}

/// Symmetric inverse square root of a positive-definite matrix.
pub fn sym_inv_sqrt_pd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = sym_eigen(m)?;
    let lo = eig.eigenvalues.min();
    if lo <= EIGEN_CLAMP {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lo });
    }
    Ok(spectral_apply(&eig, |v| 1.0 / v.sqrt()))
}

/// Root `N` of a factor correlation matrix with `N * N' = phi`.
///
/// Returns the symmetric root `U D^{1/2} U'`. Other roots `N * Q` change the
/// per-factor McDonald reliabilities (only column sign flips leave them
/// alone); the symmetric one keeps column `j` tied to factor `j`.
pub fn phi_root(phi: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = sym_eigen(phi)?;
    let lo = eig.eigenvalues.min();
    if lo <= EIGEN_CLAMP {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lo });
    }
    Ok(spectral_apply(&eig, f64::sqrt))
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let chol = nalgebra::Cholesky::new(symmetrize(m))?;
    Some(symmetrize(&chol.inverse()))
}

/// Solves `m * x = rhs` for symmetric positive-definite `m`.
pub fn spd_solve(m: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let chol = nalgebra::Cholesky::new(symmetrize(m))?;
    Some(chol.solve(rhs))
}

/// Diagonal of `m` as a vector.
pub fn diag(m: &DMatrix<f64>) -> DVector<f64> {
    m.diagonal()
}
