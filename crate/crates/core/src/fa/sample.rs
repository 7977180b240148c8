//! Sample covariance and correlation matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{CovarianceKind, CovarianceMatrix};

fn centered_cross_products(data: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = data.nrows();
    if n < 2 {
        return Err(Error::DimensionMismatch(format!("need at least 2 rows, got {n}")));
    }
    let means = data.row_mean();
    let mut centered = data.clone();
    for mut row in centered.row_iter_mut() {
        row -= &means;
    }
    let mut cov = centered.transpose() * &centered / (n as f64 - 1.0);
    for j in 0..cov.ncols() {
        let scale = 1.0 + means[j] * means[j];
        if cov[(j, j)] <= 1e-14 * scale {
            return Err(Error::ZeroVariance { column: j });
        }
    }
    cov = crate::linalg::symmetrize(&cov);
    Ok(cov)
}

/// Unbiased (divisor `n - 1`) sample covariance.
pub fn sample_covariance(data: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    CovarianceMatrix::new(centered_cross_products(data)?, CovarianceKind::Sample)
}

/// Sample correlation matrix (unit diagonal).
pub fn sample_correlation(data: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    let cov = centered_cross_products(data)?;
    let sd = cov.diagonal().map(f64::sqrt);
    let mut r = DMatrix::from_fn(cov.nrows(), cov.ncols(), |i, j| cov[(i, j)] / (sd[i] * sd[j]));
    for i in 0..r.nrows() {
        r[(i, i)] = 1.0;
    }
    CovarianceMatrix::new(r, CovarianceKind::Sample)
}
