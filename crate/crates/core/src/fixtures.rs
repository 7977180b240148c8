//! Reference models used by the verifier, examples and tests.

use nalgebra::DMatrix;

use crate::model::FactorModel;

/// Nine-item, three-factor example with cross-loadings and correlated factors.
pub const WORKED_LAMBDA: [[f64; 3]; 9] = [
    [0.50, -0.10, 0.10],
    [0.50, 0.10, 0.10],
    [0.50, 0.10, -0.10],
    [-0.10, 0.50, 0.15],
    [0.15, 0.50, 0.10],
    [-0.15, 0.50, 0.10],
    [0.10, 0.10, 0.60],
    [0.10, -0.10, 0.60],
    [0.10, 0.10, 0.60],
];

pub const WORKED_PHI: [[f64; 3]; 3] = [[1.00, 0.30, 0.20], [0.30, 1.00, 0.10], [0.20, 0.10, 1.00]];

pub fn worked_example() -> FactorModel {
    let lambda = DMatrix::from_fn(9, 3, |i, j| WORKED_LAMBDA[i][j]);
    let phi = DMatrix::from_fn(3, 3, |i, j| WORKED_PHI[i][j]);
    FactorModel::standardized(lambda, phi).expect("worked example dimensions")
}

/// `p` items loading `loading` on a single factor.
pub fn one_factor(p: usize, loading: f64) -> FactorModel {
    FactorModel::standardized(DMatrix::from_element(p, 1, loading), DMatrix::identity(1, 1))
        .expect("one-factor dimensions")
}

/// Orthogonal perfect simple structure: `per_factor` items per factor, each
/// loading `loading` on its own factor only.
pub fn simple_structure(q: usize, per_factor: usize, loading: f64) -> FactorModel {
    let p = q * per_factor;
    let lambda = DMatrix::from_fn(p, q, |i, j| if i / per_factor == j { loading } else { 0.0 });
    FactorModel::standardized(lambda, DMatrix::identity(q, q)).expect("simple structure dimensions")
}

/// Simple structure with `cross` on every non-salient position (alternating
/// sign by item + factor parity) and uniform factor correlation `r`.
pub fn cross_loaded(q: usize, per_factor: usize, loading: f64, cross: f64, r: f64) -> FactorModel {
    let p = q * per_factor;
    let lambda = DMatrix::from_fn(p, q, |i, j| {
        if i / per_factor == j {
            loading
        } else if (i + j) % 2 == 0 {
            cross
        } else {
            -cross
        }
    });
    let phi = DMatrix::from_fn(q, q, |i, j| if i == j { 1.0 } else { r });
    FactorModel::standardized(lambda, phi).expect("cross-loaded dimensions")
}
