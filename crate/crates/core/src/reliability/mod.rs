//! Equivalent-item reliability of factor score predictors.
//!
//! The reliability of `f_hat = B' x` is the correlation of the predictor with
//! the same predictor computed on a hypothetical equivalent item set. Only
//! common factors are shared across the two sets, so for factor `i`
//!
//! ```text
//! R_i = (B' L Phi L' B)_ii / (B' Sigma B)_ii
//! ```
//!
//! The closed forms below are that expression specialized to each
//! predictor's weights.

mod fuzz;
mod report;
mod theorem;

use nalgebra::{DMatrix, DVector};

pub use fuzz::{random_model, FuzzConfig};
pub use report::{reliability_report, FactorRow, ReliabilityReport, CSV_HEADER as REPORT_CSV_HEADER};
pub use theorem::{theorem_report, Conclusion, Premise, TheoremFlags, PREMISE_TOL};

use crate::error::{Error, Result};
use crate::model::{CovarianceMatrix, FactorModel};
use crate::predictors::{self, PredictorKind, PredictorWeights};

fn ratio_of_diagonals(num: &DMatrix<f64>, den: &DMatrix<f64>) -> Result<DVector<f64>> {
    let q = num.nrows();
    let mut out = DVector::zeros(q);
    for i in 0..q {
        let d = den[(i, i)];
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::ZeroPredictorVariance { factor: i });
        }
        out[i] = num[(i, i)] / d;
    }
    Ok(out)
}

/// Reliability of an arbitrary linear predictor `B' x`:
/// `diag(B' L Phi L' B) / diag(B' Sigma B)`.
pub fn reliability_generic(
    weights: &PredictorWeights,
    model: &FactorModel,
    sigma: &CovarianceMatrix,
) -> Result<DVector<f64>> {
    let b = weights.matrix();
    if b.nrows() != model.n_items() || sigma.dim() != model.n_items() {
        return Err(Error::DimensionMismatch(format!(
            "weights are {}x{}, model has {} items, sigma is {}x{}",
            b.nrows(),
            b.ncols(),
            model.n_items(),
            sigma.dim(),
            sigma.dim()
        )));
    }
    let lb = model.lambda().transpose() * b;
    let shared = lb.transpose() * model.phi() * &lb;
    let total = b.transpose() * sigma.matrix() * b;
    ratio_of_diagonals(&shared, &total)
}

/// `L' Sigma^-1 L`
fn lambda_sigma_lambda(model: &FactorModel, sigma: &CovarianceMatrix) -> Result<DMatrix<f64>> {
    if sigma.dim() != model.n_items() {
        return Err(Error::DimensionMismatch(format!(
            "sigma is {0}x{0}, model has {1} items",
            sigma.dim(),
            model.n_items()
        )));
    }
    let inv = predictors::sigma_inverse(sigma)?;
    Ok(model.lambda().transpose() * inv * model.lambda())
}

/// Regression predictor reliability
/// `diag(Phi K Phi K Phi) / diag(Phi K Phi)` with `K = L' Sigma^-1 L`.
pub fn reliability_regression(model: &FactorModel, sigma: &CovarianceMatrix) -> Result<DVector<f64>> {
    let k = lambda_sigma_lambda(model, sigma)?;
    let pk = model.phi() * &k;
    let m = &pk * model.phi();
    let num = &pk * &m;
    ratio_of_diagonals(&num, &m)
}

/// Bartlett predictor reliability `1 / diag((L' Psi^-2 L)^-1 + Phi)`.
pub fn reliability_bartlett(model: &FactorModel) -> Result<DVector<f64>> {
    let inv = predictors::lpl_inverse(model)?;
    let m = inv + model.phi();
    Ok(DVector::from_iterator(m.nrows(), m.diagonal().iter().map(|d| 1.0 / d)))
}

/// McDonald predictor reliability
/// `diag(S^-1/2 N' L' Psi^-2 L Phi L' Psi^-2 L N S^-1/2)` with
/// `S = N' L' Psi^-2 Sigma Psi^-2 L N`.
pub fn reliability_mcdonald(model: &FactorModel, sigma: &CovarianceMatrix) -> Result<DVector<f64>> {
    let parts = predictors::mcdonald_parts(model, sigma)?;
    let g = model.lambda().transpose() * &parts.weighted; // L' Psi^-2 L N
    let shared = g.transpose() * model.phi() * &g;
    let r = &parts.inner_inv_sqrt * shared * &parts.inner_inv_sqrt;
    Ok(r.diagonal())
}

/// Factor score determinacy `diag(Phi L' Sigma^-1 L Phi)^{1/2}`: the
/// correlation of each regression predictor with its factor.
pub fn determinacy(model: &FactorModel, sigma: &CovarianceMatrix) -> Result<DVector<f64>> {
    let k = lambda_sigma_lambda(model, sigma)?;
    let m = model.phi() * k * model.phi();
    Ok(m.diagonal().map(|v| v.max(0.0).sqrt()))
}

/// Reliability of the unit-weighted sum of `p` parallel items with
/// inter-item correlation `rho`: `p rho / (1 + (p - 1) rho)`.
pub fn kr_parallel(p: usize, rho: f64) -> Result<f64> {
    let pf = p as f64;
    let denominator = 1.0 + (pf - 1.0) * rho;
    if p == 0 || denominator <= 0.0 || !denominator.is_finite() {
        return Err(Error::DegenerateDenominator { denominator });
    }
    Ok(pf * rho / denominator)
}

/// Closed-form reliability for one of the three standard predictors.
pub fn reliability_for(kind: PredictorKind, model: &FactorModel, sigma: &CovarianceMatrix) -> Result<DVector<f64>> {
    match kind {
        PredictorKind::Regression => reliability_regression(model, sigma),
        PredictorKind::Bartlett => reliability_bartlett(model),
        PredictorKind::McDonald => reliability_mcdonald(model, sigma),
        PredictorKind::Custom => Err(Error::Parse("custom weights have no closed form".into())),
    }
}

/// `L' Sigma^-1 L` and `((L' Psi^-2 L)^-1 + Phi)^-1`, the two sides of the
/// Joreskog identity.
pub fn joreskog_sides(model: &FactorModel, sigma: &CovarianceMatrix) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let lhs = lambda_sigma_lambda(model, sigma)?;
    let inner = predictors::lpl_inverse(model)? + model.phi();
    let rhs = crate::linalg::spd_inverse(&inner).ok_or(Error::NotPositiveDefinite { min_eigenvalue: f64::NAN })?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::max_abs;
    use crate::model::{reconstruct_sigma, CovarianceKind};
    use crate::predictors::{bartlett_weights, mcdonald_weights, regression_weights};

    const ONE_FACTOR_P5: f64 = (5.0 * 0.64 / 0.36) / (1.0 + 5.0 * 0.64 / 0.36);

    fn sigma(m: &FactorModel) -> CovarianceMatrix {
        reconstruct_sigma(m).unwrap()
    }

    #[test]
    fn frozen_closed_form_constant() {
        assert!((ONE_FACTOR_P5 - 0.898876404494382).abs() < 1e-14);
    }

    #[test]
    fn single_item_reliability_is_communality() {
        let m = fixtures::one_factor(1, 0.8);
        let s = sigma(&m);
        assert!((reliability_regression(&m, &s).unwrap()[0] - 0.64).abs() < 1e-14);
        assert!((reliability_bartlett(&m).unwrap()[0] - 0.64).abs() < 1e-14);
        assert!((determinacy(&m, &s).unwrap()[0] - 0.8).abs() < 1e-14);
    }

    #[test]
    fn one_factor_five_items() {
        let m = fixtures::one_factor(5, 0.8);
        let s = sigma(&m);
        for r in [
            reliability_regression(&m, &s).unwrap()[0],
            reliability_bartlett(&m).unwrap()[0],
            reliability_mcdonald(&m, &s).unwrap()[0],
        ] {
            assert!((r - ONE_FACTOR_P5).abs() < 1e-12, "{r}");
        }
        let det = determinacy(&m, &s).unwrap()[0];
        assert!((det - ONE_FACTOR_P5.sqrt()).abs() < 1e-12);
        assert!((det - 0.9481).abs() < 5e-5);
    }

    #[test]
    fn simple_structure_three_items() {
        let m = fixtures::simple_structure(2, 3, 0.7);
        let a = 3.0 * 0.49 / 0.51;
        let expected = a / (1.0 + a);
        let rb = reliability_bartlett(&m).unwrap();
        for v in rb.iter() {
            assert!((v - expected).abs() < 1e-12);
            assert!((v - 0.742).abs() < 5e-4);
        }
        let s = sigma(&m);
        let rm = reliability_mcdonald(&m, &s).unwrap();
        assert!(max_abs(&(rm - &rb)) < 1e-12);
        let det = determinacy(&m, &s).unwrap();
        let rr = reliability_regression(&m, &s).unwrap();
        assert!(max_abs(&(det.component_mul(&det) - rr)) < 1e-12);
    }

    #[test]
    fn generic_matches_kuder_richardson_for_parallel_items() {
        let (p, rho) = (5, 0.5);
        let m = fixtures::one_factor(p, f64::sqrt(rho));
        let s = sigma(&m);
        let w = PredictorWeights::custom(DMatrix::from_element(p, 1, 1.0)).unwrap();
        let r = reliability_generic(&w, &m, &s).unwrap()[0];
        // direct scalar evaluation of p rho / (1 + (p-1) rho)
        assert!((r - 2.5 / 3.0).abs() < 1e-12);
        assert!((kr_parallel(p, rho).unwrap() - r).abs() < 1e-12);
    }

    #[test]
    fn generic_is_zero_for_weights_orthogonal_to_loadings() {
        let m = fixtures::simple_structure(2, 3, 0.6);
        let s = sigma(&m);
        // first column contrasts items of factor 0, second column is orthogonal to factor 1's loadings
        let b = DMatrix::from_row_slice(6, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -2.0]);
        let w = PredictorWeights::custom(b).unwrap();
        let r = reliability_generic(&w, &m, &s).unwrap();
        assert!(r[0].abs() < 1e-15 && r[1].abs() < 1e-15);
    }

    #[test]
    fn generic_zero_variance_is_an_error() {
        let m = fixtures::simple_structure(2, 3, 0.6);
        let s = sigma(&m);
        let w = PredictorWeights::custom(DMatrix::zeros(6, 2)).unwrap();
        assert!(matches!(reliability_generic(&w, &m, &s), Err(Error::ZeroPredictorVariance { factor: 0 })));
    }

    #[test]
    fn specialized_forms_match_generic_on_worked_example() {
        let m = fixtures::worked_example();
        let s = sigma(&m);
        let pairs = [
            (reliability_regression(&m, &s).unwrap(), regression_weights(&m, &s).unwrap()),
            (reliability_bartlett(&m).unwrap(), bartlett_weights(&m).unwrap()),
            (reliability_mcdonald(&m, &s).unwrap(), mcdonald_weights(&m, &s).unwrap()),
        ];
        for (closed, w) in pairs {
            let generic = reliability_generic(&w, &m, &s).unwrap();
            assert!(max_abs(&(closed - generic)) < 1e-12);
        }
    }

    #[test]
    fn kr_edge_cases() {
        assert_eq!(kr_parallel(1, 0.5).unwrap(), 0.5);
        assert_eq!(kr_parallel(5, 0.0).unwrap(), 0.0);
        assert!((kr_parallel(5, 0.5).unwrap() - 0.833333333333).abs() < 1e-9);
        assert!(matches!(kr_parallel(5, -0.25), Err(Error::DegenerateDenominator { .. })));
        assert!(matches!(kr_parallel(0, 0.5), Err(Error::DegenerateDenominator { .. })));
    }

    #[test]
    fn sample_sigma_is_accepted() {
        let m = fixtures::worked_example();
        let s = CovarianceMatrix::new(sigma(&m).into_matrix(), CovarianceKind::Sample).unwrap();
        assert!(reliability_regression(&m, &s).is_ok());
    }

    #[test]
    fn joreskog_identity_on_worked_example() {
        let m = fixtures::worked_example();
        let (lhs, rhs) = joreskog_sides(&m, &sigma(&m)).unwrap();
        assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }
}
