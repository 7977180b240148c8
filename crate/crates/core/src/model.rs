//! Common factor model `x = L f + e` and its covariance decomposition
//! `Sigma = L Phi L' + Psi^2`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, EIGEN_CLAMP};

/// Tolerance for unit diagonals of `Phi` and of standardized `Sigma`.
pub const UNIT_DIAGONAL_TOL: f64 = 1e-10;

/// Loading pattern, factor correlations and unique variances.
///
/// Construction only checks that the pieces fit together dimensionally;
/// the statistical invariants are reported by [`validate_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    lambda: DMatrix<f64>,
    phi: DMatrix<f64>,
    psi2: DVector<f64>,
}

impl FactorModel {
    pub fn new(lambda: DMatrix<f64>, phi: DMatrix<f64>, psi2: DVector<f64>) -> Result<Self> {
        let (p, q) = lambda.shape();
        if q == 0 || p == 0 {
            return Err(Error::DimensionMismatch("loading matrix is empty".into()));
        }
        if phi.shape() != (q, q) {
            return Err(Error::DimensionMismatch(format!(
                "phi is {}x{}, loadings have {q} factors",
                phi.nrows(),
                phi.ncols()
            )));
        }
        if psi2.len() != p {
            return Err(Error::DimensionMismatch(format!("psi2 has {} entries, loadings have {p} rows", psi2.len())));
        }
        Ok(Self { lambda, phi, psi2 })
    }

    /// Standardized model: unique variances are `1 - diag(L Phi L')`.
    pub fn standardized(lambda: DMatrix<f64>, phi: DMatrix<f64>) -> Result<Self> {
        let p = lambda.nrows();
        let model = Self::new(lambda, phi, DVector::zeros(p))?;
        let h = model.communalities();
        let psi2 = h.map(|c| 1.0 - c);
        Ok(Self { psi2, ..model })
    }

    pub fn lambda(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn psi2(&self) -> &DVector<f64> {
        &self.psi2
    }

    pub fn n_items(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn n_factors(&self) -> usize {
        self.lambda.ncols()
    }

    /// `L Phi L'`
    pub fn common_covariance(&self) -> DMatrix<f64> {
        linalg::symmetrize(&(&self.lambda * &self.phi * self.lambda.transpose()))
    }

    /// `diag(L Phi L')`
    pub fn communalities(&self) -> DVector<f64> {
        let lp = &self.lambda * &self.phi;
        DVector::from_iterator(self.n_items(), (0..self.n_items()).map(|i| lp.row(i).dot(&self.lambda.row(i))))
    }

    /// `Psi^-2` as a vector of reciprocal unique variances.
    pub fn inv_psi2(&self) -> DVector<f64> {
        self.psi2.map(|v| 1.0 / v)
    }

    /// `L' Psi^-2 L`
    pub fn lambda_psi_lambda(&self) -> DMatrix<f64> {
        let weighted = self.psi_weighted_lambda();
        linalg::symmetrize(&(self.lambda.transpose() * weighted))
    }

    /// `Psi^-2 L`
    pub fn psi_weighted_lambda(&self) -> DMatrix<f64> {
        let inv = self.inv_psi2();
        let mut w = self.lambda.clone();
        for (i, mut row) in w.row_iter_mut().enumerate() {
            row *= inv[i];
        }
        w
    }

    /// Same pattern and correlations, unique variances replaced by
    /// `1 - communality`. Rows whose communality exceeds `1 - floor` are
    /// shrunk so that their unique variance equals `floor`.
    pub fn restandardize(&self, floor: f64) -> (Self, bool) {
        let h = self.communalities();
        let cap = 1.0 - floor;
        let mut lambda = self.lambda.clone();
        let mut adjusted = false;
        for i in 0..self.n_items() {
            if h[i] > cap {
                let scale = (cap / h[i]).sqrt();
                lambda.row_mut(i).scale_mut(scale);
                adjusted = true;
            }
        }
        let model = Self::standardized(lambda, self.phi.clone()).expect("dimensions unchanged by restandardize");
        (model, adjusted)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovarianceKind {
    Population,
    ModelImplied,
    Sample,
}

/// Symmetric positive-definite covariance of the observed variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    sigma: DMatrix<f64>,
    kind: CovarianceKind,
}

impl CovarianceMatrix {
    /// Checks squareness, symmetry (to 1e-12) and positive definiteness.
    pub fn new(sigma: DMatrix<f64>, kind: CovarianceKind) -> Result<Self> {
        if sigma.nrows() != sigma.ncols() {
            return Err(Error::DimensionMismatch(format!("covariance is {}x{}", sigma.nrows(), sigma.ncols())));
        }
        let asymmetry = linalg::max_asymmetry(&sigma);
        if asymmetry > 1e-12 {
            return Err(Error::NotSymmetric { asymmetry });
        }
        let sigma = linalg::symmetrize(&sigma);
        let min_eigenvalue = linalg::min_eigenvalue(&sigma)?;
        if min_eigenvalue <= EIGEN_CLAMP {
            return Err(Error::NonPositiveDefinite { min_eigenvalue });
        }
        Ok(Self { sigma, kind })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn kind(&self) -> CovarianceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.sigma
    }
}

/// One violated model invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    /// More factors than items.
    TooManyFactors {
        p: usize,
        q: usize,
    },
    NonFinite {
        field: &'static str,
        row: usize,
        col: usize,
    },
    PhiAsymmetric {
        row: usize,
        col: usize,
        magnitude: f64,
    },
    PhiDiagonal {
        index: usize,
        value: f64,
    },
    PhiNotPositiveDefinite {
        min_eigenvalue: f64,
    },
    Psi2NonPositive {
        index: usize,
        value: f64,
    },
    /// `diag(L Phi L') + psi2` differs from one.
    NotStandardized {
        index: usize,
        deviation: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooManyFactors { p, q } => write!(f, "q = {q} exceeds p = {p}"),
            Violation::NonFinite { field, row, col } => {
                write!(f, "{field}[{row}][{col}] is not finite")
            }
            Violation::PhiAsymmetric { row, col, magnitude } => {
                write!(f, "phi[{row}][{col}] asymmetric by {magnitude:.3e}")
            }
            Violation::PhiDiagonal { index, value } => {
                write!(f, "phi[{index}][{index}] = {value} is not 1")
            }
            Violation::PhiNotPositiveDefinite { min_eigenvalue } => {
                write!(f, "phi is not positive definite (min eigenvalue {min_eigenvalue:.3e})")
            }
            Violation::Psi2NonPositive { index, value } => {
                write!(f, "psi2[{index}] = {value} is not positive")
            }
            Violation::NotStandardized { index, deviation } => {
                write!(f, "item {index}: communality + psi2 deviates from 1 by {deviation:.3e}")
            }
        }
    }
}

/// Lists every violated invariant; empty when the model is valid.
pub fn validate_model(model: &FactorModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let (p, q) = model.lambda.shape();
    if q > p {
        out.push(Violation::TooManyFactors { p, q });
    }

    let mut finite = true;
    for ((r, c), v) in indexed(&model.lambda) {
        if !v.is_finite() {
            finite = false;
            out.push(Violation::NonFinite { field: "lambda", row: r, col: c });
        }
    }
    for ((r, c), v) in indexed(&model.phi) {
        if !v.is_finite() {
            finite = false;
            out.push(Violation::NonFinite { field: "phi", row: r, col: c });
        }
    }
    for (i, v) in model.psi2.iter().enumerate() {
        if !v.is_finite() {
            finite = false;
            out.push(Violation::NonFinite { field: "psi2", row: i, col: 0 });
        }
    }
    if !finite {
        return out;
    }

    for i in 0..q {
        for j in (i + 1)..q {
            let magnitude = (model.phi[(i, j)] - model.phi[(j, i)]).abs();
            if magnitude > linalg::SYMMETRY_TOL {
                out.push(Violation::PhiAsymmetric { row: i, col: j, magnitude });
            }
        }
        let d = model.phi[(i, i)];
        if (d - 1.0).abs() > UNIT_DIAGONAL_TOL {
            out.push(Violation::PhiDiagonal { index: i, value: d });
        }
    }
    let min_eigenvalue = nalgebra::SymmetricEigen::new(linalg::symmetrize(&model.phi)).eigenvalues.min();
    if min_eigenvalue <= EIGEN_CLAMP {
        out.push(Violation::PhiNotPositiveDefinite { min_eigenvalue });
    }

    for (i, &v) in model.psi2.iter().enumerate() {
        if v <= 0.0 {
            out.push(Violation::Psi2NonPositive { index: i, value: v });
        }
    }

    let h = model.communalities();
    for i in 0..p {
        let deviation = h[i] + model.psi2[i] - 1.0;
        if deviation.abs() > UNIT_DIAGONAL_TOL {
            out.push(Violation::NotStandardized { index: i, deviation });
        }
    }
    out
}

/// Like [`validate_model`] but as a `Result`.
pub fn ensure_valid(model: &FactorModel) -> Result<()> {
    let v = validate_model(model);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidModel(v))
    }
}

fn indexed(m: &DMatrix<f64>) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
    let rows = m.nrows();
    m.iter().enumerate().map(move |(k, &v)| ((k % rows, k / rows), v))
}

/// Model-implied covariance `L Phi L' + diag(psi2)`.
///
/// Diagonal entries within `UNIT_DIAGONAL_TOL` of one are snapped to exactly
/// one, so standardized models give a correlation matrix.
pub fn reconstruct_sigma(model: &FactorModel) -> Result<CovarianceMatrix> {
    let mut sigma = model.common_covariance();
    for i in 0..model.n_items() {
        let v = sigma[(i, i)] + model.psi2[i];
        sigma[(i, i)] = if (v - 1.0).abs() <= UNIT_DIAGONAL_TOL { 1.0 } else { v };
    }
    let min_eigenvalue = linalg::min_eigenvalue(&sigma)?;
    if min_eigenvalue <= EIGEN_CLAMP {
        return Err(Error::NonPositiveDefinite { min_eigenvalue });
    }
    Ok(CovarianceMatrix { sigma, kind: CovarianceKind::ModelImplied })
}
