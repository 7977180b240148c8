//! Weight matrices `B` of the regression, Bartlett and McDonald factor score
//! predictors, and their application `f_hat = B' x`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CONDITION_LIMIT, EIGEN_CLAMP};
use crate::model::{CovarianceMatrix, FactorModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictorKind {
    Regression,
    Bartlett,
    McDonald,
    Custom,
}

impl PredictorKind {
    /// The three predictors with closed-form reliabilities, in report order.
    pub const STANDARD: [PredictorKind; 3] =
        [PredictorKind::Regression, PredictorKind::Bartlett, PredictorKind::McDonald];

    pub fn as_str(self) -> &'static str {
        match self {
            PredictorKind::Regression => "regression",
            PredictorKind::Bartlett => "bartlett",
            PredictorKind::McDonald => "mcdonald",
            PredictorKind::Custom => "custom",
        }
    }
}

/// A `p x q` weight matrix tagged with the predictor it implements.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorWeights {
    b: DMatrix<f64>,
    kind: PredictorKind,
}

impl PredictorWeights {
    pub fn new(b: DMatrix<f64>, kind: PredictorKind) -> Result<Self> {
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("weights contain non-finite entries".into()));
        }
        Ok(Self { b, kind })
    }

    pub fn custom(b: DMatrix<f64>) -> Result<Self> {
        Self::new(b, PredictorKind::Custom)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn kind(&self) -> PredictorKind {
        self.kind
    }
}

fn check_dims(model: &FactorModel, sigma: &CovarianceMatrix) -> Result<()> {
    if sigma.dim() != model.n_items() {
        return Err(Error::DimensionMismatch(format!(
            "sigma is {0}x{0}, model has {1} items",
            sigma.dim(),
            model.n_items()
        )));
    }
    Ok(())
}

/// `Sigma^-1`, refusing matrices whose condition number exceeds 1e12.
pub(crate) fn sigma_inverse(sigma: &CovarianceMatrix) -> Result<DMatrix<f64>> {
    let condition = linalg::condition_number(sigma.matrix())?;
    if condition > CONDITION_LIMIT {
        return Err(Error::SingularSigma { condition });
    }
    linalg::spd_inverse(sigma.matrix()).ok_or(Error::SingularSigma { condition })
}

/// `(L' Psi^-2 L)^-1`, refusing rank-deficient loadings.
pub(crate) fn lpl_inverse(model: &FactorModel) -> Result<DMatrix<f64>> {
    if model.psi2().iter().any(|&v| v <= 0.0) {
        return Err(Error::RankDeficientLoadings { condition: f64::INFINITY });
    }
    let m = model.lambda_psi_lambda();
    let condition = linalg::condition_number(&m)?;
    if condition > CONDITION_LIMIT {
        return Err(Error::RankDeficientLoadings { condition });
    }
    linalg::spd_inverse(&m).ok_or(Error::RankDeficientLoadings { condition })
}

/// Regression (Thurstone) weights `Sigma^-1 L Phi`.
pub fn regression_weights(model: &FactorModel, sigma: &CovarianceMatrix) -> Result<PredictorWeights> {
    check_dims(model, sigma)?;
    let inv = sigma_inverse(sigma)?;
    let b = inv * model.lambda() * model.phi();
    PredictorWeights::new(b, PredictorKind::Regression)
}

/// Bartlett weights `Psi^-2 L (L' Psi^-2 L)^-1`; satisfies `L' B = I`.
pub fn bartlett_weights(model: &FactorModel) -> Result<PredictorWeights> {
    let inv = lpl_inverse(model)?;
    let b = model.psi_weighted_lambda() * inv;
    PredictorWeights::new(b, PredictorKind::Bartlett)
}

/// Scaling of McDonald scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McDonaldScaling {
    /// `B = Psi^-2 L N S^-1/2`, so that `B' Sigma B = I`.
    #[default]
    UnitCovariance,
    /// The above post-multiplied by `N'`, so that `B' Sigma B = Phi`.
    CorrelationPreserving,
}

/// Pieces of the McDonald construction shared with the reliability formula.
pub(crate) struct McDonaldParts {
    /// `Psi^-2 L N`
    pub weighted: DMatrix<f64>,
    /// `(N' L' Psi^-2 Sigma Psi^-2 L N)^-1/2`
    pub inner_inv_sqrt: DMatrix<f64>,
    pub n: DMatrix<f64>,
}

pub(crate) fn mcdonald_parts(model: &FactorModel, sigma: &CovarianceMatrix) -> Result<McDonaldParts> {
    check_dims(model, sigma)?;
    let n = linalg::phi_root(model.phi())?;
    let weighted = model.psi_weighted_lambda() * &n;
    let inner = linalg::symmetrize(&(weighted.transpose() * sigma.matrix() * &weighted));
    let min_eigenvalue = linalg::min_eigenvalue(&inner)?;
    if min_eigenvalue <= EIGEN_CLAMP {
        return Err(Error::InnerMatrixNotPD { min_eigenvalue });
    }
    let inner_inv_sqrt = linalg::sym_inv_sqrt_pd(&inner).map_err(|_| Error::InnerMatrixNotPD { min_eigenvalue })?;
    Ok(McDonaldParts { weighted, inner_inv_sqrt, n })
}

/// McDonald weights `Psi^-2 L N (N' L' Psi^-2 Sigma Psi^-2 L N)^-1/2` with
/// `N N' = Phi`. The resulting predictors have covariance `I`.
pub fn mcdonald_weights(model: &FactorModel, sigma: &CovarianceMatrix) -> Result<PredictorWeights> {
    mcdonald_weights_scaled(model, sigma, McDonaldScaling::UnitCovariance)
}

pub fn mcdonald_weights_scaled(
    model: &FactorModel,
    sigma: &CovarianceMatrix,
    scaling: McDonaldScaling,
) -> Result<PredictorWeights> {
    let parts = mcdonald_parts(model, sigma)?;
    let b = &parts.weighted * &parts.inner_inv_sqrt;
    let b = match scaling {
        McDonaldScaling::UnitCovariance => b,
        McDonaldScaling::CorrelationPreserving => b * parts.n.transpose(),
    };
    PredictorWeights::new(b, PredictorKind::McDonald)
}

pub fn weights_for(kind: PredictorKind, model: &FactorModel, sigma: &CovarianceMatrix) -> Result<PredictorWeights> {
    match kind {
        PredictorKind::Regression => regression_weights(model, sigma),
        PredictorKind::Bartlett => bartlett_weights(model),
        PredictorKind::McDonald => mcdonald_weights(model, sigma),
        PredictorKind::Custom => Err(Error::Parse("custom weights have no formula".into())),
    }
}

/// Scores `data * B`: row `i` of the result is `B' x_i`.
pub fn predict_scores(weights: &PredictorWeights, data: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if data.ncols() != weights.b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} columns, weights expect {}",
            data.ncols(),
            weights.b.nrows()
        )));
    }
    Ok(data * &weights.b)
}

/// McDonald scores whose covariance reproduces `Phi`.
pub fn predict_scores_correlation_preserving(
    model: &FactorModel,
    sigma: &CovarianceMatrix,
    data: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let w = mcdonald_weights_scaled(model, sigma, McDonaldScaling::CorrelationPreserving)?;
    predict_scores(&w, data)
}
