use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix has a negative eigenvalue {eigenvalue:.3e}")]
    NegativeEigenvalue { eigenvalue: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("reconstructed covariance is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NonPositiveDefinite { min_eigenvalue: f64 },

    #[error("covariance matrix is singular or ill-conditioned (condition number {condition:.3e})")]
    SingularSigma { condition: f64 },

    #[error("loadings are rank deficient (condition number of L'Psi^-2 L is {condition:.3e})")]
    RankDeficientLoadings { condition: f64 },

    #[error("McDonald inner matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    InnerMatrixNotPD { min_eigenvalue: f64 },

    #[error("predictor {factor} has zero variance")]
    ZeroPredictorVariance { factor: usize },

    #[error("degenerate denominator 1 + (p - 1) rho = {denominator}")]
    DegenerateDenominator { denominator: f64 },

    #[error("maximum-likelihood extraction did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("{q} factors leave negative degrees of freedom for {p} variables")]
    TooManyFactors { p: usize, q: usize },

    #[error("promax target cross-product is singular")]
    SingularTarget,

    #[error("column {column} has zero variance")]
    ZeroVariance { column: usize },

    #[error("inadmissible condition {label}: {reason}")]
    InadmissibleCondition { label: String, reason: String },

    #[error("inadmissible minor-factor perturbation: {0}")]
    InadmissiblePerturbation(String),

    #[error("invalid factor model: {}", format_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
