//! Executable checks of the equality and ordering results relating the three
//! reliabilities and the determinacy coefficient.
//!
//! Nothing here asserts. Every premise and conclusion is measured and
//! reported with its slack so callers can decide what to do with it.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{determinacy, joreskog_sides, reliability_bartlett, reliability_mcdonald, reliability_regression};
use crate::error::Result;
use crate::linalg::max_abs;
use crate::model::{CovarianceMatrix, FactorModel};

/// Tolerance on `max |Phi - I|` for the orthogonality premise.
pub const PREMISE_TOL: f64 = 1e-10;
/// Tolerance on the off-diagonal mass of `L' Sigma^-1 L`.
pub const DIAGONAL_PREMISE_TOL: f64 = 1e-8;
/// Equality conclusions (regression vs Bartlett/McDonald) under the premises.
pub const EQUALITY_TOL: f64 = 1e-8;
/// Slack for inequalities and for the determinacy equality.
pub const ORDERING_TOL: f64 = 1e-10;
pub const JORESKOG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Premise {
    pub holds: bool,
    /// Distance from the premise being exactly true.
    pub measured: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conclusion {
    /// Whether the premises that imply this conclusion hold.
    pub applicable: bool,
    pub holds: bool,
    pub measured: f64,
    pub tolerance: f64,
}

impl Conclusion {
    /// True unless the conclusion is applicable and fails.
    pub fn passed(&self) -> bool {
        !self.applicable || self.holds
    }

    fn equality(applicable: bool, measured: f64, tolerance: f64) -> Self {
        Self { applicable, holds: measured < tolerance, measured, tolerance }
    }

    /// `measured` is a minimum difference that should be nonnegative.
    fn at_least_zero(applicable: bool, measured: f64, tolerance: f64) -> Self {
        Self { applicable, holds: measured >= -tolerance, measured, tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremFlags {
    /// `Phi = I`
    pub orthogonal: Premise,
    /// `L' Sigma^-1 L` is diagonal; `measured` is the sum of absolute off-diagonal entries.
    pub diagonal_lsl: Premise,
    /// Regression and Bartlett reliabilities coincide; `measured` is `max |R_tr - R_tb|`.
    pub theorem1: Conclusion,
    /// Regression and McDonald reliabilities coincide; `measured` is `max |R_tr - R_tm|`.
    pub theorem2: Conclusion,
    /// Squared determinacy is a lower bound for the regression reliability under orthogonality;
    /// `measured` is `min(R_tr - determinacy^2)`.
    pub theorem3: Conclusion,
    /// Squared determinacy equals the regression reliability when both premises hold.
    pub determinacy_equality: Conclusion,
    /// `min(R_tr - R_tb)`, always applicable.
    pub ordering_bartlett: Conclusion,
    /// `min(R_tr - R_tm)`, always applicable.
    pub ordering_mcdonald: Conclusion,
    /// `max |L' Sigma^-1 L - ((L' Psi^-2 L)^-1 + Phi)^-1|`, always applicable.
    pub joreskog: Conclusion,
    /// Set when a quantity could not be computed; all conclusions are then failed.
    pub error: Option<String>,
}

impl TheoremFlags {
    pub fn conclusions(&self) -> [(&'static str, &Conclusion); 7] {
        [
            ("theorem1", &self.theorem1),
            ("theorem2", &self.theorem2),
            ("theorem3", &self.theorem3),
            ("determinacy_equality", &self.determinacy_equality),
            ("ordering_bartlett", &self.ordering_bartlett),
            ("ordering_mcdonald", &self.ordering_mcdonald),
            ("joreskog", &self.joreskog),
        ]
    }

    pub fn all_passed(&self) -> bool {
        self.error.is_none() && self.conclusions().iter().all(|(_, c)| c.passed())
    }
}

fn max_abs_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    max_abs(&(a - b))
}

fn min_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).min()
}

fn off_diagonal_mass(m: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                s += m[(i, j)].abs();
            }
        }
    }
    s
}

struct Measured {
    orthogonal: Premise,
    diagonal_lsl: Premise,
    r_tr: DVector<f64>,
    r_tb: DVector<f64>,
    r_tm: DVector<f64>,
    det_sq: DVector<f64>,
    joreskog: f64,
}

fn measure(model: &FactorModel, sigma: &CovarianceMatrix) -> Result<Measured> {
    let q = model.n_factors();
    let phi_dev = max_abs(&(model.phi() - DMatrix::<f64>::identity(q, q)));
    let (lsl, rhs) = joreskog_sides(model, sigma)?;
    let mass = off_diagonal_mass(&lsl);
    let det = determinacy(model, sigma)?;
    Ok(Measured {
        orthogonal: Premise { holds: phi_dev <= PREMISE_TOL, measured: phi_dev, tolerance: PREMISE_TOL },
        diagonal_lsl: Premise { holds: mass < DIAGONAL_PREMISE_TOL, measured: mass, tolerance: DIAGONAL_PREMISE_TOL },
        r_tr: reliability_regression(model, sigma)?,
        r_tb: reliability_bartlett(model)?,
        r_tm: reliability_mcdonald(model, sigma)?,
        det_sq: det.component_mul(&det),
        joreskog: max_abs(&(lsl - rhs)),
    })
}

/// Evaluates every premise and conclusion for `model`.
pub fn theorem_report(model: &FactorModel, sigma: &CovarianceMatrix) -> TheoremFlags {
    match measure(model, sigma) {
        Ok(m) => {
            let both = m.orthogonal.holds && m.diagonal_lsl.holds;
            TheoremFlags {
                theorem1: Conclusion::equality(both, max_abs_diff(&m.r_tr, &m.r_tb), EQUALITY_TOL),
                theorem2: Conclusion::equality(both, max_abs_diff(&m.r_tr, &m.r_tm), EQUALITY_TOL),
                theorem3: Conclusion::at_least_zero(m.orthogonal.holds, min_diff(&m.r_tr, &m.det_sq), ORDERING_TOL),
                determinacy_equality: Conclusion::equality(both, max_abs_diff(&m.r_tr, &m.det_sq), ORDERING_TOL),
                ordering_bartlett: Conclusion::at_least_zero(true, min_diff(&m.r_tr, &m.r_tb), ORDERING_TOL),
                ordering_mcdonald: Conclusion::at_least_zero(true, min_diff(&m.r_tr, &m.r_tm), ORDERING_TOL),
                joreskog: Conclusion::equality(true, m.joreskog, JORESKOG_TOL),
                orthogonal: m.orthogonal,
                diagonal_lsl: m.diagonal_lsl,
                error: None,
            }
        }
        Err(e) => {
            let nan_premise = Premise { holds: false, measured: f64::NAN, tolerance: f64::NAN };
            let failed = Conclusion { applicable: true, holds: false, measured: f64::NAN, tolerance: f64::NAN };
            TheoremFlags {
                orthogonal: nan_premise,
                diagonal_lsl: nan_premise,
                theorem1: failed,
                theorem2: failed,
                theorem3: failed,
                determinacy_equality: failed,
                ordering_bartlett: failed,
                ordering_mcdonald: failed,
                joreskog: failed,
                error: Some(e.to_string()),
            }
        }
    }
}
