//! Reliability estimates for regression, Bartlett and McDonald factor score
//! predictors, together with the factor-analysis and Monte Carlo machinery
//! used to study them.
//!
//! ```
//! use fars_core::{fixtures, model::reconstruct_sigma, reliability};
//!
//! let model = fixtures::one_factor(5, 0.8);
//! let sigma = reconstruct_sigma(&model).unwrap();
//! let r = reliability::reliability_regression(&model, &sigma).unwrap();
//! assert!((r[0] - 0.898876).abs() < 1e-6);
//! ```

pub mod error;
pub mod fa;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod model;
pub mod predictors;
pub mod reliability;
pub mod simulation;

pub use error::{Error, Result};
pub use model::{reconstruct_sigma, validate_model, CovarianceKind, CovarianceMatrix, FactorModel, Violation};
pub use predictors::{PredictorKind, PredictorWeights};
