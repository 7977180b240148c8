//! Exploratory factor analysis: ML extraction, rotation and alignment.

mod align;
mod ml;
mod rotation;
mod sample;

pub use align::{
    align_to_target, column_congruences, congruence_matrix, greedy_alignment, tucker_congruence, Alignment,
};
pub use ml::{degrees_of_freedom, ml_extract, ExtractionResult, MlOptions};
pub use rotation::{promax, varimax, varimax_criterion, ObliqueRotation, OrthogonalRotation};
pub use sample::{sample_correlation, sample_covariance};
