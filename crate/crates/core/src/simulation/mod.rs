//! Population grid, seeded replications and aggregation.

mod aggregate;
mod condition;
mod run;
mod sampling;

pub use aggregate::{aggregate_results, summary_csv, SummaryRow, SUMMARY_CSV_HEADER};
pub use condition::{
    corner_cells, full_sampled_grid, make_population_model, study1_grid, MinorFactorSettings, Preset,
    SimulationCondition, GRID_FACTOR_CORRS, GRID_LOADS_PER_FACTOR, GRID_MAIN_LOADINGS, GRID_Q, GRID_SECONDARY_LOADINGS,
};
pub use run::{
    estimate_model, run_condition, run_condition_with, run_conditions, ConditionResult, Counts, EstimateInfo,
    ExtractInput, FactorAggregate, ReplicationResult, ReplicationStatus, RunOptions, SigmaSource, Summary,
};
pub use sampling::{draw_sample, minor_factor_perturb, perturbation_rng, replication_rng, MinorFactorPerturbation};
