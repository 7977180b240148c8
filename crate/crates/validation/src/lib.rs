//! Tolerances, budgets and seeds for the acceptance run in `tests/acceptance.rs`.
//!
//! Kept here so they are fixed in one place and readable without the test.

/// Worked example: library vs independent transliteration, per factor.
pub const ORACLE_TOL: f64 = 1e-10;
pub const ORACLE_BUDGET_SECS: f64 = 1.0;

/// One factor, p = 5, l = .8: all three reliabilities and squared determinacy vs `A/(1+A)`.
pub const ONE_FACTOR_TOL: f64 = 1e-10;

pub const FUZZ_MODELS: usize = 1000;
pub const FUZZ_SEED: u64 = 20_240_601;
/// Slack on `R_tr >= R_tb`, `R_tr >= R_tm` and `R_tr >= determinacy^2`.
pub const ORDERING_TOL: f64 = 1e-10;
/// Off-diagonal mass of `L' Sigma^-1 L` below which it counts as diagonal.
pub const DIAGONAL_PREMISE_TOL: f64 = 1e-8;
pub const EQUALITY_TOL: f64 = 1e-8;
pub const THEOREM_BUDGET_SECS: f64 = 30.0;

pub const JORESKOG_TOL: f64 = 1e-9;

pub const KR_TOL: f64 = 1e-12;
pub const KR_ITEMS: [usize; 4] = [2, 5, 10, 30];
pub const KR_RHO: [f64; 4] = [0.1, 0.3, 0.5, 0.8];

pub const STUDY1_CELLS: usize = 40;
/// Largest per-factor `|R_tb - R_tm|` allowed in simple-structure cells.
pub const SIMPLE_STRUCTURE_GAP: f64 = 0.01;
pub const STUDY1_BUDGET_SECS: f64 = 10.0;

pub const SIM_SEED: u64 = 42;
/// `mean R_tb >= mean R_tm - slack` in every desk-scale cell.
pub const MCDONALD_SLACK: f64 = 0.005;
pub const DESK_BUDGET_SECS: f64 = 300.0;
/// Mean absolute change of aggregate reliabilities under minor factors.
pub const MODEL_ERROR_SHIFT: f64 = 0.02;

pub const COMMUNALITY_TOL: f64 = 1e-4;
pub const MIN_CONGRUENCE: f64 = 0.98;

pub const THREAD_COUNTS: [usize; 2] = [1, 8];
