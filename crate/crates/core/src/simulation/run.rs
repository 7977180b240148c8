//! Running one condition: population-only evaluation or sampled replications.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fa::{
    align_to_target, column_congruences, ml_extract, promax, sample_correlation, sample_covariance, varimax, MlOptions,
};
use crate::model::{reconstruct_sigma, CovarianceMatrix, FactorModel};
use crate::predictors::PredictorKind;
use crate::reliability::{determinacy, reliability_for};

use super::condition::{make_population_model, SimulationCondition};
use super::sampling::{draw_sample, minor_factor_perturb, perturbation_rng, replication_rng, MinorFactorPerturbation};

/// Which matrix is factored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractInput {
    #[default]
    Correlation,
    Covariance,
}

/// Which `Sigma` enters the reliability formulas in sampled mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaSource {
    /// Rebuilt from the estimated loadings and factor correlations.
    #[default]
    ModelImplied,
    /// The matrix that was factored.
    Sample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    pub extract_from: ExtractInput,
    pub sigma_source: SigmaSource,
    pub kaiser_normalize: bool,
    pub promax_kappa: u32,
    pub max_iter: usize,
    pub psi_floor: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        let ml = MlOptions::default();
        Self {
            extract_from: ExtractInput::Correlation,
            sigma_source: SigmaSource::ModelImplied,
            kaiser_normalize: true,
            promax_kappa: 4,
            max_iter: ml.max_iter,
            psi_floor: ml.psi_floor,
        }
    }
}

impl RunOptions {
    fn ml_options(&self) -> MlOptions {
        MlOptions { max_iter: self.max_iter, psi_floor: self.psi_floor, ..MlOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplicationStatus {
    Converged,
    NotConverged,
    Failed,
}

/// Values of one replication, indexed by population factor after alignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub replication: usize,
    pub status: ReplicationStatus,
    pub heywood: bool,
    pub iterations: usize,
    pub regression: Vec<f64>,
    pub bartlett: Vec<f64>,
    pub mcdonald: Vec<f64>,
    pub determinacy: Vec<f64>,
    /// Tucker congruence of each aligned estimated factor with its population factor.
    pub congruence: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ReplicationResult {
    fn failed(replication: usize, status: ReplicationStatus, iterations: usize, err: &Error) -> Self {
        Self {
            replication,
            status,
            heywood: false,
            iterations,
            regression: Vec::new(),
            bartlett: Vec::new(),
            mcdonald: Vec::new(),
            determinacy: Vec::new(),
            congruence: Vec::new(),
            error: Some(err.to_string()),
        }
    }

    pub fn values(&self, kind: PredictorKind) -> &[f64] {
        match kind {
            PredictorKind::Regression => &self.regression,
            PredictorKind::Bartlett => &self.bartlett,
            PredictorKind::McDonald => &self.mcdonald,
            PredictorKind::Custom => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub n_used: usize,
}

impl Summary {
    /// Mean, sample SD (0 for a single value), median, min and max.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, sd: f64::NAN, median: f64::NAN, min: f64::NAN, max: f64::NAN, n_used: 0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd =
            if n > 1 { (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
        Self { mean, sd, median, min: sorted[0], max: sorted[n - 1], n_used: n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub converged: usize,
    pub not_converged: usize,
    pub failed: usize,
    pub heywood: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorAggregate {
    pub predictor: PredictorKind,
    /// 1-based.
    pub factor: usize,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: SimulationCondition,
    pub replications: Vec<ReplicationResult>,
    pub counts: Counts,
    /// Predictor-major, then factor.
    pub aggregates: Vec<FactorAggregate>,
    pub determinacy: Vec<Summary>,
}

impl ConditionResult {
    pub fn aggregate(&self, predictor: PredictorKind, factor: usize) -> Option<&Summary> {
        self.aggregates.iter().find(|a| a.predictor == predictor && a.factor == factor).map(|a| &a.summary)
    }

    /// Mean over factors of the per-factor mean reliability.
    pub fn mean_reliability(&self, predictor: PredictorKind) -> f64 {
        let means: Vec<f64> =
            self.aggregates.iter().filter(|a| a.predictor == predictor).map(|a| a.summary.mean).collect();
        means.iter().sum::<f64>() / means.len() as f64
    }
}

fn evaluate(model: &FactorModel, sigma: &CovarianceMatrix) -> Result<[Vec<f64>; 4]> {
    let get = |kind| reliability_for(kind, model, sigma).map(|v: DVector<f64>| v.iter().copied().collect::<Vec<_>>());
    Ok([
        get(PredictorKind::Regression)?,
        get(PredictorKind::Bartlett)?,
        get(PredictorKind::McDonald)?,
        determinacy(model, sigma)?.iter().copied().collect(),
    ])
}

fn clamp_all(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|x| x.clamp(0.0, 1.0)).collect()
}

fn run_population(c: &SimulationCondition, population: &FactorModel) -> Result<ReplicationResult> {
    let sigma = reconstruct_sigma(population)?;
    let [regression, bartlett, mcdonald, det] = evaluate(population, &sigma)?;
    Ok(ReplicationResult {
        replication: 0,
        status: ReplicationStatus::Converged,
        heywood: false,
        iterations: 0,
        regression,
        bartlett,
        mcdonald,
        determinacy: det,
        congruence: vec![1.0; c.q],
        error: None,
    })
}

/// Fits, rotates and aligns one sample; returns the estimated model in
/// population factor order together with the factored matrix.
pub fn estimate_model(
    data: &nalgebra::DMatrix<f64>,
    q: usize,
    oblique: bool,
    population: &FactorModel,
    opts: &RunOptions,
) -> Result<(FactorModel, CovarianceMatrix, EstimateInfo)> {
    let s = match opts.extract_from {
        ExtractInput::Correlation => sample_correlation(data)?,
        ExtractInput::Covariance => sample_covariance(data)?,
    };
    let fit = ml_extract(&s, q, &opts.ml_options())?;
    let (lambda, phi) = if oblique {
        let r = promax(fit.model.lambda(), opts.promax_kappa)?;
        (r.pattern, r.phi)
    } else {
        let r = varimax(fit.model.lambda(), opts.kaiser_normalize);
        (r.loadings, nalgebra::DMatrix::identity(q, q))
    };
    let rotated = FactorModel::new(lambda, phi, fit.model.psi2().clone())?;
    let (aligned, _) = align_to_target(&rotated, population)?;
    let info = EstimateInfo { converged: fit.converged, heywood: fit.heywood_adjusted, iterations: fit.iterations };
    Ok((aligned, s, info))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimateInfo {
    pub converged: bool,
    pub heywood: bool,
    pub iterations: usize,
}

fn run_replication(
    c: &SimulationCondition,
    population: &FactorModel,
    minor: Option<&MinorFactorPerturbation>,
    opts: &RunOptions,
    rep: usize,
) -> ReplicationResult {
    let mut rng = replication_rng(c.master_seed, c.index, rep);
    let data = match draw_sample(population, c.n, minor, &mut rng) {
        Ok(d) => d,
        Err(e) => return ReplicationResult::failed(rep, ReplicationStatus::Failed, 0, &e),
    };
    let oblique = c.factor_corr != 0.0;
    let (aligned, factored, info) = match estimate_model(&data, c.q, oblique, population, opts) {
        Ok(v) => v,
        Err(e @ Error::NoConvergence { iterations }) => {
            return ReplicationResult::failed(rep, ReplicationStatus::NotConverged, iterations, &e)
        }
        Err(e) => return ReplicationResult::failed(rep, ReplicationStatus::Failed, 0, &e),
    };
    if !info.converged {
        let e = Error::NoConvergence { iterations: info.iterations };
        return ReplicationResult::failed(rep, ReplicationStatus::NotConverged, info.iterations, &e);
    }

    let (standardized, shrunk) = aligned.restandardize(opts.psi_floor);
    let outcome = match opts.sigma_source {
        SigmaSource::ModelImplied => reconstruct_sigma(&standardized).and_then(|s| evaluate(&standardized, &s)),
        SigmaSource::Sample => evaluate(&standardized, &factored),
    };
    match outcome {
        Ok([regression, bartlett, mcdonald, det]) => ReplicationResult {
            replication: rep,
            status: ReplicationStatus::Converged,
            heywood: info.heywood || shrunk,
            iterations: info.iterations,
            regression: clamp_all(regression),
            bartlett: clamp_all(bartlett),
            mcdonald: clamp_all(mcdonald),
            determinacy: clamp_all(det),
            congruence: column_congruences(standardized.lambda(), population.lambda()).iter().copied().collect(),
            error: None,
        },
        Err(e) => ReplicationResult::failed(rep, ReplicationStatus::Failed, info.iterations, &e),
    }
}

fn summarize(c: SimulationCondition, replications: Vec<ReplicationResult>) -> ConditionResult {
    let mut counts = Counts::default();
    for r in &replications {
        match r.status {
            ReplicationStatus::Converged => counts.converged += 1,
            ReplicationStatus::NotConverged => counts.not_converged += 1,
            ReplicationStatus::Failed => counts.failed += 1,
        }
        if r.heywood {
            counts.heywood += 1;
        }
    }
    let used: Vec<&ReplicationResult> =
        replications.iter().filter(|r| r.status == ReplicationStatus::Converged).collect();
    let column = |pick: &dyn Fn(&ReplicationResult) -> &[f64], j: usize| -> Vec<f64> {
        used.iter().map(|r| pick(r)[j]).collect()
    };
    let mut aggregates = Vec::with_capacity(3 * c.q);
    for kind in PredictorKind::STANDARD {
        for j in 0..c.q {
            aggregates.push(FactorAggregate {
                predictor: kind,
                factor: j + 1,
                summary: Summary::of(&column(&|r| r.values(kind), j)),
            });
        }
    }
    let determinacy = (0..c.q).map(|j| Summary::of(&column(&|r| &r.determinacy, j))).collect();
    ConditionResult { condition: c, replications, counts, aggregates, determinacy }
}

pub fn run_condition(c: &SimulationCondition) -> Result<ConditionResult> {
    run_condition_with(c, &RunOptions::default())
}

/// Runs every replication of `c`. Replications execute on the current rayon
/// pool; each draws from its own substream, so the result is identical for
/// any thread count.
pub fn run_condition_with(c: &SimulationCondition, opts: &RunOptions) -> Result<ConditionResult> {
    let population = make_population_model(c)?;
    if c.is_population_only() {
        let rep = run_population(c, &population)
            .map_err(|e| Error::InadmissibleCondition { label: c.label(), reason: e.to_string() })?;
        return Ok(summarize(c.clone(), vec![rep]));
    }
    let minor = match &c.model_error {
        Some(settings) => Some(
            minor_factor_perturb(&population, settings, &mut perturbation_rng(c.master_seed, c.index))
                .map_err(|e| Error::InadmissibleCondition { label: c.label(), reason: e.to_string() })?,
        ),
        None => None,
    };
    let replications: Vec<ReplicationResult> = (0..c.replications)
        .into_par_iter()
        .map(|rep| run_replication(c, &population, minor.as_ref(), opts, rep))
        .collect();
    Ok(summarize(c.clone(), replications))
}

/// Runs a list of conditions in order.
pub fn run_conditions(conditions: &[SimulationCondition], opts: &RunOptions) -> Result<Vec<ConditionResult>> {
    conditions.iter().map(|c| run_condition_with(c, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::condition::study1_grid;

    fn sampled(l: f64, sl: f64, r: f64, reps: usize) -> SimulationCondition {
        let mut c = SimulationCondition::population(0, 5, l, sl, r);
        c.n = 500;
        c.replications = reps;
        c.master_seed = 42;
        c
    }

    #[test]
    fn summary_of_single_value() {
        let s = Summary::of(&[0.7]);
        assert_eq!((s.mean, s.sd, s.median, s.min, s.max, s.n_used), (0.7, 0.0, 0.7, 0.7, 0.7, 1));
        let s = Summary::of(&[1.0, 3.0, 2.0, 10.0]);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.mean, 4.0);
    }

    #[test]
    fn clean_population_cells_have_equal_regression_and_bartlett() {
        for c in study1_grid().iter().filter(|c| c.secondary_loading == 0.0 && c.factor_corr == 0.0) {
            let res = run_condition(c).unwrap();
            let rep = &res.replications[0];
            for j in 0..c.q {
                assert!((rep.regression[j] - rep.bartlett[j]).abs() < 1e-10);
                assert!((rep.regression[j] - rep.mcdonald[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cross_loaded_oblique_cell_favours_regression() {
        let c = SimulationCondition::population(0, 5, 0.4, 0.1, 0.3);
        let res = run_condition(&c).unwrap();
        let rep = &res.replications[0];
        for j in 0..6 {
            assert!(rep.regression[j] > rep.bartlett[j] + 1e-6);
            assert!(rep.regression[j] > rep.mcdonald[j] + 1e-6);
        }
    }

    #[test]
    fn population_grid_is_ordered() {
        for c in study1_grid() {
            let rep = run_condition(&c).unwrap().replications.remove(0);
            for j in 0..c.q {
                assert!(rep.regression[j] >= rep.bartlett[j] - 1e-10);
                assert!(rep.regression[j] >= rep.mcdonald[j] - 1e-10);
            }
        }
    }

    #[test]
    fn sampled_condition_is_deterministic_and_counted() {
        let c = sampled(0.6, 0.1, 0.3, 6);
        let a = run_condition(&c).unwrap();
        let b = run_condition(&c).unwrap();
        assert_eq!(a, b);
        let n = &a.counts;
        assert_eq!(n.converged + n.not_converged + n.failed, 6);
        for agg in &a.aggregates {
            let s = agg.summary;
            if s.n_used > 0 {
                assert!(s.min <= s.mean && s.mean <= s.max);
            }
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| run_condition(&c).unwrap());
        assert_eq!(single, a);
    }

    #[test]
    fn sampled_values_are_aligned_reliabilities() {
        let c = sampled(0.7, 0.0, 0.0, 3);
        let res = run_condition(&c).unwrap();
        for rep in res.replications.iter().filter(|r| r.status == ReplicationStatus::Converged) {
            assert!(rep.congruence.iter().all(|&v| v > 0.9), "{:?}", rep.congruence);
            for kind in PredictorKind::STANDARD {
                assert!(rep.values(kind).iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }

    #[test]
    fn alignment_only_relabels_reliabilities() {
        let c = sampled(0.6, 0.1, 0.3, 1);
        let population = make_population_model(&c).unwrap();
        let data = draw_sample(&population, c.n, None, &mut replication_rng(c.master_seed, 0, 0)).unwrap();
        let opts = RunOptions::default();
        let (aligned, ..) = estimate_model(&data, c.q, true, &population, &opts).unwrap();

        let s = sample_correlation(&data).unwrap();
        let fit = ml_extract(&s, c.q, &opts.ml_options()).unwrap();
        let r = promax(fit.model.lambda(), 4).unwrap();
        let unaligned = FactorModel::new(r.pattern, r.phi, fit.model.psi2().clone()).unwrap();

        let sorted = |m: &FactorModel| {
            let (m, _) = m.restandardize(opts.psi_floor);
            let sigma = reconstruct_sigma(&m).unwrap();
            let mut v: Vec<f64> =
                reliability_for(PredictorKind::Regression, &m, &sigma).unwrap().iter().copied().collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let (a, b) = (sorted(&aligned), sorted(&unaligned));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn nonconvergence_is_counted_not_fatal() {
        let c = sampled(0.5, 0.1, 0.3, 3);
        let opts = RunOptions { max_iter: 1, ..RunOptions::default() };
        let res = run_condition_with(&c, &opts).unwrap();
        assert_eq!(res.counts.not_converged, 3);
        assert!(res.aggregates.iter().all(|a| a.summary.n_used == 0));
    }

    #[test]
    fn model_error_condition_runs() {
        let mut c = sampled(0.8, 0.0, 0.0, 2);
        c.model_error = Some(Default::default());
        let res = run_condition(&c).unwrap();
        assert_eq!(res.counts.converged + res.counts.not_converged + res.counts.failed, 2);
    }
}
