use serde::Serialize;

use super::run::ConditionResult;
use crate::predictors::PredictorKind;

pub const SUMMARY_CSV_HEADER: &str = "condition,q,p_per_q,p,l,sl,r,n,model_error,predictor,factor,\
mean,sd,median,min,max,n_used,n_nonconverged,n_heywood,n_failed";

/// One row of the grid summary: a condition, a predictor and a factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub condition: usize,
    pub q: usize,
    pub p_per_q: usize,
    pub p: usize,
    pub l: f64,
    pub sl: f64,
    pub r: f64,
    pub n: usize,
    pub model_error: bool,
    pub predictor: PredictorKind,
    pub factor: usize,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub n_used: usize,
    pub n_nonconverged: usize,
    pub n_heywood: usize,
    pub n_failed: usize,
}

fn predictor_rank(kind: PredictorKind) -> usize {
    PredictorKind::STANDARD.iter().position(|&k| k == kind).unwrap_or(usize::MAX)
}

/// Flattens condition results into summary rows ordered by condition index,
/// then predictor, then factor, whatever the input order.
pub fn aggregate_results(results: &[ConditionResult]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = results
        .iter()
        .flat_map(|res| {
            let c = &res.condition;
            res.aggregates.iter().map(move |a| SummaryRow {
                condition: c.index,
                q: c.q,
                p_per_q: c.loads_per_factor,
                p: c.p(),
                l: c.main_loading,
                sl: c.secondary_loading,
                r: c.factor_corr,
                n: c.n,
                model_error: c.model_error.is_some(),
                predictor: a.predictor,
                factor: a.factor,
                mean: a.summary.mean,
                sd: a.summary.sd,
                median: a.summary.median,
                min: a.summary.min,
                max: a.summary.max,
                n_used: a.summary.n_used,
                n_nonconverged: res.counts.not_converged,
                n_heywood: res.counts.heywood,
                n_failed: res.counts.failed,
            })
        })
        .collect();
    rows.sort_by_key(|r| (r.condition, r.model_error, predictor_rank(r.predictor), r.factor));
    rows
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.2},{:.2},{:.2},{},{},{},{},{:.10},{:.10},{:.10},{:.10},{:.10},{},{},{},{}\n",
            r.condition,
            r.q,
            r.p_per_q,
            r.p,
            r.l,
            r.sl,
            r.r,
            r.n,
            r.model_error,
            r.predictor.as_str(),
            r.factor,
            r.mean,
            r.sd,
            r.median,
            r.min,
            r.max,
            r.n_used,
            r.n_nonconverged,
            r.n_heywood,
            r.n_failed
        ));
    }
    out
}
