use nalgebra::DVector;
use serde::Serialize;

use super::{
    determinacy, reliability_bartlett, reliability_mcdonald, reliability_regression, theorem_report, TheoremFlags,
};
use crate::error::Result;
use crate::model::{CovarianceMatrix, FactorModel};

pub const CSV_HEADER: &str = "factor,r_tr,r_tb,r_tm,determinacy,determinacy_sq";

/// Per-factor reliabilities of the three predictors, determinacy and the
/// theorem checks for one model. Values are kept unclamped; the emitters
/// clamp to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityReport {
    pub regression: DVector<f64>,
    pub bartlett: DVector<f64>,
    pub mcdonald: DVector<f64>,
    pub determinacy: DVector<f64>,
    pub theorem_flags: TheoremFlags,
}

/// One emitted row; all values clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorRow {
    pub factor: usize,
    pub r_tr: f64,
    pub r_tb: f64,
    pub r_tm: f64,
    pub determinacy: f64,
    pub determinacy_sq: f64,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    factors: Vec<FactorRow>,
    theorem_flags: &'a TheoremFlags,
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

pub fn reliability_report(model: &FactorModel, sigma: &CovarianceMatrix) -> Result<ReliabilityReport> {
    Ok(ReliabilityReport {
        regression: reliability_regression(model, sigma)?,
        bartlett: reliability_bartlett(model)?,
        mcdonald: reliability_mcdonald(model, sigma)?,
        determinacy: determinacy(model, sigma)?,
        theorem_flags: theorem_report(model, sigma),
    })
}

impl ReliabilityReport {
    pub fn n_factors(&self) -> usize {
        self.regression.len()
    }

    /// Rows with 1-based factor numbers.
    pub fn rows(&self) -> Vec<FactorRow> {
        (0..self.n_factors())
            .map(|i| {
                let d = clamp01(self.determinacy[i]);
                FactorRow {
                    factor: i + 1,
                    r_tr: clamp01(self.regression[i]),
                    r_tb: clamp01(self.bartlett[i]),
                    r_tm: clamp01(self.mcdonald[i]),
                    determinacy: d,
                    determinacy_sq: d * d,
                }
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in self.rows() {
            out.push_str(&format!(
                "{},{:.12},{:.12},{:.12},{:.12},{:.12}\n",
                r.factor, r.r_tr, r.r_tb, r.r_tm, r.determinacy, r.determinacy_sq
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = JsonReport { factors: self.rows(), theorem_flags: &self.theorem_flags };
        serde_json::to_string_pretty(&doc).expect("report serializes")
    }

    /// Fixed-width table rounded to three decimals.
    pub fn to_table(&self) -> String {
        let mut out =
            format!("{:>6} {:>8} {:>8} {:>8} {:>8} {:>8}\n", "factor", "R_tr", "R_tb", "R_tm", "det", "det^2");
        for r in self.rows() {
            out.push_str(&format!(
                "{:>6} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3}\n",
                r.factor, r.r_tr, r.r_tb, r.r_tm, r.determinacy, r.determinacy_sq
            ));
        }
        out
    }
}
