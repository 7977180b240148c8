//! Matching estimated factors to a target by Tucker congruence.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::FactorModel;

/// Cosine between two loading columns; zero when either is a zero vector.
pub fn tucker_congruence(a: &[f64], b: &[f64]) -> f64 {
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    if aa == 0.0 || bb == 0.0 {
        return 0.0;
    }
    ab / (aa * bb).sqrt()
}

/// `C[(j, k)]` is the congruence of estimated column `j` with target column `k`.
pub fn congruence_matrix(estimated: &DMatrix<f64>, target: &DMatrix<f64>) -> DMatrix<f64> {
    let q_est = estimated.ncols();
    let q_tgt = target.ncols();
    DMatrix::from_fn(q_est, q_tgt, |j, k| {
        tucker_congruence(estimated.column(j).as_slice(), target.column(k).as_slice())
    })
}

/// Per-column congruence between two equally shaped loading matrices.
pub fn column_congruences(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(a.ncols(), |j, _| tucker_congruence(a.column(j).as_slice(), b.column(j).as_slice()))
}

/// Target position `k` is filled by estimated column `source[k]` multiplied by `sign[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub source: Vec<usize>,
    pub sign: Vec<f64>,
}

impl Alignment {
    pub fn identity(q: usize) -> Self {
        Self { source: (0..q).collect(), sign: vec![1.0; q] }
    }

    pub fn is_identity(&self) -> bool {
        self.source.iter().enumerate().all(|(k, &j)| j == k) && self.sign.iter().all(|&s| s > 0.0)
    }

    pub fn apply_columns(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(m.nrows(), self.source.len(), |i, k| self.sign[k] * m[(i, self.source[k])])
    }

    pub fn apply_phi(&self, phi: &DMatrix<f64>) -> DMatrix<f64> {
        let q = self.source.len();
        DMatrix::from_fn(q, q, |k, l| self.sign[k] * self.sign[l] * phi[(self.source[k], self.source[l])])
    }

    /// Reorders a per-factor vector computed on the unaligned model.
    pub fn apply_vector(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.source.len(), |k, _| v[self.source[k]])
    }
}

/// Greedy assignment on absolute congruences: repeatedly take the largest
/// remaining `|C[(j, k)]|`, ties going to the lowest estimated then target index.
pub fn greedy_alignment(congruence: &DMatrix<f64>) -> Alignment {
    let q = congruence.ncols();
    let mut source = vec![usize::MAX; q];
    let mut sign = vec![1.0; q];
    let mut used_est = vec![false; congruence.nrows()];
    for _ in 0..q {
        let mut best: Option<(f64, usize, usize)> = None;
        for j in 0..congruence.nrows() {
            if used_est[j] {
                continue;
            }
            for k in 0..q {
                if source[k] != usize::MAX {
                    continue;
                }
                let v = congruence[(j, k)].abs();
                if best.is_none_or(|(b, _, _)| v > b) {
                    best = Some((v, j, k));
                }
            }
        }
        let (_, j, k) = best.expect("square congruence matrix");
        used_est[j] = true;
        source[k] = j;
        sign[k] = if congruence[(j, k)] < 0.0 { -1.0 } else { 1.0 };
    }
    Alignment { source, sign }
}

/// Permutes and reflects the estimated factors to match `target`.
pub fn align_to_target(estimated: &FactorModel, target: &FactorModel) -> Result<(FactorModel, Alignment)> {
    if estimated.lambda().shape() != target.lambda().shape() {
        return Err(Error::DimensionMismatch(format!(
            "estimated loadings are {:?}, target loadings are {:?}",
            estimated.lambda().shape(),
            target.lambda().shape()
        )));
    }
    let c = congruence_matrix(estimated.lambda(), target.lambda());
    let alignment = greedy_alignment(&c);
    let model = FactorModel::new(
        alignment.apply_columns(estimated.lambda()),
        alignment.apply_phi(estimated.phi()),
        estimated.psi2().clone(),
    )?;
    Ok((model, alignment))
}
