//! Maximum-likelihood exploratory factor extraction.
//!
//! The discrepancy `F = log|Sigma_hat| + tr(S Sigma_hat^-1) - log|S| - p` is
//! profiled over the uniquenesses: for fixed `Psi`, the optimal loadings come
//! from the leading eigenpairs of `Psi^-1/2 S Psi^-1/2`, and
//!
//! ```text
//! F(Psi) = sum_{k > q} (e_k - ln e_k) - (p - q)
//! ```
//!
//! where `e_k` are the trailing eigenvalues. `F` is minimized with BFGS over
//! `ln psi^2`, projected onto the floor `psi^2 >= psi_floor`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{CovarianceMatrix, FactorModel};

#[derive(Debug, Clone, PartialEq)]
pub struct MlOptions {
    pub max_iter: usize,
    /// Convergence requires the largest uniqueness change of the last step below this.
    pub tol_change: f64,
    /// ...and the largest projected gradient entry (w.r.t. `ln psi^2`) below this.
    pub tol_grad: f64,
    /// Heywood guard: uniquenesses are never allowed below this.
    pub psi_floor: f64,
    /// Starting uniquenesses; `1 - SMC` scaled by the item variance when `None`.
    pub start: Option<DVector<f64>>,
}

impl Default for MlOptions {
    fn default() -> Self {
        Self { max_iter: 500, tol_change: 1e-6, tol_grad: 1e-5, psi_floor: 0.005, start: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    /// Unrotated loadings with `Phi = I` and the estimated uniquenesses.
    pub model: FactorModel,
    pub converged: bool,
    pub iterations: usize,
    /// Some uniqueness ended on the floor.
    pub heywood_adjusted: bool,
    /// Some factor has (numerically) zero loadings.
    pub degenerate: bool,
    pub discrepancy: f64,
    pub gradient_norm: f64,
}

/// Degrees of freedom `((p - q)^2 - (p + q)) / 2`.
pub fn degrees_of_freedom(p: usize, q: usize) -> i64 {
    let (p, q) = (p as i64, q as i64);
    ((p - q) * (p - q) - (p + q)) / 2
}

struct Profile {
    value: f64,
    /// dF / d ln(psi^2)
    grad: DVector<f64>,
    loadings: DMatrix<f64>,
}

fn evaluate(s: &DMatrix<f64>, psi2: &DVector<f64>, q: usize) -> Profile {
    let p = s.nrows();
    let inv_sqrt = psi2.map(|v| 1.0 / v.sqrt());
    let scaled = DMatrix::from_fn(p, p, |i, j| s[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    let eig = SymmetricEigen::new(scaled);

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let value = order[q..]
        .iter()
        .map(|&k| {
            let e = eig.eigenvalues[k];
            e - e.ln()
        })
        .sum::<f64>()
        - (p - q) as f64;

    let mut loadings = DMatrix::zeros(p, q);
    for (c, &k) in order[..q].iter().enumerate() {
        let scale = (eig.eigenvalues[k] - 1.0).max(0.0).sqrt();
        let v = eig.eigenvectors.column(k);
        // canonical sign: positive column sum
        let sign = if v.sum() < 0.0 { -1.0 } else { 1.0 };
        for i in 0..p {
            loadings[(i, c)] = sign * scale * v[i] * psi2[i].sqrt();
        }
    }

    let grad = DVector::from_fn(p, |j, _| {
        let fitted = loadings.row(j).norm_squared() + psi2[j];
        (fitted - s[(j, j)]) / psi2[j]
    });
    Profile { value, grad, loadings }
}

fn default_start(s: &DMatrix<f64>) -> Result<DVector<f64>> {
    let inv = linalg::spd_inverse(s).ok_or(Error::NotPositiveDefinite { min_eigenvalue: f64::NAN })?;
    Ok(DVector::from_fn(s.nrows(), |j, _| 1.0 / inv[(j, j)]))
}

fn projected(grad: &DVector<f64>, theta: &DVector<f64>, lower: f64) -> DVector<f64> {
    DVector::from_fn(grad.len(), |j, _| if theta[j] <= lower + 1e-12 && grad[j] > 0.0 { 0.0 } else { grad[j] })
}

/// Extracts `q` factors from `s` by maximum likelihood.
pub fn ml_extract(s: &CovarianceMatrix, q: usize, opts: &MlOptions) -> Result<ExtractionResult> {
    let sm = s.matrix();
    let p = sm.nrows();
    if q == 0 || q >= p || degrees_of_freedom(p, q) < 0 {
        return Err(Error::TooManyFactors { p, q });
    }
    let lower = opts.psi_floor.ln();
    let start = match &opts.start {
        Some(v) if v.len() == p => v.clone(),
        Some(v) => return Err(Error::DimensionMismatch(format!("start has {} entries, expected {p}", v.len()))),
        None => default_start(sm)?,
    };
    let mut theta = start.map(|v| v.max(opts.psi_floor).ln());
    let mut psi2 = theta.map(f64::exp);
    let mut cur = evaluate(sm, &psi2, q);
    let mut h = DMatrix::<f64>::identity(p, p);
    let mut converged = false;
    let mut iterations = 0;
    let mut grad_norm = linalg::max_abs(&projected(&cur.grad, &theta, lower));

    if grad_norm < opts.tol_grad * 1e-3 {
        converged = true;
    }

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let active: Vec<bool> = (0..p).map(|j| theta[j] <= lower + 1e-12 && cur.grad[j] > 0.0).collect();
        let mut d = -(&h * &cur.grad);
        for j in 0..p {
            if active[j] {
                d[j] = 0.0;
            }
        }
        let pg = projected(&cur.grad, &theta, lower);
        if pg.dot(&d) >= 0.0 {
            h = DMatrix::identity(p, p);
            d = -pg.clone();
        }
        let step_max = linalg::max_abs(&d);
        if step_max > 1.0 {
            d /= step_max;
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-12 {
            let trial = (&theta + &d * alpha).map(|t| t.max(lower));
            let trial_psi = trial.map(f64::exp);
            let next = evaluate(sm, &trial_psi, q);
            let decrease = cur.grad.dot(&(&trial - &theta));
            if next.value.is_finite() && next.value <= cur.value + 1e-4 * decrease {
                accepted = Some((trial, trial_psi, next));
                break;
            }
            alpha *= 0.5;
        }

        let Some((new_theta, new_psi, next)) = accepted else {
            // no further decrease is possible at working precision
            break;
        };

        let step = &new_theta - &theta;
        let y = &next.grad - &cur.grad;
        let sy = step.dot(&y);
        if sy > 1e-12 {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            h += (&step * step.transpose()) * (rho * (1.0 + rho * yhy))
                - (&hy * step.transpose() + &step * hy.transpose()) * rho;
        }

        let change = linalg::max_abs(&(&new_psi - &psi2));
        theta = new_theta;
        psi2 = new_psi;
        cur = next;
        grad_norm = linalg::max_abs(&projected(&cur.grad, &theta, lower));
        if change < opts.tol_change && grad_norm < opts.tol_grad {
            converged = true;
        }
    }

    if !converged && iterations >= opts.max_iter {
        return Err(Error::NoConvergence { iterations });
    }
    if !converged && grad_norm < opts.tol_grad {
        converged = true;
    }

    let heywood_adjusted = theta.iter().any(|&t| t <= lower + 1e-9);
    let degenerate = (0..q).any(|c| cur.loadings.column(c).norm() < 1e-6);
    let model = FactorModel::new(cur.loadings, DMatrix::identity(q, q), psi2)?;
    Ok(ExtractionResult {
        model,
        converged,
        iterations,
        heywood_adjusted,
        degenerate,
        discrepancy: cur.value.max(0.0),
        gradient_norm: grad_norm,
    })
}
