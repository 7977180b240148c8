//! Seeded multivariate-normal data under a factor model, optionally with
//! minor-factor model error.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{CovarianceKind, CovarianceMatrix, FactorModel, UNIT_DIAGONAL_TOL};

use super::condition::MinorFactorSettings;

const PERTURBATION_STREAM: u64 = 0xFFFF_FFFF;

/// Generator for replication `rep` of condition `condition`. Every
/// (condition, replication) pair gets its own ChaCha stream under the master
/// seed, so results do not depend on scheduling.
pub fn replication_rng(master_seed: u64, condition: usize, rep: usize) -> ChaCha20Rng {
    assert!((rep as u64) < PERTURBATION_STREAM, "replication index out of range");
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(((condition as u64) << 32) | rep as u64);
    rng
}

/// Generator used to draw the fixed minor-factor loadings of a condition.
pub fn perturbation_rng(master_seed: u64, condition: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(((condition as u64) << 32) | PERTURBATION_STREAM);
    rng
}

fn standard_normals<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// A population model with minor factors: `Sigma* = L Phi L' + W W' + Psi_r^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorFactorPerturbation {
    /// `p x m` minor loadings; each row has squared norm `pi_minor`.
    pub minor_loadings: DMatrix<f64>,
    pub psi2_reduced: DVector<f64>,
    pub sigma: CovarianceMatrix,
}

/// Moves `pi_minor` of every item's unique variance onto `m` minor factors.
///
/// Raw minor loadings are normal with variance `(1 - decay)^k` for factor `k`,
/// then each row is rescaled to squared norm exactly `pi_minor`, so the
/// diagonal of `Sigma*` stays at one.
pub fn minor_factor_perturb<R: Rng + ?Sized>(
    model: &FactorModel,
    settings: &MinorFactorSettings,
    rng: &mut R,
) -> Result<MinorFactorPerturbation> {
    let MinorFactorSettings { m, pi_minor, decay } = *settings;
    let min_psi2 = model.psi2().min();
    if m == 0 {
        return Err(Error::InadmissiblePerturbation("at least one minor factor is required".into()));
    }
    if !(0.0..1.0).contains(&decay) {
        return Err(Error::InadmissiblePerturbation(format!("decay {decay} outside [0, 1)")));
    }
    if !(pi_minor >= 0.0 && pi_minor < min_psi2) {
        return Err(Error::InadmissiblePerturbation(format!("pi_minor {pi_minor} must lie in [0, {min_psi2:.6})")));
    }

    let p = model.n_items();
    let raw = standard_normals(rng, p, m);
    let tapers: Vec<f64> = (0..m).map(|k| (1.0 - decay).powi(k as i32).sqrt()).collect();
    let mut w = DMatrix::from_fn(p, m, |i, k| raw[(i, k)] * tapers[k]);
    for i in 0..p {
        let norm2 = w.row(i).norm_squared();
        let s = if pi_minor == 0.0 { 0.0 } else { (pi_minor / norm2).sqrt() };
        w.row_mut(i).scale_mut(s);
    }

    let psi2_reduced = model.psi2().map(|v| v - pi_minor);
    let mut sigma = model.common_covariance() + &w * w.transpose();
    for i in 0..p {
        sigma[(i, i)] += psi2_reduced[i];
        if (sigma[(i, i)] - 1.0).abs() < UNIT_DIAGONAL_TOL {
            sigma[(i, i)] = 1.0;
        }
    }
    let sigma = linalg::symmetrize(&sigma);
    let min_eigenvalue = linalg::min_eigenvalue(&sigma)?;
    if min_eigenvalue <= linalg::EIGEN_CLAMP {
        return Err(Error::NonPositiveDefinite { min_eigenvalue });
    }
    let sigma = CovarianceMatrix::new(sigma, CovarianceKind::Population)?;
    Ok(MinorFactorPerturbation { minor_loadings: w, psi2_reduced, sigma })
}

/// `n` draws of `x = L N z + W g + psi e` with `N N' = Phi`.
///
/// The common scores `z` are drawn first, then the unique parts `e`, then
/// (if present) the minor factor scores `g`. A clean and a perturbed draw from
/// the same generator state therefore share their common and unique parts.
pub fn draw_sample<R: Rng + ?Sized>(
    model: &FactorModel,
    n: usize,
    minor: Option<&MinorFactorPerturbation>,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let (p, q) = (model.n_items(), model.n_factors());
    let root = linalg::phi_root(model.phi())?;
    let z = standard_normals(rng, n, q);
    let e = standard_normals(rng, n, p);

    let loadings = model.lambda() * &root;
    let mut x = z * loadings.transpose();
    let psi = match minor {
        Some(mf) => mf.psi2_reduced.map(f64::sqrt),
        None => model.psi2().map(f64::sqrt),
    };
    for j in 0..p {
        x.column_mut(j).axpy(psi[j], &e.column(j), 1.0);
    }
    if let Some(mf) = minor {
        if mf.minor_loadings.nrows() != p {
            return Err(Error::DimensionMismatch(format!(
                "minor loadings have {} rows, model has {p} items",
                mf.minor_loadings.nrows()
            )));
        }
        let g = standard_normals(rng, n, mf.minor_loadings.ncols());
        x += g * mf.minor_loadings.transpose();
    }
    Ok(x)
}
