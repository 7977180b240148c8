//! Seeded random factor models for property checks.

use nalgebra::DMatrix;
use rand::Rng;

use crate::model::FactorModel;

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub factor_counts: Vec<usize>,
    pub items_per_factor: (usize, usize),
    pub main_loading: (f64, f64),
    pub max_cross_loading: f64,
    /// Upper bound on item communality; loadings are shrunk row-wise to respect it.
    pub max_communality: f64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            factor_counts: vec![1, 2, 3, 6],
            items_per_factor: (3, 8),
            main_loading: (0.3, 0.85),
            max_cross_loading: 0.25,
            max_communality: 0.9,
        }
    }
}

/// Draws a valid standardized model.
///
/// A quarter of the draws are orthogonal perfect simple structure, a quarter
/// orthogonal with cross-loadings, the rest oblique with cross-loadings.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, cfg: &FuzzConfig) -> FactorModel {
    let q = cfg.factor_counts[rng.random_range(0..cfg.factor_counts.len())];
    let k = rng.random_range(cfg.items_per_factor.0..=cfg.items_per_factor.1);
    let p = q * k;
    let shape = rng.random_range(0..4u8);
    let simple = shape == 0;
    let orthogonal = shape <= 1;

    let mut lambda = DMatrix::zeros(p, q);
    for i in 0..p {
        for j in 0..q {
            lambda[(i, j)] = if i / k == j {
                rng.random_range(cfg.main_loading.0..cfg.main_loading.1)
            } else if !simple && rng.random_bool(0.5) {
                rng.random_range(-cfg.max_cross_loading..cfg.max_cross_loading)
            } else {
                0.0
            };
        }
    }

    let phi = if orthogonal || q == 1 {
        DMatrix::identity(q, q)
    } else {
        let a = DMatrix::from_fn(q, q, |_, _| rng.random_range(-1.0..1.0));
        let c = &a * a.transpose() + DMatrix::identity(q, q) * (0.5 * q as f64);
        let d = c.diagonal().map(|v| 1.0 / v.sqrt());
        let mut phi = DMatrix::from_fn(q, q, |i, j| c[(i, j)] * d[i] * d[j]);
        for i in 0..q {
            phi[(i, i)] = 1.0;
        }
        phi
    };

    let lp = &lambda * &phi;
    for i in 0..p {
        let h = lp.row(i).dot(&lambda.row(i));
        if h > cfg.max_communality {
            let s = (cfg.max_communality / h).sqrt();
            lambda.row_mut(i).scale_mut(s);
        }
    }
    FactorModel::standardized(lambda, phi).expect("fuzz model dimensions")
}
