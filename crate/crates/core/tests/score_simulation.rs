use fars_core::fixtures::worked_example;
use fars_core::linalg::phi_root;
use fars_core::predictors::{predict_scores, weights_for};
use fars_core::reliability::reliability_for;
use fars_core::simulation::{draw_sample, replication_rng};
use fars_core::{reconstruct_sigma, FactorModel, PredictorKind};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

fn column_variance(m: &DMatrix<f64>, j: usize) -> f64 {
    let n = m.nrows() as f64;
    let mean = m.column(j).sum() / n;
    m.column(j).iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

fn correlation(a: &DMatrix<f64>, b: &DMatrix<f64>, j: usize) -> f64 {
    let n = a.nrows() as f64;
    let (ma, mb) = (a.column(j).sum() / n, b.column(j).sum() / n);
    let mut sab = 0.0;
    for i in 0..a.nrows() {
        sab += (a[(i, j)] - ma) * (b[(i, j)] - mb);
    }
    sab / (n - 1.0) / (column_variance(a, j) * column_variance(b, j)).sqrt()
}

/// Two item sets measuring the same factor scores with independent errors.
fn parallel_forms<R: Rng>(m: &FactorModel, n: usize, rng: &mut R) -> (DMatrix<f64>, DMatrix<f64>) {
    let (p, q) = (m.n_items(), m.n_factors());
    let root = phi_root(m.phi()).unwrap();
    let z = DMatrix::from_fn(n, q, |_, _| rng.sample::<f64, _>(StandardNormal));
    let common = z * root.transpose() * m.lambda().transpose();
    let psi = m.psi2().map(f64::sqrt);
    let mut form = || DMatrix::from_fn(n, p, |i, k| common[(i, k)] + psi[k] * rng.sample::<f64, _>(StandardNormal));
    let x1 = form();
    let x2 = form();
    (x1, x2)
}

#[test]
fn regression_score_variances_match_population() {
    let m = worked_example();
    let s = reconstruct_sigma(&m).unwrap();
    let w = weights_for(PredictorKind::Regression, &m, &s).unwrap();
    let want = m.phi() * m.lambda().transpose() * s.matrix().clone().try_inverse().unwrap() * m.lambda() * m.phi();
    let n = 1000;
    let x = draw_sample(&m, n, None, &mut replication_rng(5, 0, 0)).unwrap();
    let scores = predict_scores(&w, &x).unwrap();
    for j in 0..3 {
        let v = want[(j, j)];
        let se = v * (2.0 / (n as f64 - 1.0)).sqrt();
        let got = column_variance(&scores, j);
        assert!((got - v).abs() < 3.0 * se, "factor {j}: {got} vs {v}");
    }
}

#[test]
fn parallel_form_correlations_match_closed_forms() {
    let m = worked_example();
    let s = reconstruct_sigma(&m).unwrap();
    let n = 20_000;
    let (x1, x2) = parallel_forms(&m, n, &mut replication_rng(9, 0, 0));
    for kind in PredictorKind::STANDARD {
        let w = weights_for(kind, &m, &s).unwrap();
        let (f1, f2) = (predict_scores(&w, &x1).unwrap(), predict_scores(&w, &x2).unwrap());
        let rel = reliability_for(kind, &m, &s).unwrap();
        for j in 0..3 {
            let se = (1.0 - rel[j] * rel[j]) / (n as f64).sqrt();
            let got = correlation(&f1, &f2, j);
            assert!((got - rel[j]).abs() < 3.5 * se, "{kind:?} factor {j}: {got} vs {}", rel[j]);
        }
    }
}
