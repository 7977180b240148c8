use fars_core::linalg::max_abs;
use fars_core::predictors::{bartlett_weights, mcdonald_weights, weights_for};
use fars_core::reliability::{
    determinacy, joreskog_sides, kr_parallel, random_model, reliability_bartlett, reliability_for, reliability_generic,
    reliability_mcdonald, reliability_regression, theorem_report, FuzzConfig,
};
use fars_core::{fixtures, reconstruct_sigma, FactorModel, PredictorKind, PredictorWeights};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODELS: usize = 1000;
const SEED: u64 = 20_240_601;

fn fuzz_models() -> Vec<FactorModel> {
    let cfg = FuzzConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..MODELS).map(|_| random_model(&mut rng, &cfg)).collect()
}

fn is_identity(phi: &DMatrix<f64>) -> bool {
    max_abs(&(phi - DMatrix::<f64>::identity(phi.nrows(), phi.ncols()))) < 1e-10
}

fn off_diagonal_mass(m: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                s += m[(i, j)].abs();
            }
        }
    }
    s
}

#[test]
fn regression_dominates_bartlett_everywhere() {
    let mut checked = 0;
    for m in fuzz_models() {
        let s = reconstruct_sigma(&m).unwrap();
        let r = reliability_regression(&m, &s).unwrap();
        let b = reliability_bartlett(&m).unwrap();
        for j in 0..m.n_factors() {
            assert!(r[j] >= b[j] - 1e-10, "R_tr {} < R_tb {}", r[j], b[j]);
            checked += 1;
        }
    }
    assert!(checked > MODELS);
}

#[test]
fn regression_dominates_mcdonald_when_orthogonal() {
    for m in fuzz_models().into_iter().filter(|m| is_identity(m.phi())) {
        let s = reconstruct_sigma(&m).unwrap();
        let r = reliability_regression(&m, &s).unwrap();
        let mc = reliability_mcdonald(&m, &s).unwrap();
        assert!((&r - &mc).min() >= -1e-10, "R_tr {r} < R_tm {mc}");
    }
}

/// Higher correlation with the factor does not carry over to higher
/// test-retest reliability once factors correlate. Some oblique models have
/// `sum(R_tm) > sum(R_tr)`, and that sum does not depend on the root `N`, so no
/// choice of root restores the elementwise ordering.
#[test]
fn mcdonald_ordering_has_oblique_counterexamples() {
    let mut violations = 0;
    let mut root_free = 0;
    for m in fuzz_models() {
        let s = reconstruct_sigma(&m).unwrap();
        let r = reliability_regression(&m, &s).unwrap();
        let mc = reliability_mcdonald(&m, &s).unwrap();
        if (&r - &mc).min() < -1e-10 {
            assert!(!is_identity(m.phi()));
            violations += 1;
            if r.sum() < mc.sum() - 1e-10 {
                root_free += 1;
            }
        }
    }
    assert!(violations > 0 && root_free > 0, "{violations} {root_free}");
}

#[test]
fn equalities_under_orthogonal_diagonal_premises() {
    let mut applicable = 0;
    for m in fuzz_models() {
        if !is_identity(m.phi()) {
            continue;
        }
        let s = reconstruct_sigma(&m).unwrap();
        let (k, _) = joreskog_sides(&m, &s).unwrap();
        if off_diagonal_mass(&k) >= 1e-8 {
            continue;
        }
        applicable += 1;
        let r = reliability_regression(&m, &s).unwrap();
        assert!(max_abs(&(&r - reliability_bartlett(&m).unwrap())) < 1e-8);
        assert!(max_abs(&(&r - reliability_mcdonald(&m, &s).unwrap())) < 1e-8);
        let d = determinacy(&m, &s).unwrap();
        assert!(max_abs(&(&r - d.component_mul(&d))) < 1e-8);
    }
    assert!(applicable > 50, "only {applicable} models met the premises");
}

#[test]
fn squared_determinacy_bounds_regression_reliability_when_orthogonal() {
    let mut applicable = 0;
    for m in fuzz_models().into_iter().filter(|m| is_identity(m.phi())) {
        applicable += 1;
        let s = reconstruct_sigma(&m).unwrap();
        let r = reliability_regression(&m, &s).unwrap();
        let d = determinacy(&m, &s).unwrap();
        assert!((r - d.component_mul(&d)).min() >= -1e-10);
    }
    assert!(applicable > 200);
}

#[test]
fn joreskog_identity_holds() {
    for m in fuzz_models() {
        let s = reconstruct_sigma(&m).unwrap();
        let (lhs, rhs) = joreskog_sides(&m, &s).unwrap();
        assert!(max_abs(&(lhs - rhs)) < 1e-9);
    }
}

#[test]
fn closed_forms_equal_generic_ratio() {
    for m in fuzz_models().into_iter().step_by(4) {
        let s = reconstruct_sigma(&m).unwrap();
        for kind in PredictorKind::STANDARD {
            let w = weights_for(kind, &m, &s).unwrap();
            let generic = reliability_generic(&w, &m, &s).unwrap();
            let closed = reliability_for(kind, &m, &s).unwrap();
            assert!(max_abs(&(generic - closed)) < 1e-10, "{kind:?}");
        }
    }
}

#[test]
fn weight_normalizations_hold() {
    for m in fuzz_models().into_iter().step_by(5) {
        let s = reconstruct_sigma(&m).unwrap();
        let q = m.n_factors();
        let bb = bartlett_weights(&m).unwrap();
        assert!(max_abs(&(m.lambda().transpose() * bb.matrix() - DMatrix::<f64>::identity(q, q))) < 1e-10);
        let bm = mcdonald_weights(&m, &s).unwrap();
        let cov = bm.matrix().transpose() * s.matrix() * bm.matrix();
        assert!(max_abs(&(cov - DMatrix::<f64>::identity(q, q))) < 1e-10);
    }
}

#[test]
fn theorem_report_agrees_with_direct_checks() {
    for m in fuzz_models().into_iter().step_by(10) {
        let s = reconstruct_sigma(&m).unwrap();
        let f = theorem_report(&m, &s);
        let mcdonald_holds =
            (reliability_regression(&m, &s).unwrap() - reliability_mcdonald(&m, &s).unwrap()).min() >= -1e-10;
        for (name, c) in f.conclusions() {
            if name == "ordering_mcdonald" {
                assert_eq!(c.holds, mcdonald_holds);
            } else {
                assert!(c.passed(), "{name}: {c:?}");
            }
        }
        assert_eq!(f.orthogonal.holds, is_identity(m.phi()));
    }
}

#[test]
fn unit_weights_on_parallel_items_give_kuder_richardson() {
    for p in [2usize, 5, 10, 30] {
        for rho in [0.1f64, 0.3, 0.5, 0.8] {
            let m = fixtures::one_factor(p, rho.sqrt());
            let s = reconstruct_sigma(&m).unwrap();
            let w = PredictorWeights::custom(DMatrix::from_element(p, 1, 1.0)).unwrap();
            let r = reliability_generic(&w, &m, &s).unwrap()[0];
            let kr = kr_parallel(p, rho).unwrap();
            let by_hand = p as f64 * rho / (1.0 + (p as f64 - 1.0) * rho);
            assert!((r - kr).abs() < 1e-12, "p={p} rho={rho}: {r} vs {kr}");
            assert!((kr - by_hand).abs() < 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ordering_survives_arbitrary_seeds(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng, &FuzzConfig::default());
        let s = reconstruct_sigma(&m).unwrap();
        let r = reliability_regression(&m, &s).unwrap();
        let b = reliability_bartlett(&m).unwrap();
        let mc = reliability_mcdonald(&m, &s).unwrap();
        prop_assert!((&r - &b).min() >= -1e-10);
        if m.phi().nrows() == 1 || is_identity(m.phi()) {
            prop_assert!((&r - &mc).min() >= -1e-10);
        }
        let unit = DVector::from_element(r.len(), 1.0);
        prop_assert!((unit - &r).min() >= -1e-12);
    }
}
