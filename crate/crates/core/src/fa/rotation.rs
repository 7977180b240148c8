//! Varimax (pairwise planar rotations) and Promax rotation.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;

const MAX_SWEEPS: usize = 1000;
const ANGLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalRotation {
    /// `lambda * rotation`
    pub loadings: DMatrix<f64>,
    pub rotation: DMatrix<f64>,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObliqueRotation {
    /// `lambda * rotation`
    pub pattern: DMatrix<f64>,
    pub phi: DMatrix<f64>,
    pub rotation: DMatrix<f64>,
}

/// Raw varimax criterion: sum over columns of the variance of squared loadings.
pub fn varimax_criterion(lambda: &DMatrix<f64>) -> f64 {
    let p = lambda.nrows() as f64;
    lambda
        .column_iter()
        .map(|c| {
            let sq = c.map(|v| v * v);
            let mean = sq.sum() / p;
            sq.map(|v| v * v).sum() / p - mean * mean
        })
        .sum()
}

fn row_norms(lambda: &DMatrix<f64>) -> Vec<f64> {
    lambda
        .row_iter()
        .map(|r| {
            let n = r.norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect()
}

fn rotate_pair(m: &mut DMatrix<f64>, j: usize, k: usize, cos: f64, sin: f64) {
    for i in 0..m.nrows() {
        let x = m[(i, j)];
        let y = m[(i, k)];
        m[(i, j)] = x * cos + y * sin;
        m[(i, k)] = -x * sin + y * cos;
    }
}

/// Varimax rotation. With `kaiser_normalize`, rows are scaled to unit length
/// before rotating and scaled back afterwards.
///
/// Sweeps over all column pairs until no planar rotation angle exceeds 1e-10.
pub fn varimax(lambda: &DMatrix<f64>, kaiser_normalize: bool) -> OrthogonalRotation {
    let (p, q) = lambda.shape();
    let mut rotation = DMatrix::identity(q, q);
    if q < 2 {
        return OrthogonalRotation { loadings: lambda.clone(), rotation, sweeps: 0 };
    }
    let norms = if kaiser_normalize { row_norms(lambda) } else { vec![1.0; p] };
    let mut work = DMatrix::from_fn(p, q, |i, j| lambda[(i, j)] / norms[i]);
    let pf = p as f64;

    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut largest = 0.0_f64;
        for j in 0..q {
            for k in (j + 1)..q {
                let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
                for i in 0..p {
                    let x = work[(i, j)];
                    let y = work[(i, k)];
                    let u = x * x - y * y;
                    let v = 2.0 * x * y;
                    a += u;
                    b += v;
                    c += u * u - v * v;
                    d += 2.0 * u * v;
                }
                let num = d - 2.0 * a * b / pf;
                let den = c - (a * a - b * b) / pf;
                let angle = 0.25 * num.atan2(den);
                if angle.abs() < ANGLE_TOL {
                    continue;
                }
                largest = largest.max(angle.abs());
                let (sin, cos) = angle.sin_cos();
                rotate_pair(&mut work, j, k, cos, sin);
                rotate_pair(&mut rotation, j, k, cos, sin);
            }
        }
        if largest < ANGLE_TOL {
            break;
        }
    }

    // recompute from the accumulated rotation so loadings = lambda * rotation exactly
    let loadings = lambda * &rotation;
    OrthogonalRotation { loadings, rotation, sweeps }
}

/// Promax rotation with power `kappa`: Varimax (Kaiser-normalized), then a
/// least-squares oblique fit to the target `|l|^kappa sign(l)`, with the
/// transformation columns scaled so that `Phi` has a unit diagonal.
pub fn promax(lambda: &DMatrix<f64>, kappa: u32) -> Result<ObliqueRotation> {
    let q = lambda.ncols();
    if q < 2 {
        return Ok(ObliqueRotation {
            pattern: lambda.clone(),
            phi: DMatrix::identity(q, q),
            rotation: DMatrix::identity(q, q),
        });
    }
    let vm = varimax(lambda, true);
    let x = &vm.loadings;
    let target = x.map(|v| v.signum() * v.abs().powi(kappa as i32));
    let xtx = x.transpose() * x;
    let u = linalg::spd_solve(&xtx, &(x.transpose() * &target)).ok_or(Error::SingularTarget)?;
    let utu = u.transpose() * &u;
    let utu_inv = utu.clone().try_inverse().ok_or(Error::SingularTarget)?;
    let d = utu_inv.diagonal();
    if d.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::SingularTarget);
    }
    let scale = DMatrix::from_diagonal(&d.map(f64::sqrt));
    let u = u * scale;
    let pattern = x * &u;
    let rotation = &vm.rotation * &u;
    let phi = (u.transpose() * &u).try_inverse().ok_or(Error::SingularTarget)?;
    let mut phi = linalg::symmetrize(&phi);
    for i in 0..q {
        phi[(i, i)] = 1.0;
    }
    Ok(ObliqueRotation { pattern, phi, rotation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::max_abs;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_orthogonal(rng: &mut ChaCha8Rng, q: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(q, q, |_, _| rng.random_range(-1.0..1.0));
        a.qr().q()
    }

    /// Matches columns of `got` to `want` allowing permutation and sign flips.
    fn max_error_up_to_perm_sign(got: &DMatrix<f64>, want: &DMatrix<f64>) -> f64 {
        let q = want.ncols();
        let mut worst = 0.0_f64;
        let mut used = vec![false; q];
        for j in 0..q {
            let mut best = (f64::INFINITY, 0);
            for (k, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
                for s in [1.0, -1.0] {
                    let e = max_abs(&(got.column(k) * s - want.column(j)));
                    if e < best.0 {
                        best = (e, k);
                    }
                }
            }
            used[best.1] = true;
            worst = worst.max(best.0);
        }
        worst
    }

    #[test]
    fn single_factor_is_untouched() {
        let l = DMatrix::from_column_slice(3, 1, &[0.5, 0.6, 0.7]);
        let r = varimax(&l, true);
        assert_eq!(r.loadings, l);
        assert_eq!(r.rotation, DMatrix::<f64>::identity(1, 1));
        let pm = promax(&l, 4).unwrap();
        assert_eq!(pm.pattern, l);
        assert_eq!(pm.phi, DMatrix::<f64>::identity(1, 1));
    }

    #[test]
    fn recovers_rotated_simple_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base = fixtures::simple_structure(4, 5, 0.7);
        for _ in 0..20 {
            let q = random_orthogonal(&mut rng, 4);
            let mixed = base.lambda() * &q;
            for kaiser in [true, false] {
                let r = varimax(&mixed, kaiser);
                assert!(max_max_orth(&r.rotation) < 1e-10);
                assert!(max_error_up_to_perm_sign(&r.loadings, base.lambda()) < 1e-6);
            }
        }
    }

    fn max_max_orth(t: &DMatrix<f64>) -> f64 {
        let n = t.ncols();
        max_abs(&(t.transpose() * t - DMatrix::<f64>::identity(n, n)))
    }

    #[test]
    fn optimum_is_a_fixed_point() {
        let base = fixtures::cross_loaded(3, 4, 0.7, 0.1, 0.0);
        let once = varimax(base.lambda(), true);
        let twice = varimax(&once.loadings, true);
        assert!(max_error_up_to_perm_sign(&twice.loadings, &once.loadings) < 1e-8);
    }

    #[test]
    fn promax_keeps_orthogonal_simple_structure() {
        let base = fixtures::simple_structure(3, 5, 0.6);
        let r = promax(base.lambda(), 4).unwrap();
        assert!(max_abs(&(&r.phi - DMatrix::<f64>::identity(3, 3))) < 0.01);
        assert!(max_error_up_to_perm_sign(&r.pattern, base.lambda()) < 1e-6);
    }

    #[test]
    fn promax_preserves_fit() {
        let base = fixtures::cross_loaded(3, 5, 0.6, 0.1, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let unrotated = base.lambda() * random_orthogonal(&mut rng, 3);
        let r = promax(&unrotated, 4).unwrap();
        let before = &unrotated * unrotated.transpose();
        let after = &r.pattern * &r.phi * r.pattern.transpose();
        assert!(max_abs(&(after - before)) < 1e-8);
        assert!(crate::linalg::min_eigenvalue(&r.phi).unwrap() > 0.0);
    }

    proptest! {
        #[test]
        fn varimax_is_orthogonal_preserves_communalities_and_improves(
            seed in 0u64..10_000,
            p in 4usize..20,
            q in 2usize..5,
            kaiser in any::<bool>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = DMatrix::from_fn(p, q, |_, _| rng.random_range(-0.9..0.9));
            let r = varimax(&l, kaiser);
            prop_assert!(max_max_orth(&r.rotation) < 1e-10);
            let h0: Vec<f64> = l.row_iter().map(|x| x.norm_squared()).collect();
            let h1: Vec<f64> = r.loadings.row_iter().map(|x| x.norm_squared()).collect();
            for (a, b) in h0.iter().zip(&h1) {
                prop_assert!((a - b).abs() < 1e-10);
            }
            let normalize = |m: &DMatrix<f64>| {
                if kaiser {
                    let n = row_norms(m);
                    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / n[i])
                } else {
                    m.clone()
                }
            };
            prop_assert!(
                varimax_criterion(&normalize(&r.loadings)) >= varimax_criterion(&normalize(&l)) - 1e-12
            );
        }
    }
}
