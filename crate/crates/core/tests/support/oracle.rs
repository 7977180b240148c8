//! Straight-line transliteration of the worked-example R script on plain
//! `Vec<Vec<f64>>` matrices, with its own Gauss-Jordan inverse and cyclic
//! Jacobi eigensolver. Shares no code with the library.
//!
//! The script's construction of `N` is garbled as printed; `N` is taken
//! from its definition `N N' = Phi` using the symmetric root (or supplied by
//! the caller).

#![allow(dead_code, clippy::needless_range_loop)]

pub type Mat = Vec<Vec<f64>>;

pub fn from_rows(rows: usize, cols: usize, data: &[f64]) -> Mat {
    assert_eq!(data.len(), rows * cols);
    (0..rows).map(|i| data[i * cols..(i + 1) * cols].to_vec()).collect()
}

pub fn ident(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn t(a: &Mat) -> Mat {
    let (r, c) = (a.len(), a[0].len());
    (0..c).map(|j| (0..r).map(|i| a[i][j]).collect()).collect()
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    assert_eq!(a[0].len(), k);
    let mut out = vec![vec![0.0; c]; r];
    for i in 0..r {
        for j in 0..c {
            let mut s = 0.0;
            for m in 0..k {
                s += a[i][m] * b[m][j];
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn chain(ms: &[&Mat]) -> Mat {
    let mut out = ms[0].clone();
    for m in &ms[1..] {
        out = mul(&out, m);
    }
    out
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + v).collect()).collect()
}

pub fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u - v).collect()).collect()
}

/// R's `diag(diag(x))`.
pub fn mdiag(a: &Mat) -> Mat {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| if i == j { a[i][i] } else { 0.0 }).collect()).collect()
}

/// R's elementwise `^`.
pub fn pow(a: &Mat, e: f64) -> Mat {
    a.iter().map(|r| r.iter().map(|v| v.powf(e)).collect()).collect()
}

pub fn diag(a: &Mat) -> Vec<f64> {
    (0..a.len()).map(|i| a[i][i]).collect()
}

/// Gauss-Jordan elimination with partial pivoting.
pub fn inv(a: &Mat) -> Mat {
    let n = a.len();
    let mut m: Mat = a.iter().zip(ident(n)).map(|(r, e)| r.iter().copied().chain(e).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).unwrap();
        assert!(m[pivot][col].abs() > 1e-300, "singular matrix");
        m.swap(col, pivot);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for row in 0..n {
            if row != col {
                let f = m[row][col];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[row][k] -= f * m[col][k];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues and eigenvectors (as columns), sorted by decreasing eigenvalue.
pub fn jacobi_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.len();
    let mut a = a.clone();
    let mut v = ident(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let tt = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let tt = if theta == 0.0 { 1.0 } else { tt };
                let c = 1.0 / (tt * tt + 1.0).sqrt();
                let s = tt * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y][y].total_cmp(&a[x][x]));
    let values = order.iter().map(|&k| a[k][k]).collect();
    let vectors = (0..n).map(|i| order.iter().map(|&k| v[i][k]).collect()).collect();
    (values, vectors)
}

fn diag_matrix(d: &[f64]) -> Mat {
    let n = d.len();
    (0..n).map(|i| (0..n).map(|j| if i == j { d[i] } else { 0.0 }).collect()).collect()
}

/// `U D^{1/2} U'`.
pub fn sym_sqrt(a: &Mat) -> Mat {
    let (d, u) = jacobi_eigen(a);
    let r: Vec<f64> = d.iter().map(|x| x.abs().sqrt()).collect();
    chain(&[&u, &diag_matrix(&r), &t(&u)])
}

/// `U D^{1/2}`, the reading of the script's `N` line as a principal-axes root.
pub fn principal_root(a: &Mat) -> Mat {
    let (d, u) = jacobi_eigen(a);
    let r: Vec<f64> = d.iter().map(|x| x.abs().sqrt()).collect();
    mul(&u, &diag_matrix(&r))
}

pub struct Reliabilities {
    pub sigma: Mat,
    pub psi: Mat,
    pub regression: Vec<f64>,
    pub bartlett: Vec<f64>,
    pub mcdonald: Vec<f64>,
}

pub fn factor_score_reliability(lambda: &Mat, phi: &Mat) -> Reliabilities {
    factor_score_reliability_with_root(lambda, phi, &sym_sqrt(phi))
}

pub fn factor_score_reliability_with_root(lambda: &Mat, phi: &Mat, n: &Mat) -> Reliabilities {
    let l = lambda;
    // Regenerate covariance matrix from factor loadings matrix
    let sigma = chain(&[l, phi, &t(l)]);
    let sigma = add(&sub(&sigma, &mdiag(&sigma)), &ident(l.len()));
    // uniqueness
    let psi = pow(&mdiag(&sub(&sigma, &chain(&[l, phi, &t(l)]))), 0.5);

    let is = inv(&sigma);
    let pkp = chain(&[phi, &t(l), &is, l, phi]);
    let pkpkp = chain(&[phi, &t(l), &is, l, phi, &t(l), &is, l, phi]);
    let scale = pow(&inv(&mdiag(&pkp)), 0.5);
    let rtt_regression = chain(&[&scale, &mdiag(&pkpkp), &scale]);

    let ipsi2 = pow(&inv(&psi), 2.0);
    let rtt_bartlett = inv(&mdiag(&add(&inv(&chain(&[&t(l), &ipsi2, l])), phi)));

    let sub_term = chain(&[&t(n), &t(l), &ipsi2, &sigma, &ipsi2, l, n]);
    let sub_term = sym_sqrt(&sub_term);
    let isub = inv(&sub_term);
    let rtt_mcdonald = mdiag(&chain(&[&isub, &t(n), &t(l), &ipsi2, l, phi, &t(l), &ipsi2, l, n, &isub]));

    Reliabilities {
        sigma,
        psi,
        regression: diag(&rtt_regression),
        bartlett: diag(&rtt_bartlett),
        mcdonald: diag(&rtt_mcdonald),
    }
}

/// Loadings and factor correlations of the worked example, typed in again
/// here rather than taken from the library fixtures.
pub fn example_one() -> (Mat, Mat) {
    let loadings = from_rows(
        9,
        3,
        &[
            0.50, -0.10, 0.10, //
            0.50, 0.10, 0.10, //
            0.50, 0.10, -0.10, //
            -0.10, 0.50, 0.15, //
            0.15, 0.50, 0.10, //
            -0.15, 0.50, 0.10, //
            0.10, 0.10, 0.60, //
            0.10, -0.10, 0.60, //
            0.10, 0.10, 0.60,
        ],
    );
    let inter_corr = from_rows(3, 3, &[1.00, 0.30, 0.20, 0.30, 1.00, 0.10, 0.20, 0.10, 1.00]);
    (loadings, inter_corr)
}
