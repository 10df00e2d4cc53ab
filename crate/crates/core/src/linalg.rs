//! Dense complex linear algebra helpers on top of `faer`.
//!
//! Vectors are plain `Vec<c64>` slices; matrices are `faer::Mat<c64>`.
//! All decompositions run sequentially so results do not depend on the
//! thread pool.

use std::ops::Add;

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::Solve;
use faer::{Accum, Mat, Par, Side};

use crate::error::{invalid, Error, Result};

pub use faer::c64;

pub type CMatrix = Mat<c64>;

/// Condition estimate above which solves are logged as ill-conditioned.
pub const ILL_CONDITIONED: f64 = 1e10;

pub fn zeros(n: usize, m: usize) -> CMatrix {
    CMatrix::zeros(n, m)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn from_diag(d: &[f64]) -> CMatrix {
    let n = d.len();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c64::new(d[i], 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

pub fn outer(a: &[c64], b: &[c64]) -> CMatrix {
    CMatrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
}

/// `acc += scale * x xᴴ`, lower and upper triangles both written.
pub fn add_outer(acc: &mut CMatrix, x: &[c64], scale: f64) {
    let n = x.len();
    debug_assert_eq!(acc.nrows(), n);
    for j in 0..n {
        let xj = x[j].conj() * scale;
        for i in 0..n {
            acc[(i, j)] += x[i] * xj;
        }
    }
}

/// Replaces `a` with `(a + aᴴ)/2`.
pub fn hermitize(a: &mut CMatrix) {
    let n = a.nrows();
    for j in 0..n {
        a[(j, j)] = c64::new(a[(j, j)].re, 0.0);
        for i in (j + 1)..n {
            let v = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = v;
            a[(j, i)] = v.conj();
        }
    }
}

pub fn frobenius(a: &CMatrix) -> f64 {
    let mut s = Vec::with_capacity(a.nrows() * a.ncols());
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s.push(a[(i, j)].norm_sqr());
        }
    }
    pairwise_sum(&s).sqrt()
}

pub fn is_hermitian(a: &CMatrix, rel_tol: f64) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    let scale = frobenius(a).max(f64::MIN_POSITIVE);
    let n = a.nrows();
    for j in 0..n {
        for i in j..n {
            if (a[(i, j)] - a[(j, i)].conj()).norm() > rel_tol * scale {
                return false;
            }
        }
    }
    true
}

pub fn sub(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a - b
}

pub fn scale(a: &CMatrix, s: f64) -> CMatrix {
    CMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = zeros(a.nrows(), b.ncols());
    matmul(
        out.as_mut(),
        Accum::Replace,
        a.as_ref(),
        b.as_ref(),
        c64::new(1.0, 0.0),
        Par::Seq,
    );
    out
}

/// `a bᴴ`
pub fn mul_adj_right(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = zeros(a.nrows(), b.nrows());
    matmul(
        out.as_mut(),
        Accum::Replace,
        a.as_ref(),
        b.as_ref().adjoint(),
        c64::new(1.0, 0.0),
        Par::Seq,
    );
    out
}

/// `aᴴ b`
pub fn mul_adj_left(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = zeros(a.ncols(), b.ncols());
    matmul(
        out.as_mut(),
        Accum::Replace,
        a.as_ref().adjoint(),
        b.as_ref(),
        c64::new(1.0, 0.0),
        Par::Seq,
    );
    out
}

pub fn adjoint(a: &CMatrix) -> CMatrix {
    a.as_ref().adjoint().to_owned()
}

pub fn mat_vec(a: &CMatrix, x: &[c64]) -> Vec<c64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![c64::new(0.0, 0.0); a.nrows()];
    for (j, xj) in x.iter().enumerate() {
        let col = a.col(j);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += col[i] * xj;
        }
    }
    y
}

/// `aᴴ x`
pub fn adj_mat_vec(a: &CMatrix, x: &[c64]) -> Vec<c64> {
    assert_eq!(a.nrows(), x.len());
    (0..a.ncols())
        .map(|j| {
            let col = a.col(j);
            let mut s = c64::new(0.0, 0.0);
            for (i, xi) in x.iter().enumerate() {
                s += col[i].conj() * xi;
            }
            s
        })
        .collect()
}

/// Inner product `aᴴ b`.
pub fn dot_h(a: &[c64], b: &[c64]) -> c64 {
    assert_eq!(a.len(), b.len());
    let mut s = c64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        s += x.conj() * y;
    }
    s
}

/// Row-vector/column-vector product `w h` (no conjugation).
pub fn dot(w: &[c64], h: &[c64]) -> c64 {
    assert_eq!(w.len(), h.len());
    let mut s = c64::new(0.0, 0.0);
    for (x, y) in w.iter().zip(h) {
        s += x * y;
    }
    s
}

pub fn norm_sqr(x: &[c64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn col_to_vec(a: &CMatrix, j: usize) -> Vec<c64> {
    let c = a.col(j);
    (0..a.nrows()).map(|i| c[i]).collect()
}

pub fn vec_to_col(x: &[c64]) -> CMatrix {
    CMatrix::from_fn(x.len(), 1, |i, _| x[i])
}

/// Pairwise (cascade) summation; the result depends only on the input order,
/// never on how work was split across threads.
pub fn pairwise_sum<T: Copy + Default + Add<Output = T>>(xs: &[T]) -> T {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        return xs.iter().fold(T::default(), |a, &b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in descending
/// order; column `k` of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(a: &CMatrix) -> Result<HermitianEigen> {
    check_square(a)?;
    let n = a.nrows();
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..n).rev().map(|k| s[k].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| u[(i, n - 1 - k)]);
    Ok(HermitianEigen { values, vectors })
}

pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    check_square(a)?;
    let mut v = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Linalg(format!("eigendecomposition failed: {e:?}")))?;
    v.reverse();
    Ok(v)
}

pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    a.singular_values()
        .map_err(|e| Error::Linalg(format!("SVD failed: {e:?}")))
}

/// Moore–Penrose pseudoinverse by SVD. Singular values at or below
/// `tol * sigma_max` are treated as zero.
pub fn pseudo_inverse(a: &CMatrix, tol: f64) -> Result<CMatrix> {
    if !(tol >= 0.0) {
        return Err(invalid("pseudo_inverse tolerance must be nonnegative"));
    }
    let (m, n) = (a.nrows(), a.ncols());
    if m == 0 || n == 0 {
        return Ok(zeros(n, m));
    }
    let svd = a.thin_svd().map_err(|e| Error::Linalg(format!("SVD failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let k = s.nrows();
    let smax = s[0].re;
    let cutoff = tol * smax;
    let u = svd.U();
    let v = svd.V();
    let kept: Vec<usize> = (0..k).filter(|&i| s[i].re > cutoff && s[i].re > 0.0).collect();
    // A† = V_k diag(1/s_k) U_kᴴ
    let vs = CMatrix::from_fn(n, kept.len(), |i, c| v[(i, kept[c])] / s[kept[c]].re);
    let uk = CMatrix::from_fn(m, kept.len(), |i, c| u[(i, kept[c])]);
    Ok(mul_adj_right(&vs, &uk))
}

/// Solution of a Hermitian positive (semi)definite system with diagnostics.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub x: CMatrix,
    /// Estimated 2-norm condition number of the system matrix.
    pub condition: f64,
    /// True when the pseudo-solve fallback was used.
    pub pseudo: bool,
}

/// Solves `a x = b` for Hermitian positive definite `a`.
///
/// Uses a Cholesky factorization plus one step of iterative refinement. If
/// the factorization fails or the matrix is numerically singular, falls back
/// to the minimum-norm solution from the eigendecomposition (eigenvalues
/// below `1e-12 * lambda_max` dropped).
pub fn solve_hermitian_pd(a: &CMatrix, b: &CMatrix) -> Result<SolveOutcome> {
    check_square(a)?;
    if b.nrows() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    if let Ok(llt) = a.llt(Side::Lower) {
        let l = llt.L();
        let n = a.nrows();
        let (mut dmin, mut dmax) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let d = l[(i, i)].re;
            dmin = dmin.min(d);
            dmax = dmax.max(d);
        }
        let condition = if dmin > 0.0 {
            (dmax / dmin).powi(2)
        } else {
            f64::INFINITY
        };
        if condition < 1e14 {
            let mut x = llt.solve(b);
            let mut r = b - mul(a, &x);
            llt.solve_in_place(r.as_mut());
            x += &r;
            if condition > ILL_CONDITIONED {
                log::warn!("Hermitian solve is ill-conditioned (condition estimate {condition:.3e})");
            }
            return Ok(SolveOutcome {
                x,
                condition,
                pseudo: false,
            });
        }
    }
    pseudo_solve_hermitian(a, b)
}

pub fn solve_hermitian_pd_vec(a: &CMatrix, b: &[c64]) -> Result<(Vec<c64>, SolveOutcome)> {
    let out = solve_hermitian_pd(a, &vec_to_col(b))?;
    Ok((col_to_vec(&out.x, 0), out))
}

fn pseudo_solve_hermitian(a: &CMatrix, b: &CMatrix) -> Result<SolveOutcome> {
    let eig = hermitian_eigen(a)?;
    let lmax = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = 1e-12 * lmax;
    let kept: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] > cutoff).collect();
    let lmin_kept = kept.last().map(|&k| eig.values[k]).unwrap_or(0.0);
    let condition = if kept.len() == eig.values.len() && lmin_kept > 0.0 {
        lmax / lmin_kept
    } else {
        f64::INFINITY
    };
    log::warn!(
        "Hermitian system singular or ill-conditioned; using pseudo-solve ({} of {} modes kept)",
        kept.len(),
        eig.values.len()
    );
    let n = a.nrows();
    let uk = CMatrix::from_fn(n, kept.len(), |i, c| eig.vectors[(i, kept[c])]);
    let mut coeffs = mul_adj_left(&uk, b);
    for (c, &k) in kept.iter().enumerate() {
        let inv = 1.0 / eig.values[k];
        for j in 0..coeffs.ncols() {
            coeffs[(c, j)] *= inv;
        }
    }
    Ok(SolveOutcome {
        x: mul(&uk, &coeffs),
        condition,
        pseudo: true,
    })
}

fn check_square(a: &CMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_gaussian, rng_from_seed};
    use proptest::prelude::*;

    fn random_low_rank(n: usize, rank: usize, seed: u64) -> CMatrix {
        let mut rng = rng_from_seed(seed);
        let a = CMatrix::from_fn(n, rank, |_, _| complex_gaussian(&mut rng, 1.0));
        let b = CMatrix::from_fn(rank, n, |_, _| complex_gaussian(&mut rng, 1.0));
        mul(&a, &b)
    }

    fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
        frobenius(&(a - b)) / frobenius(b).max(1e-300)
    }

    #[test]
    fn pinv_of_identity_and_diag() {
        let i = identity(4);
        assert!(rel(&pseudo_inverse(&i, 1e-12).unwrap(), &i) < 1e-14);
        let d = from_diag(&[1.0, 0.0]);
        let p = pseudo_inverse(&d, 1e-12).unwrap();
        assert!(rel(&p, &d) < 1e-14);
    }

    #[test]
    fn eigen_descending_and_reconstructs() {
        let a = random_low_rank(12, 12, 5);
        let mut h = mul_adj_right(&a, &a);
        hermitize(&mut h);
        let e = hermitian_eigen(&h).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let ud = CMatrix::from_fn(12, 12, |i, k| e.vectors[(i, k)] * e.values[k]);
        let back = mul_adj_right(&ud, &e.vectors);
        assert!(rel(&back, &h) < 1e-12);
        let vals = hermitian_eigenvalues(&h).unwrap();
        for (x, y) in vals.iter().zip(&e.values) {
            assert!((x - y).abs() <= 1e-9 * e.values[0]);
        }
    }

    #[test]
    fn solve_matches_product() {
        let a = random_low_rank(10, 10, 9);
        let mut h = mul_adj_right(&a, &a);
        for i in 0..10 {
            h[(i, i)] += c64::new(1.0, 0.0);
        }
        let x0 = random_low_rank(10, 10, 10);
        let b = mul(&h, &x0);
        let out = solve_hermitian_pd(&h, &b).unwrap();
        assert!(!out.pseudo);
        assert!(rel(&out.x, &x0) < 1e-10);
    }

    #[test]
    fn singular_solve_falls_back_to_minimum_norm() {
        let a = random_low_rank(8, 3, 11);
        let mut h = mul_adj_right(&a, &a);
        hermitize(&mut h);
        let x0 = mul(&h, &random_low_rank(8, 1, 12));
        let b = mul(&h, &x0);
        let out = solve_hermitian_pd(&h, &b).unwrap();
        assert!(out.pseudo);
        // x0 lies in the range of h, so the minimum-norm solution recovers it.
        assert!(rel(&out.x, &x0) < 1e-6);
    }

    #[test]
    fn pairwise_sum_matches_naive_for_small_inputs() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn penrose_identities(seed in any::<u64>(), n in 4usize..30, rank_frac in 0.1f64..0.9) {
            let rank = ((n as f64 * rank_frac) as usize).max(1);
            let a = random_low_rank(n, rank, seed);
            let p = pseudo_inverse(&a, 1e-10).unwrap();
            let apa = mul(&mul(&a, &p), &a);
            let pap = mul(&mul(&p, &a), &p);
            let ap = mul(&a, &p);
            let pa = mul(&p, &a);
            prop_assert!(rel(&apa, &a) < 1e-8);
            prop_assert!(rel(&pap, &p) < 1e-8);
            prop_assert!(rel(&adjoint(&ap), &ap) < 1e-8);
            prop_assert!(rel(&adjoint(&pa), &pa) < 1e-8);
        }

        #[test]
        fn hermitize_is_idempotent(seed in any::<u64>()) {
            let mut a = random_low_rank(6, 6, seed);
            hermitize(&mut a);
            prop_assert!(is_hermitian(&a, 1e-14));
            let before = a.clone();
            hermitize(&mut a);
            prop_assert!(rel(&a, &before) == 0.0);
        }
    }
}
