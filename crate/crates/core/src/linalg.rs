//! Small dense kernels shared by the compression and product code.

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = DMatrix<f64>;

/// Thin QR factorization `a = q r` with `q` of size `m x min(m, n)`.
pub fn thin_qr(a: &Mat) -> (Mat, Mat) {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return (Mat::zeros(m, 0), Mat::zeros(0, n));
    }
    let qr = a.clone().qr();
    (qr.q(), qr.r())
}

/// Singular value decomposition with singular values sorted in
/// descending order. Returns `(u, sigma, v)` with `a = u diag(sigma) v^T`.
pub fn svd_sorted(a: &Mat) -> (Mat, Vec<f64>, Mat) {
    let (m, n) = a.shape();
    let p = m.min(n);
    if p == 0 {
        return (Mat::zeros(m, 0), Vec::new(), Mat::zeros(n, 0));
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_sorted = Mat::from_fn(m, p, |r, c| u[(r, order[c])]);
    let v_sorted = Mat::from_fn(n, p, |r, c| vt[(order[c], r)]);
    (u_sorted, sigma, v_sorted)
}

/// Left singular vectors and singular values of `a`.
///
/// Wide matrices are reduced by a QR factorization of `a^T` first, so the
/// SVD only ever sees a square matrix of the row dimension.
pub fn left_singular(a: &Mat) -> (Mat, Vec<f64>) {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return (Mat::zeros(m, 0), Vec::new());
    }
    if n > m {
        let (_, r) = thin_qr(&a.transpose());
        let (u, sigma, _) = svd_sorted(&r.transpose());
        (u, sigma)
    } else {
        let (u, sigma, _) = svd_sorted(a);
        (u, sigma)
    }
}

/// Number of singular values strictly above `threshold`, i.e. the smallest
/// rank `k` with `sigma[k] <= threshold`.
pub fn truncation_rank(sigma: &[f64], threshold: f64) -> usize {
    sigma.iter().take_while(|&&s| s > threshold).count()
}

/// Exact spectral norm via SVD. Test and oracle use only.
pub fn spectral_norm(a: &Mat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Deterministic random matrix with entries uniform in `[-1, 1)`.
pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Power iteration on `A^T A`, returning a lower bound for `||A||_2`.
///
/// The start vector is drawn from a ChaCha generator seeded with `seed`, so
/// the result is reproducible.
pub fn power_iteration<F, G>(apply: F, apply_adjoint: G, dim: usize, iterations: usize, seed: u64) -> f64
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    G: Fn(&DVector<f64>) -> DVector<f64>,
{
    if dim == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
    let norm = x.norm();
    if norm == 0.0 {
        return 0.0;
    }
    x /= norm;
    let mut estimate = 0.0;
    for _ in 0..iterations.max(1) {
        let y = apply(&x);
        // ||A x|| with ||x|| = 1 is a lower bound for ||A||.
        estimate = y.norm();
        let z = apply_adjoint(&y);
        let zn = z.norm();
        if zn == 0.0 {
            return estimate;
        }
        x = z / zn;
    }
    let y = apply(&x);
    estimate.max(y.norm())
}

/// Power-iteration norm estimate of an explicit matrix.
pub fn matrix_norm_estimate(a: &Mat, iterations: usize) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    power_iteration(|x| a * x, |y| a.tr_mul(y), a.ncols(), iterations, 0x5eed)
}

/// Horizontal concatenation of matrices with equal row counts.
pub fn hcat(rows: usize, parts: &[&Mat]) -> Mat {
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut offset = 0;
    for p in parts {
        debug_assert_eq!(p.nrows(), rows);
        out.view_mut((0, offset), (rows, p.ncols())).copy_from(*p);
        offset += p.ncols();
    }
    out
}

/// Vertical concatenation of matrices with equal column counts.
pub fn vcat(cols: usize, parts: &[&Mat]) -> Mat {
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut offset = 0;
    for p in parts {
        debug_assert_eq!(p.ncols(), cols);
        out.view_mut((offset, 0), (p.nrows(), cols)).copy_from(*p);
        offset += p.nrows();
    }
    out
}

/// `a + b`, treating `None` as zero.
pub fn add_opt(a: Option<Mat>, b: Option<Mat>) -> Option<Mat> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a + b),
        (Some(a), None) => Some(a),
        (None, b) => b,
    }
}

/// Relative Frobenius distance `||a - b|| / ||b||` (absolute if `b = 0`).
pub fn rel_frobenius(a: &Mat, b: &Mat) -> f64 {
    let diff = (a - b).norm();
    let scale = b.norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
