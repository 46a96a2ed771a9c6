//! Shared dense linear-algebra helpers.
//!
//! Symmetric eigenvalue extraction is delegated to nalgebra's
//! `SymmetricEigen`; the power-iteration fallback for large matrices and
//! the spectral norm via the Gram matrix are written out here.

use nalgebra::DMatrix;

/// Largest eigenvalue of a symmetric matrix via full eigendecomposition.
pub(crate) fn max_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    debug_assert_eq!(m.nrows(), m.ncols());
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest eigenvalue of a symmetric matrix via full eigendecomposition.
pub(crate) fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    debug_assert_eq!(m.nrows(), m.ncols());
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Largest eigenvalue of a symmetric matrix with nonnegative entries,
/// computed by power iteration on the shifted matrix `M + shift * I`.
/// The shift makes the target eigenvalue dominant in magnitude so the
/// iteration cannot stall on a sign-symmetric spectrum.
pub(crate) fn power_iteration_max(
    m: &DMatrix<f64>,
    shift: f64,
    tol: f64,
    max_iters: usize,
) -> f64 {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    if n == 0 {
        return 0.0;
    }
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut w = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..max_iters {
        for i in 0..n {
            let mut acc = shift * v[i];
            let row = m.row(i);
            for j in 0..n {
                acc += row[j] * v[j];
            }
            w[i] = acc;
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = w.iter().zip(v.iter()).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            v[i] = w[i] / norm;
        }
        if (next - lambda).abs() < tol {
            return next - shift;
        }
        lambda = next;
    }
    lambda - shift
}

/// Spectral norm (largest singular value) computed as
/// `sqrt(lambda_max(M^T M))`.
pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let gram = m.transpose() * m;
    max_symmetric_eigenvalue(&gram).max(0.0).sqrt()
}
