//! Dense linear-algebra helpers on top of `nalgebra`.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::Complex;

/// Eigenvalues of a Hermitian matrix, sorted in descending order.
///
/// Only the Hermitian part `(A + A^H) / 2` is used.
pub fn hermitian_eigenvalues(a: &DMatrix<Complex>) -> Vec<f64> {
    let h = (a + a.adjoint()) * Complex::new(0.5, 0.0);
    let mut values: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|x, y| y.total_cmp(x));
    values
}

/// Largest `|A - A^H|` entry.
pub fn hermitian_deviation(a: &DMatrix<Complex>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Moore-Penrose pseudoinverse of a full-column-rank real matrix.
///
/// Equal to `(G^T G)^{-1} G^T`, evaluated through the SVD so that the residual
/// `M G - I` scales with `cond(G)` rather than `cond(G^T G)`. Returns the
/// pseudoinverse together with `cond(G^T G) = (s_max / s_min)^2`.
pub fn left_pseudoinverse(g: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let svd = g.clone().svd(true, true);
    let s = &svd.singular_values;
    let s_max = s.iter().copied().fold(0.0, f64::max);
    let s_min = s.iter().copied().fold(f64::INFINITY, f64::min);
    let cond = if s_min > 0.0 {
        (s_max / s_min) * (s_max / s_min)
    } else {
        f64::INFINITY
    };
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut inv_s = DMatrix::<f64>::zeros(s.len(), s.len());
    for (i, &value) in s.iter().enumerate() {
        if value > 0.0 {
            inv_s[(i, i)] = 1.0 / value;
        }
    }
    (v_t.transpose() * inv_s * u.transpose(), cond)
}

/// Clips negative eigenvalues of a Hermitian matrix and rescales to the
/// original trace.
pub fn project_psd(a: &DMatrix<Complex>) -> DMatrix<Complex> {
    let h = (a + a.adjoint()) * Complex::new(0.5, 0.0);
    let trace: f64 = (0..h.nrows()).map(|i| h[(i, i)].re).sum();
    let n = h.nrows();
    let eig = h.symmetric_eigen();
    let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let kept: f64 = clipped.iter().sum();
    let scale = if kept > 0.0 { trace / kept } else { 0.0 };
    let q = &eig.eigenvectors;
    let mut out = DMatrix::<Complex>::zeros(n, n);
    for (k, &l) in clipped.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        let col = q.column(k);
        out += col * col.adjoint() * Complex::new(l * scale, 0.0);
    }
    out
}
