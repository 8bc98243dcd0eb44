//! Rank, nullspace and projection helpers built on a full SVD.

use nalgebra::{DMatrix, DVector};

/// Singular values and the full right-singular basis (`n x n`) of `a` (`r x n`).
///
/// Rows are zero-padded up to `n` so the returned `V^T` is square.
pub(crate) fn full_svd(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (r, n) = a.shape();
    let padded = if r < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (r, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    (svd.singular_values.iter().copied().collect(), vt)
}

fn cutoff(sv: &[f64], eps_rank: f64) -> f64 {
    let max = sv.iter().copied().fold(0.0_f64, f64::max);
    eps_rank * max
}

/// Numerical rank: singular values above `eps_rank * sigma_max`.
pub fn rank(a: &DMatrix<f64>, eps_rank: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.singular_values();
    let sv: Vec<f64> = sv.iter().copied().collect();
    let c = cutoff(&sv, eps_rank);
    if sv.iter().all(|&s| s == 0.0) {
        return 0;
    }
    sv.iter().filter(|&&s| s > c).count()
}

/// Orthonormal basis of `{x : a x = 0}`.
pub fn nullspace(a: &DMatrix<f64>, eps_rank: f64) -> Vec<DVector<f64>> {
    let n = a.ncols();
    if a.nrows() == 0 || a.iter().all(|&v| v == 0.0) {
        return (0..n)
            .map(|i| DVector::from_fn(n, |j, _| f64::from(u8::from(i == j))))
            .collect();
    }
    let (sv, vt) = full_svd(a);
    let c = cutoff(&sv, eps_rank);
    let mut out = Vec::new();
    for (i, &s) in sv.iter().enumerate() {
        if s <= c {
            out.push(vt.row(i).transpose());
        }
    }
    // padded SVD always yields n singular values, but guard the shape anyway
    for i in sv.len()..n {
        out.push(vt.row(i).transpose());
    }
    out
}

/// Orthonormal basis of the row space of `a`.
pub fn row_space(a: &DMatrix<f64>, eps_rank: f64) -> Vec<DVector<f64>> {
    if a.nrows() == 0 || a.iter().all(|&v| v == 0.0) {
        return Vec::new();
    }
    let (sv, vt) = full_svd(a);
    let c = cutoff(&sv, eps_rank);
    sv.iter()
        .enumerate()
        .filter(|(_, &s)| s > c)
        .map(|(i, _)| vt.row(i).transpose())
        .collect()
}

/// Stack vectors as the rows of a matrix.
pub fn rows_to_matrix(rows: &[DVector<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Orthogonal projection of `v` onto the span of an orthonormal `basis`.
pub fn project(basis: &[DVector<f64>], v: &DVector<f64>) -> DVector<f64> {
    let mut p = DVector::zeros(v.len());
    for q in basis {
        p.axpy(q.dot(v), q, 1.0);
    }
    p
}

/// Component of `v` orthogonal to the orthonormal `basis` (two passes of
/// modified Gram-Schmidt).
pub fn residual(basis: &[DVector<f64>], v: &DVector<f64>) -> DVector<f64> {
    let mut r = v.clone();
    for _ in 0..2 {
        for q in basis {
            let c = q.dot(&r);
            r.axpy(-c, q, 1.0);
        }
    }
    r
}

pub fn max_abs_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
