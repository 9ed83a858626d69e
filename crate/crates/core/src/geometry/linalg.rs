//! Rank, span and null-space computations on small dense matrices.
//!
//! Every rank decision uses singular values relative to the largest one.

use super::{Matrix, Vector};

/// Relative singular-value threshold used for rank decisions.
pub const RANK_TOL: f64 = 1e-8;

/// Singular values together with the full right-singular basis.
///
/// `nalgebra` returns thin factors; wide matrices are padded with zero rows
/// so that all `ncols` right-singular vectors are available.
fn full_svd(a: &Matrix) -> (Vec<f64>, Matrix, Matrix) {
    let (m, n) = a.shape();
    let padded = if m < n {
        let mut p = Matrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    (svd.singular_values.iter().copied().collect(), u, v_t)
}

fn cutoff(singular: &[f64], rel_tol: f64) -> f64 {
    let largest = singular.iter().copied().fold(0.0_f64, f64::max);
    if largest == 0.0 {
        f64::INFINITY
    } else {
        largest * rel_tol
    }
}

/// Numerical rank with a singular-value threshold relative to the largest.
pub fn rank(a: &Matrix, rel_tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.singular_values();
    let cut = cutoff(sv.as_slice(), rel_tol);
    sv.iter().filter(|&&s| s > cut).count()
}

/// Orthonormal basis (as columns) of the null space of `a`.
pub fn null_space(a: &Matrix, rel_tol: f64) -> Matrix {
    let n = a.ncols();
    if a.nrows() == 0 {
        return Matrix::identity(n, n);
    }
    let (sv, _, v_t) = full_svd(a);
    let cut = cutoff(&sv, rel_tol);
    let cols: Vec<Vector> = (0..v_t.nrows())
        .filter(|&i| sv.get(i).is_none_or(|&s| s <= cut))
        .map(|i| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        Matrix::zeros(n, 0)
    } else {
        Matrix::from_columns(&cols)
    }
}

/// Orthonormal basis (as columns) of the column span of `a`.
pub fn column_span(a: &Matrix, rel_tol: f64) -> Matrix {
    let m = a.nrows();
    if a.ncols() == 0 || m == 0 {
        return Matrix::zeros(m, 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let cut = cutoff(svd.singular_values.as_slice(), rel_tol);
    let cols: Vec<Vector> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > cut)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        Matrix::zeros(m, 0)
    } else {
        Matrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the span of a list of vectors.
pub fn span_basis(vs: &[Vector], dim: usize, rel_tol: f64) -> Matrix {
    if vs.is_empty() {
        return Matrix::zeros(dim, 0);
    }
    column_span(&Matrix::from_columns(vs), rel_tol)
}

/// Residual norm of the orthogonal projection of `v` onto the column span
/// of the orthonormal `basis`.
pub fn projection_residual(basis: &Matrix, v: &Vector) -> f64 {
    if basis.ncols() == 0 {
        return v.norm();
    }
    let coeffs = basis.transpose() * v;
    (v - basis * coeffs).norm()
}

/// Stacks vectors as the rows of a matrix.
pub fn rows_matrix(rows: &[Vector], ncols: usize) -> Matrix {
    Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vector;

    #[test]
    fn rank_of_affinely_dependent_square_differences() {
        let d = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(rank(&d, RANK_TOL), 2);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        // columns are the lifted square vertices
        let x = Matrix::from_row_slice(
            3,
            4,
            &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        );
        let ns = null_space(&x, RANK_TOL);
        assert_eq!(ns.ncols(), 1);
        let alpha = ns.column(0).into_owned();
        let alpha = &alpha / alpha[0];
        assert!((alpha - vector(&[1.0, -1.0, -1.0, 1.0])).amax() < 1e-12);
    }

    #[test]
    fn null_space_of_full_rank_is_empty() {
        assert_eq!(null_space(&Matrix::identity(3, 3), RANK_TOL).ncols(), 0);
    }

    #[test]
    fn span_residual_detects_outside_vectors() {
        let b = span_basis(&[vector(&[1.0, 0.0, 0.0]), vector(&[1.0, 1.0, 0.0])], 3, RANK_TOL);
        assert_eq!(b.ncols(), 2);
        assert!(projection_residual(&b, &vector(&[3.0, -2.0, 0.0])) < 1e-12);
        assert!((projection_residual(&b, &vector(&[0.0, 0.0, 2.0])) - 2.0).abs() < 1e-12);
    }
}
