//! Numerical substrate: dense vectors and matrices, a standard-form simplex
//! solver, double-description conversion between generator and facet
//! representations of polyhedral cones, and Kronecker products.
//!
//! Tensor coordinates are row-major: the pair of indices `(i, j)` of
//! `u ⊗ v` lives at position `i * v.len() + j`. Every bipartite vector that
//! crosses the public interface uses this convention.

mod cone;
pub mod linalg;
mod lp;
pub mod program;

pub use cone::{
    cone_contains, cone_section_vertices, double_description, dual_cone, extreme_rays,
    polytope_vertices, separating_functional, AffineFunctional, ConeRep, DdConfig,
};
pub use lp::{lp_solve, LpOutcome, LpProblem, LpStatus};

/// Column vector of real coordinates.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix; `rows` is the output dimension.
pub type Matrix = nalgebra::DMatrix<f64>;

/// Tolerance for sign tests.
pub const SIGN_TOL: f64 = 1e-9;
/// Tolerance for equality assertions.
pub const EQ_TOL: f64 = 1e-7;

/// Kronecker product of two vectors, `(i, j) ↦ i * v.len() + j`.
pub fn kron(u: &Vector, v: &Vector) -> Vector {
    let n = v.len();
    Vector::from_fn(u.len() * n, |k, _| u[k / n] * v[k % n])
}

/// Kronecker product of a list of vectors, left-nested.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a Vector>) -> Vector {
    factors
        .into_iter()
        .fold(Vector::from_element(1, 1.0), |acc, f| kron(&acc, f))
}

/// Kronecker product of matrices under the same row-major index convention.
pub fn kron_matrix(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Builds a vector from a slice.
pub fn vector(coords: &[f64]) -> Vector {
    Vector::from_column_slice(coords)
}

/// Builds a matrix from row slices. Panics on ragged input.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Matrix {
    let ncols = rows.first().map_or(0, Vec::len);
    assert!(rows.iter().all(|r| r.len() == ncols), "ragged matrix rows");
    Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

pub fn is_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Max-norm distance between two vectors of equal length.
pub fn max_abs_diff(a: &Vector, b: &Vector) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Standard basis vector.
pub fn unit_vector(dim: usize, index: usize) -> Vector {
    let mut v = Vector::zeros(dim);
    v[index] = 1.0;
    v
}

/// Scales `v` to unit max-norm; the zero vector is returned unchanged.
pub fn normalize_max(v: &Vector) -> Vector {
    let m = v.amax();
    if m > 0.0 {
        v / m
    } else {
        v.clone()
    }
}

/// Removes vectors whose max-norm-normalized forms coincide within `tol`,
/// keeping the first occurrence.
pub fn dedup_directions(vs: Vec<Vector>, tol: f64) -> Vec<Vector> {
    let mut kept: Vec<Vector> = Vec::with_capacity(vs.len());
    let mut normals: Vec<Vector> = Vec::with_capacity(vs.len());
    for v in vs {
        let n = normalize_max(&v);
        if !normals.iter().any(|k| max_abs_diff(k, &n) < tol) {
            normals.push(n);
            kept.push(v);
        }
    }
    kept
}

/// Removes points that coincide within `tol` in max norm, keeping the first.
pub fn dedup_points(vs: Vec<Vector>, tol: f64) -> Vec<Vector> {
    let mut kept: Vec<Vector> = Vec::with_capacity(vs.len());
    for v in vs {
        if !kept.iter().any(|k| max_abs_diff(k, &v) < tol) {
            kept.push(v);
        }
    }
    kept
}

/// Lexicographic comparison that treats coordinates within `tol` as equal.
pub fn lex_cmp(a: &Vector, b: &Vector, tol: f64) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        if (x - y).abs() > tol {
            return x.total_cmp(y);
        }
    }
    a.len().cmp(&b.len())
}

/// True when both lists hold the same points up to permutation.
pub fn same_point_set(a: &[Vector], b: &[Vector], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| b.iter().any(|y| x.len() == y.len() && max_abs_diff(x, y) < tol))
        && b.iter().all(|y| a.iter().any(|x| x.len() == y.len() && max_abs_diff(x, y) < tol))
}

/// True when both lists hold the same rays up to permutation and positive scaling.
pub fn same_ray_set(a: &[Vector], b: &[Vector], tol: f64) -> bool {
    let na: Vec<Vector> = a.iter().map(normalize_max).collect();
    let nb: Vec<Vector> = b.iter().map(normalize_max).collect();
    same_point_set(&na, &nb, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_basis_vectors() {
        assert_eq!(
            kron(&vector(&[1.0, 0.0]), &vector(&[0.0, 1.0])),
            vector(&[0.0, 1.0, 0.0, 0.0])
        );
    }

    #[test]
    fn kron_lifted_square_vertices() {
        let s10 = vector(&[1.0, 0.0, 1.0]);
        let s01 = vector(&[0.0, 1.0, 1.0]);
        assert_eq!(
            kron(&s10, &s01),
            vector(&[0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0])
        );
    }

    #[test]
    fn kron_is_homogeneous() {
        let u = vector(&[1.0, -2.0, 0.5]);
        let v = vector(&[3.0, 4.0]);
        assert_eq!(kron(&(&u * 2.5), &v), kron(&u, &v) * 2.5);
    }

    #[test]
    fn kron_matrix_matches_vector_convention() {
        let u = vector(&[1.0, 2.0]);
        let v = vector(&[3.0, 5.0, 7.0]);
        let mu = Matrix::from_column_slice(2, 1, u.as_slice());
        let mv = Matrix::from_column_slice(3, 1, v.as_slice());
        let k = kron_matrix(&mu, &mv);
        assert_eq!(k.column(0).into_owned(), kron(&u, &v));
    }

    #[test]
    fn dedup_directions_merges_scaled_copies() {
        let vs = vec![vector(&[1.0, 2.0]), vector(&[2.0, 4.0]), vector(&[1.0, 0.0])];
        assert_eq!(dedup_directions(vs, 1e-7).len(), 2);
    }

    proptest::proptest! {
        #[test]
        fn kron_is_associative(
            u in proptest::collection::vec(-3i32..4, 1..4),
            v in proptest::collection::vec(-3i32..4, 1..4),
            w in proptest::collection::vec(-3i32..4, 1..4),
        ) {
            let f = |x: &Vec<i32>| Vector::from_iterator(x.len(), x.iter().map(|&c| c as f64));
            let (u, v, w) = (f(&u), f(&v), f(&w));
            proptest::prop_assert_eq!(kron(&kron(&u, &v), &w), kron(&u, &kron(&v, &w)));
        }
    }
}
