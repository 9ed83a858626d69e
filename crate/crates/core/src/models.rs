//! Boxworld: the square's PR-box state, the correspondence between positive
//! maps and bipartite states, and the square's symmetries.

use crate::channels::{validate_channel, Channel};
use crate::error::{Error, Result};
use crate::geometry::{cone_contains, kron, vector, ConeRep, Matrix, Vector};
use crate::state_space::boxworld_square;
use crate::tensor::{apply_on_leg, max_tensor_contains, Leg};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SquareMapKind {
    Rotation,
    Reflection,
    Iota,
    GeneralPositive,
}

/// A linear map on the square's lifted coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMap {
    pub matrix: Matrix,
    pub kind: SquareMapKind,
}

fn square_vertex(label: &str) -> Vector {
    boxworld_square()
        .vertex_by_label(label)
        .cloned()
        .expect("builtin square labels")
}

/// The unique linear map sending each `src[i]` to `dst[i]` (three linearly
/// independent sources).
fn map_from_images(src: [&Vector; 3], dst: [&Vector; 3]) -> Matrix {
    let s = Matrix::from_columns(&src.map(Clone::clone));
    let d = Matrix::from_columns(&dst.map(Clone::clone));
    let inv = s.try_inverse().expect("sources are linearly independent");
    // the square's maps are integral; remove inversion noise
    (d * inv).map(|x| if (x - x.round()).abs() < 1e-12 { x.round() } else { x })
}

fn symmetry(images: [&str; 3], kind: SquareMapKind) -> SquareMap {
    let [a, b, c] = ["s00", "s10", "s01"].map(square_vertex);
    let [x, y, z] = images.map(square_vertex);
    let matrix = map_from_images([&a, &b, &c], [&x, &y, &z]);
    SquareMap { matrix, kind }
}

impl SquareMap {
    /// `s00 → s10 → s11 → s01 → s00`.
    pub fn rotation() -> Self {
        let m = symmetry(["s10", "s11", "s00"], SquareMapKind::Rotation);
        debug_assert!((&m.matrix * square_vertex("s11") - square_vertex("s01")).amax() < 1e-12);
        m
    }

    /// Swaps `s00 ↔ s11`, fixes `s10` and `s01`.
    pub fn reflection() -> Self {
        let m = symmetry(["s11", "s10", "s01"], SquareMapKind::Reflection);
        debug_assert!((&m.matrix * square_vertex("s11") - square_vertex("s00")).amax() < 1e-12);
        m
    }

    /// Effects to states: `f_x ↦ s00`, `f_y ↦ s10`, `1 − f_y ↦ s01`.
    pub fn iota() -> Self {
        let fx = vector(&[1.0, 0.0, 0.0]);
        let fy = vector(&[0.0, 1.0, 0.0]);
        let not_fy = vector(&[0.0, -1.0, 1.0]);
        let [a, b, c] = ["s00", "s10", "s01"].map(square_vertex);
        SquareMap {
            matrix: map_from_images([&fx, &fy, &not_fy], [&a, &b, &c]),
            kind: SquareMapKind::Iota,
        }
    }

    /// Any map sending the square's state cone into itself.
    pub fn general(matrix: Matrix, tol: f64) -> Result<Self> {
        check_positive(&matrix, tol)?;
        Ok(SquareMap {
            matrix,
            kind: SquareMapKind::GeneralPositive,
        })
    }

    pub fn to_channel(&self) -> Result<Channel> {
        let k = boxworld_square();
        validate_channel(&self.matrix, &k, &k, 1e-12)
    }
}

pub fn square_rotation() -> Channel {
    SquareMap::rotation().to_channel().expect("R is a channel")
}

pub fn square_reflection() -> Channel {
    SquareMap::reflection().to_channel().expect("M is a channel")
}

pub fn iota() -> Matrix {
    SquareMap::iota().matrix
}

/// `x_0 = ½(s00 ⊗ (s01 − s00) + s10 ⊗ s00 + s01 ⊗ s10)`.
pub fn pr_box_state() -> Vector {
    let [s00, s10, s01] = ["s00", "s10", "s01"].map(square_vertex);
    (kron(&s00, &(&s01 - &s00)) + kron(&s10, &s00) + kron(&s01, &s10)) * 0.5
}

fn check_positive(psi: &Matrix, tol: f64) -> Result<()> {
    if psi.shape() != (3, 3) {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: if psi.nrows() != 3 { psi.nrows() } else { psi.ncols() },
        });
    }
    if psi.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let k = boxworld_square();
    let cone = ConeRep::from_generators(3, k.vertices().to_vec());
    for (vertex, s) in k.vertices().iter().enumerate() {
        if !cone_contains(&cone, &(psi * s), tol)? {
            return Err(Error::NotPositive { vertex, witness: None });
        }
    }
    Ok(())
}

/// `(id ⊗ Ψ)(x_0)` for a positive map `Ψ` with `½⟨Ψ(s10) + Ψ(s01), 1⟩ = 1`.
pub fn state_from_positive_map(psi: &Matrix, tol: f64) -> Result<Vector> {
    check_positive(psi, tol)?;
    let k = boxworld_square();
    let u = k.unit();
    let norm = 0.5 * (psi * (square_vertex("s10") + square_vertex("s01"))).dot(&u);
    if (norm - 1.0).abs() > tol.max(1e-12) {
        return Err(Error::NotNormalized(norm));
    }
    let state = apply_on_leg(psi, &pr_box_state(), 3, 3, Leg::B)?;
    if !max_tensor_contains(&k, &k, &state, tol.max(1e-9))? {
        return Err(Error::NumericalFailure(
            "image of the PR-box state left the maximal product".into(),
        ));
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::positive_generators;
    use crate::geometry::{max_abs_diff, same_point_set};
    use crate::tensor::{entangled_vertices, is_separable, BipartiteContext};

    #[test]
    fn matrices_match_closed_forms() {
        let r = Matrix::from_row_slice(3, 3, &[0.0, -1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let m = Matrix::from_row_slice(3, 3, &[0.0, -1.0, 1.0, -1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let i = Matrix::from_row_slice(3, 3, &[0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0]);
        assert_eq!(square_rotation().matrix, r);
        assert_eq!(square_reflection().matrix, m);
        assert_eq!(iota(), i);
    }

    #[test]
    fn group_relations() {
        let r = square_rotation().matrix;
        let m = square_reflection().matrix;
        let id = Matrix::identity(3, 3);
        assert!((r.pow(4) - &id).amax() < 1e-12);
        assert!((&m * &m - &id).amax() < 1e-12);
        assert!((r.pow(2) - &id).amax() > 0.5);
        assert!((&r * square_vertex("s11") - square_vertex("s01")).amax() < 1e-12);
        // M R M = R⁻¹
        assert!((&m * &r * &m - r.pow(3)).amax() < 1e-12);
    }

    #[test]
    fn iota_maps_effect_generators_onto_state_generators() {
        let k = boxworld_square();
        let i = iota();
        assert!(i.determinant().abs() > 0.5);
        let images: Vec<Vector> = positive_generators(&k).unwrap().iter().map(|g| &i * g).collect();
        assert!(same_point_set(&images, k.vertices(), 1e-12));
    }

    #[test]
    fn pr_box_statistics() {
        let x0 = pr_box_state();
        let u = vector(&[0.0, 0.0, 1.0]);
        let fx = vector(&[1.0, 0.0, 0.0]);
        let fy = vector(&[0.0, 1.0, 0.0]);
        assert!((x0.dot(&kron(&u, &u)) - 1.0).abs() < 1e-15);
        assert!(x0.dot(&kron(&fx, &fx)).abs() < 1e-15);
        assert!((x0.dot(&kron(&fx, &(&u - &fx))) - 0.5).abs() < 1e-15);
        for a in [&fx, &fy] {
            for b in [&fx, &fy] {
                let p = x0.dot(&kron(a, b));
                assert!(p.abs() < 1e-15 || (p - 0.5).abs() < 1e-15);
            }
        }
        let k = boxworld_square();
        assert!(max_tensor_contains(&k, &k, &x0, 1e-9).unwrap());
        assert!(!is_separable(&k, &k, &x0, 1e-9).unwrap().is_separable());
        let ctx = BipartiteContext::max(k.clone(), k.clone());
        for leg in [Leg::A, Leg::B] {
            let m = ctx.marginal_after_tracing(&x0, leg).unwrap();
            assert!(max_abs_diff(&m, &vector(&[0.5, 0.5, 1.0])) < 1e-15);
        }
    }

    #[test]
    fn positive_map_correspondence() {
        let k = boxworld_square();
        let x0 = pr_box_state();
        assert!(max_abs_diff(&state_from_positive_map(&Matrix::identity(3, 3), 1e-9).unwrap(), &x0) < 1e-15);
        // constant map
        let z = square_vertex("s11");
        let mut c = Matrix::zeros(3, 3);
        c.set_column(2, &z);
        let s = state_from_positive_map(&c, 1e-9).unwrap();
        assert!(max_abs_diff(&s, &kron(&k.center(), &z)) < 1e-12);
        assert!(is_separable(&k, &k, &s, 1e-9).unwrap().is_separable());
        // the dihedral images of x0 are exactly the entangled vertices
        let r = square_rotation().matrix;
        let m = square_reflection().matrix;
        let mut group = Vec::new();
        for a in 0..4 {
            for b in 0..2 {
                group.push(r.pow(a) * m.pow(b));
            }
        }
        let images: Vec<Vector> = group
            .iter()
            .map(|g| state_from_positive_map(g, 1e-9).unwrap())
            .collect();
        let ent: Vec<Vector> = entangled_vertices(&k, &k).unwrap().into_iter().map(|(v, _)| v).collect();
        assert_eq!(ent.len(), 8);
        assert!(same_point_set(&images, &ent, 1e-9));
    }

    #[test]
    fn rejects_bad_maps() {
        let neg = -Matrix::identity(3, 3);
        assert!(matches!(state_from_positive_map(&neg, 1e-9), Err(Error::NotPositive { .. })));
        let twice = Matrix::identity(3, 3) * 2.0;
        assert!(matches!(state_from_positive_map(&twice, 1e-9), Err(Error::NotNormalized(_))));
        assert!(SquareMap::general(neg, 1e-9).is_err());
    }
}
