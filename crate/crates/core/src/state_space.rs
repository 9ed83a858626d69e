//! State spaces as vertex-represented polytopes in lifted coordinates.
//!
//! A raw point `x ∈ Rᵈ` is stored as `(x, 1)`; effects pair with states by
//! the Euclidean dot product, and the unit effect is the last standard basis
//! vector.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::effects::EffectAlgebra;
use crate::error::{Error, Result};
use crate::geometry::linalg::{rank, RANK_TOL};
use crate::geometry::{
    dedup_points, is_finite, lp_solve, max_abs_diff, unit_vector, vector, LpOutcome, LpProblem,
    Matrix, Vector, EQ_TOL,
};

/// Elements of `A(K)*`; states are the functionals inside `K`.
pub type Functional = Vector;

/// Default tolerance for membership and feasibility decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance on the last coordinate of a lifted vertex.
const LIFT_TOL: f64 = 1e-12;

#[derive(Clone)]
pub struct StateSpace {
    name: String,
    lifted_dim: usize,
    vertices: Vec<Vector>,
    labels: Vec<String>,
    pub(crate) generators: OnceLock<Arc<Vec<Vector>>>,
    pub(crate) algebra: OnceLock<Arc<EffectAlgebra>>,
}

impl fmt::Debug for StateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateSpace")
            .field("name", &self.name)
            .field("lifted_dim", &self.lifted_dim)
            .field("vertices", &self.vertices.len())
            .finish()
    }
}

impl PartialEq for StateSpace {
    /// Two spaces are equal when they hold the same lifted vertex set; names
    /// and labels are cosmetic.
    fn eq(&self, other: &Self) -> bool {
        self.lifted_dim == other.lifted_dim
            && crate::geometry::same_point_set(&self.vertices, &other.vertices, EQ_TOL)
    }
}

impl StateSpace {
    /// Lifts raw points, drops duplicates and non-extreme points.
    pub fn from_vertices(raw_points: &[Vector]) -> Result<Self> {
        let first = raw_points.first().ok_or(Error::EmptyInput)?;
        let dim = first.len();
        let mut lifted = Vec::with_capacity(raw_points.len());
        for p in raw_points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if !is_finite(p) {
                return Err(Error::NonFinite);
            }
            let mut v = Vector::from_element(dim + 1, 1.0);
            v.rows_mut(0, dim).copy_from(p);
            lifted.push(v);
        }
        Self::from_lifted("K", lifted)
    }

    /// Builds a space from already lifted points; the last coordinate of each
    /// must be 1.
    pub fn from_lifted(name: impl Into<String>, points: Vec<Vector>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyInput)?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::EmptyInput);
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if !is_finite(p) {
                return Err(Error::NonFinite);
            }
            if (p[dim - 1] - 1.0).abs() > LIFT_TOL {
                return Err(Error::NotLifted(p[dim - 1]));
            }
        }
        let points = dedup_points(points, 1e-12);
        let vertices = extreme_subset(&points)?;
        let labels = (0..vertices.len()).map(|i| format!("v{i}")).collect();
        Ok(Self::raw(name.into(), vertices, labels))
    }

    /// Trusted constructor: the caller guarantees the invariants.
    fn raw(name: String, vertices: Vec<Vector>, labels: Vec<String>) -> Self {
        StateSpace {
            name,
            lifted_dim: vertices[0].len(),
            vertices,
            labels,
            generators: OnceLock::new(),
            algebra: OnceLock::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Replaces the vertex labels; they must be distinct, one per vertex.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.vertices.len() {
            return Err(Error::DimensionMismatch {
                expected: self.vertices.len(),
                found: labels.len(),
            });
        }
        let mut sorted: Vec<&String> = labels.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::schema("labels", "duplicate vertex label"));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn lifted_dim(&self) -> usize {
        self.lifted_dim
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Vector {
        &self.vertices[i]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Human-readable vertex names (`s00`… for the square, `s1`… for simplices).
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<&Vector> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| &self.vertices[i])
    }

    /// The unit effect `1_K`.
    pub fn unit(&self) -> Vector {
        unit_vector(self.lifted_dim, self.lifted_dim - 1)
    }

    /// Barycenter of the vertices.
    pub fn center(&self) -> Vector {
        let mut c = Vector::zeros(self.lifted_dim);
        for v in &self.vertices {
            c += v;
        }
        c / self.vertices.len() as f64
    }

    /// Vertices as the columns of a matrix.
    pub fn vertex_matrix(&self) -> Matrix {
        Matrix::from_columns(&self.vertices)
    }

    pub(crate) fn check_dim(&self, v: &Vector) -> Result<()> {
        if v.len() != self.lifted_dim {
            Err(Error::DimensionMismatch {
                expected: self.lifted_dim,
                found: v.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Convex weights expressing `φ` over the vertices, if any exist. The
    /// weights form a basic solution and so use at most `lifted_dim` vertices.
    pub fn convex_weights(&self, phi: &Functional, tol: f64) -> Result<Option<Vector>> {
        self.check_dim(phi)?;
        // the vertex matrix spans the whole cone; normalization pins the section
        if (phi[self.lifted_dim - 1] - 1.0).abs() > tol.max(LIFT_TOL) {
            return Ok(None);
        }
        let p = LpProblem::feasibility(self.vertex_matrix(), phi.clone());
        Ok(match lp_solve(&p, tol)? {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        })
    }

    /// Membership in `K`, which includes `⟨φ, 1_K⟩ = 1`.
    pub fn contains(&self, phi: &Functional, tol: f64) -> Result<bool> {
        Ok(self.convex_weights(phi, tol)?.is_some())
    }

    pub fn is_pure(&self, phi: &Functional, tol: f64) -> Result<bool> {
        if !self.contains(phi, tol)? {
            return Err(Error::NotAState);
        }
        Ok(self.matching_vertex(phi, tol.max(EQ_TOL)).is_some())
    }

    pub(crate) fn matching_vertex(&self, phi: &Vector, tol: f64) -> Option<usize> {
        self.vertices
            .iter()
            .position(|v| v.len() == phi.len() && max_abs_diff(v, phi) <= tol)
    }

    /// `φ ∈ ri(K)`: every line from a vertex through `φ` can be prolonged
    /// beyond `φ` inside `K`.
    pub fn in_relative_interior(&self, phi: &Functional, tol: f64) -> Result<bool> {
        if !self.contains(phi, tol)? {
            return Err(Error::NotAState);
        }
        let n = self.vertices.len();
        for y in &self.vertices {
            // max μ  s.t.  Σλ_i v_i − μ(φ − y) = y,  λ, μ ≥ 0
            let dir = phi - y;
            let mut a = Matrix::zeros(self.lifted_dim, n + 1);
            for (i, v) in self.vertices.iter().enumerate() {
                a.set_column(i, v);
            }
            a.set_column(n, &(-&dir));
            let mut c = Vector::zeros(n + 1);
            c[n] = -1.0;
            match lp_solve(&LpProblem::new(c, a, y.clone()), tol)? {
                LpOutcome::Unbounded => {}
                LpOutcome::Optimal { value, .. } => {
                    if -value <= 1.0 + EQ_TOL {
                        return Ok(false);
                    }
                }
                LpOutcome::Infeasible { .. } => {
                    return Err(Error::NumericalFailure(
                        "prolongation program infeasible at μ = 0".into(),
                    ))
                }
            }
        }
        Ok(true)
    }

    /// Affine independence of the vertices.
    pub fn is_simplex(&self) -> bool {
        self.vertices.len() <= self.lifted_dim
            && rank(&self.vertex_matrix(), RANK_TOL) == self.vertices.len()
    }

    /// Dimension of the affine hull of `K`.
    pub fn affine_dim(&self) -> usize {
        rank(&self.vertex_matrix(), RANK_TOL) - 1
    }
}

/// Keeps the points that are not convex combinations of the others.
fn extreme_subset(points: &[Vector]) -> Result<Vec<Vector>> {
    if points.len() <= 1 {
        return Ok(points.to_vec());
    }
    let mut keep = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let others: Vec<Vector> = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| q.clone())
            .collect();
        let lp = LpProblem::feasibility(Matrix::from_columns(&others), p.clone());
        if !lp_solve(&lp, DEFAULT_TOL)?.is_feasible() {
            keep.push(p.clone());
        }
    }
    Ok(keep)
}

/// The classical state space `S_n`: `s_1 = e_n`, `s_i = e_{i−1} + e_n`.
pub fn simplex(n: usize) -> Result<StateSpace> {
    if n < 1 {
        return Err(Error::InvalidArity(n));
    }
    let vertices = (0..n)
        .map(|i| {
            let mut v = unit_vector(n, n - 1);
            if i > 0 {
                v[i - 1] = 1.0;
            }
            v
        })
        .collect();
    let labels = (1..=n).map(|i| format!("s{i}")).collect();
    Ok(StateSpace::raw(format!("S_{n}"), vertices, labels))
}

/// The boxworld square with vertices `s00, s10, s01, s11`.
pub fn boxworld_square() -> StateSpace {
    let vertices = vec![
        vector(&[0.0, 0.0, 1.0]),
        vector(&[1.0, 0.0, 1.0]),
        vector(&[0.0, 1.0, 1.0]),
        vector(&[1.0, 1.0, 1.0]),
    ];
    let labels = ["s00", "s10", "s01", "s11"].map(String::from).to_vec();
    StateSpace::raw("square".into(), vertices, labels)
}

/// Regular `k`-gon on the unit circle.
pub fn regular_polygon(k: usize) -> Result<StateSpace> {
    if k < 3 {
        return Err(Error::InvalidArity(k));
    }
    let vertices = (0..k)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / k as f64;
            vector(&[a.cos(), a.sin(), 1.0])
        })
        .collect();
    let labels = (0..k).map(|i| format!("v{i}")).collect();
    Ok(StateSpace::raw(format!("polygon_{k}"), vertices, labels))
}
