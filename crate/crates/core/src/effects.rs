//! The effect algebra `E(K) = [0, 1_K]` and restricted theories.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::linalg::{null_space, rank, rows_matrix, RANK_TOL};
use crate::geometry::{
    cone_contains, cone_section_vertices, double_description, lex_cmp, polytope_vertices,
    unit_vector, ConeRep, DdConfig, Matrix, Vector, EQ_TOL, SIGN_TOL,
};
use crate::state_space::StateSpace;

/// Elements of `A(K)`, paired with functionals by the dot product.
pub type Effect = Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct EffectAlgebra {
    pub unit: Effect,
    /// Extreme rays of `A(K)⁺`, each scaled to maximal value 1 on `K`.
    pub positive_generators: Vec<Effect>,
    /// Extreme points of `E(K)`, sorted lexicographically.
    pub effect_vertices: Vec<Effect>,
}

fn require_full_dim(k: &StateSpace) -> Result<()> {
    let r = rank(&k.vertex_matrix(), RANK_TOL);
    if r < k.lifted_dim() {
        return Err(Error::DegenerateCone(format!(
            "vertices of {} span only {r} of {} lifted dimensions",
            k.name(),
            k.lifted_dim()
        )));
    }
    Ok(())
}

/// Extreme rays of `A(K)⁺`, normalized so that each takes maximal value 1 on
/// `K`. Cached per state space.
pub fn positive_generators(k: &StateSpace) -> Result<Arc<Vec<Effect>>> {
    if let Some(g) = k.generators.get() {
        return Ok(g.clone());
    }
    require_full_dim(k)?;
    let cone = ConeRep::from_generators(k.lifted_dim(), k.vertices().to_vec());
    let full = double_description(&cone, &DdConfig::default())?;
    let mut gens: Vec<Effect> = full
        .facets
        .unwrap_or_default()
        .into_iter()
        .map(|f| {
            let top = k.vertices().iter().map(|v| v.dot(&f)).fold(0.0, f64::max);
            f / top
        })
        .collect();
    gens.sort_by(|a, b| lex_cmp(a, b, EQ_TOL));
    Ok(k.generators.get_or_init(|| Arc::new(gens)).clone())
}

/// `E(K)` with generators and extreme points. Cached per state space.
pub fn effect_algebra(k: &StateSpace) -> Result<Arc<EffectAlgebra>> {
    if let Some(a) = k.algebra.get() {
        return Ok(a.clone());
    }
    let positive_generators = positive_generators(k)?.as_ref().clone();
    let dim = k.lifted_dim();
    let mut halfspaces = Vec::with_capacity(2 * k.num_vertices());
    for x in k.vertices() {
        halfspaces.push((x.clone(), 0.0));
        halfspaces.push((-x, 1.0));
    }
    let mut effect_vertices = polytope_vertices(&halfspaces, dim, &DdConfig::default())?;
    for f in effect_vertices.iter_mut() {
        // exact zeros keep the sorted order and printed output stable
        f.apply(|c| {
            if c.abs() < 1e-13 {
                *c = 0.0
            }
        });
    }
    effect_vertices.sort_by(|a, b| lex_cmp(a, b, EQ_TOL));
    let algebra = EffectAlgebra {
        unit: k.unit(),
        positive_generators,
        effect_vertices,
    };
    Ok(k.algebra.get_or_init(|| Arc::new(algebra)).clone())
}

/// `0 ≤ ⟨x, f⟩ ≤ 1` on every vertex, up to `tol`.
pub fn is_effect(k: &StateSpace, f: &Effect, tol: f64) -> Result<bool> {
    k.check_dim(f)?;
    Ok(k.vertices().iter().all(|x| {
        let v = x.dot(f);
        v >= -tol && v <= 1.0 + tol
    }))
}

/// `f⊥ = 1_K − f`.
pub fn complement(k: &StateSpace, f: &Effect) -> Result<Effect> {
    if !is_effect(k, f, SIGN_TOL)? {
        return Err(Error::NotAnEffect);
    }
    Ok(k.unit() - f)
}

/// `f ≤ g` in the order of `A(K)`.
pub fn effect_leq(k: &StateSpace, f: &Effect, g: &Effect, tol: f64) -> Result<bool> {
    k.check_dim(f)?;
    k.check_dim(g)?;
    let d = g - f;
    Ok(k.vertices().iter().all(|x| x.dot(&d) >= -tol))
}

/// `S(E)` expressed in coordinates where the unit is the last basis vector.
#[derive(Debug, Clone)]
pub struct RestrictedTheory {
    pub space: StateSpace,
    /// Maps functionals in the input coordinates to the new ones; its last
    /// row is the unit. Effects transform with the inverse transpose.
    pub transform: Matrix,
}

impl RestrictedTheory {
    /// Rewrites an effect given in the input coordinates.
    pub fn effect_in_new_coordinates(&self, f: &Effect) -> Result<Effect> {
        let inv_t = self
            .transform
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NumericalFailure("singular basis change".into()))?;
        Ok(inv_t.tr_mul(f))
    }
}

/// `S(E) = {ψ ∈ cone(E)* : ⟨ψ, u⟩ = 1}`.
pub fn state_space_of_effects(effect_set: &[Effect], unit: &Effect) -> Result<RestrictedTheory> {
    let dim = unit.len();
    if effect_set.is_empty() || dim == 0 {
        return Err(Error::EmptyInput);
    }
    for f in effect_set {
        if f.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: f.len(),
            });
        }
    }
    let r = rank(&rows_matrix(effect_set, dim), RANK_TOL);
    if r < dim {
        return Err(Error::DoesNotSeparate { rank: r, dim });
    }
    let cone = ConeRep::from_generators(dim, effect_set.to_vec());
    if !cone_contains(&cone, unit, SIGN_TOL)? {
        return Err(Error::NoUnit);
    }
    let points = match cone_section_vertices(effect_set, unit, &DdConfig::default()) {
        Err(Error::Unbounded) => return Err(Error::NoUnit),
        other => other?,
    };
    let transform = if *unit == unit_vector(dim, dim - 1) {
        Matrix::identity(dim, dim)
    } else {
        let perp = null_space(&rows_matrix(std::slice::from_ref(unit), dim), RANK_TOL);
        let mut t = Matrix::zeros(dim, dim);
        for (i, c) in perp.column_iter().enumerate() {
            t.set_row(i, &c.transpose());
        }
        t.set_row(dim - 1, &unit.transpose());
        t
    };
    let vertices = points
        .iter()
        .map(|p| {
            let mut q = &transform * p;
            q[dim - 1] = 1.0;
            q.apply(|c| {
                if c.abs() < 1e-13 {
                    *c = 0.0
                }
            });
            q
        })
        .collect();
    let space = StateSpace::from_lifted("S(E)", vertices)?;
    Ok(RestrictedTheory { space, transform })
}
