//! Minimal and maximal tensor products, separability and partial contraction.
//!
//! Bipartite vectors use the row-major Kronecker convention: coordinate
//! `(i, j)` sits at `i * dim_B + j`, so `φ` reshapes to a `dim_A × dim_B`
//! matrix `X` with `⟨φ, f ⊗ g⟩ = fᵀ X g`.

use crate::effects::{is_effect, positive_generators, Effect};
use crate::error::{Error, Result};
use crate::geometry::{
    cone_section_vertices, kron, kron_all, kron_matrix, max_abs_diff, separating_functional,
    DdConfig, Matrix, Vector, EQ_TOL,
};
use crate::state_space::{Functional, StateSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Leg {
    A,
    B,
}

/// How composite state sets are formed.
#[derive(Debug, Clone, PartialEq)]
pub enum TensorRule {
    Min,
    Max,
    /// A user-supplied polytope between the minimal and maximal products.
    Explicit(Vec<Vector>),
}

impl TensorRule {
    pub fn name(&self) -> &'static str {
        match self {
            TensorRule::Min => "min",
            TensorRule::Max => "max",
            TensorRule::Explicit(_) => "explicit",
        }
    }
}

/// Two factor spaces together with a tensor rule.
#[derive(Debug, Clone)]
pub struct BipartiteContext {
    pub a: StateSpace,
    pub b: StateSpace,
    pub rule: TensorRule,
}

fn matrix_view(phi: &Vector, da: usize, db: usize) -> Matrix {
    Matrix::from_row_slice(da, db, phi.as_slice())
}

fn flatten(x: &Matrix) -> Vector {
    Vector::from_iterator(x.len(), x.transpose().iter().copied())
}

fn check_len(v: &Vector, expected: usize) -> Result<()> {
    if v.len() != expected {
        Err(Error::DimensionMismatch {
            expected,
            found: v.len(),
        })
    } else {
        Ok(())
    }
}

/// Contracts the given leg of `φ ∈ R^{da·db}` with `f`; the result lives on
/// the other leg.
pub fn contract_leg(phi: &Vector, da: usize, db: usize, f: &Vector, leg: Leg) -> Result<Vector> {
    check_len(phi, da * db)?;
    let x = matrix_view(phi, da, db);
    match leg {
        Leg::B => {
            check_len(f, db)?;
            Ok(x * f)
        }
        Leg::A => {
            check_len(f, da)?;
            Ok(x.tr_mul(f))
        }
    }
}

/// Applies a linear map to one leg: `(id ⊗ M)φ` or `(M ⊗ id)φ`.
pub fn apply_on_leg(m: &Matrix, phi: &Vector, da: usize, db: usize, leg: Leg) -> Result<Vector> {
    check_len(phi, da * db)?;
    let x = matrix_view(phi, da, db);
    match leg {
        Leg::B => {
            check_len(&Vector::zeros(m.ncols()), db)?;
            Ok(flatten(&(x * m.transpose())))
        }
        Leg::A => {
            check_len(&Vector::zeros(m.ncols()), da)?;
            Ok(flatten(&(m * x)))
        }
    }
}

/// Exchanges the two legs of a bipartite vector.
pub fn swap_legs(phi: &Vector, da: usize, db: usize) -> Vector {
    flatten(&matrix_view(phi, da, db).transpose())
}

/// Matrix of `v ↦ (id ⊗ … ⊗ fᵀ ⊗ … ⊗ id) v`, contracting factor `leg` of a
/// multipartite vector with `f`.
pub fn contraction_matrix(dims: &[usize], leg: usize, f: &Vector) -> Matrix {
    dims.iter()
        .enumerate()
        .fold(Matrix::identity(1, 1), |acc, (i, &d)| {
            let factor = if i == leg {
                Matrix::from_row_slice(1, d, f.as_slice())
            } else {
                Matrix::identity(d, d)
            };
            kron_matrix(&acc, &factor)
        })
}

/// All Kronecker products `v_1 ⊗ … ⊗ v_n` with `v_i` drawn from `lists[i]`,
/// in lexicographic order of the indices.
pub fn kron_products(lists: &[&[Vector]]) -> Vec<Vector> {
    let mut out: Vec<Vec<&Vector>> = vec![Vec::new()];
    for list in lists {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                list.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(kron_all).collect()
}

pub fn min_tensor(a: &StateSpace, b: &StateSpace) -> Result<StateSpace> {
    let dim = a.lifted_dim() * b.lifted_dim();
    let cap = 256;
    if dim > cap {
        return Err(Error::DimensionTooLarge { dim, cap });
    }
    let products = kron_products(&[a.vertices(), b.vertices()]);
    StateSpace::from_lifted(format!("{}⊗min{}", a.name(), b.name()), products)
}

/// Product generators `g_A ⊗ g_B` of the effect cone dual to the maximal
/// tensor product.
pub fn product_generators(spaces: &[&StateSpace]) -> Result<Vec<Vector>> {
    let gens: Vec<Vec<Vector>> = spaces
        .iter()
        .map(|k| positive_generators(k).map(|g| g.as_ref().clone()))
        .collect::<Result<_>>()?;
    let refs: Vec<&[Vector]> = gens.iter().map(Vec::as_slice).collect();
    Ok(kron_products(&refs))
}

pub fn max_tensor_contains(a: &StateSpace, b: &StateSpace, phi: &Vector, tol: f64) -> Result<bool> {
    check_len(phi, a.lifted_dim() * b.lifted_dim())?;
    let u = kron(&a.unit(), &b.unit());
    if (phi.dot(&u) - 1.0).abs() > tol {
        return Ok(false);
    }
    Ok(product_generators(&[a, b])?
        .iter()
        .all(|g| phi.dot(g) >= -tol))
}

/// Vertex enumeration of the maximal tensor product.
pub fn max_tensor_vertices(a: &StateSpace, b: &StateSpace) -> Result<StateSpace> {
    let gens = product_generators(&[a, b])?;
    let u = kron(&a.unit(), &b.unit());
    let mut verts = cone_section_vertices(&gens, &u, &DdConfig::default())?;
    let d = u.len();
    for v in verts.iter_mut() {
        v[d - 1] = 1.0;
        v.apply(|c| {
            if c.abs() < 1e-13 {
                *c = 0.0
            }
        });
    }
    // products first, in factor order, then the entangled vertices
    let products = kron_products(&[a.vertices(), b.vertices()]);
    let mut ordered: Vec<Vector> = Vec::with_capacity(verts.len());
    for p in &products {
        if let Some(i) = verts.iter().position(|v| max_abs_diff(v, p) < EQ_TOL) {
            verts.swap_remove(i);
            ordered.push(p.clone());
        }
    }
    verts.sort_by(|x, y| crate::geometry::lex_cmp(x, y, EQ_TOL));
    ordered.extend(verts);
    StateSpace::from_lifted(format!("{}⊗max{}", a.name(), b.name()), ordered)
}

/// Linear functional on the composite that is nonnegative on all product
/// states; `value` is its (negative) pairing with the tested state.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementWitness {
    pub functional: Vector,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Separability {
    /// Weights over the product vertices `kron(a_i, b_j)`, index `i * n_B + j`.
    Separable { weights: Vector },
    Entangled { witness: EntanglementWitness },
}

impl Separability {
    pub fn is_separable(&self) -> bool {
        matches!(self, Separability::Separable { .. })
    }
}

pub fn is_separable(a: &StateSpace, b: &StateSpace, phi: &Vector, tol: f64) -> Result<Separability> {
    check_len(phi, a.lifted_dim() * b.lifted_dim())?;
    let u = kron(&a.unit(), &b.unit());
    let norm = phi.dot(&u);
    if (norm - 1.0).abs() > tol.max(EQ_TOL) {
        return Err(Error::NotNormalized(norm));
    }
    let products = kron_products(&[a.vertices(), b.vertices()]);
    let lp = crate::geometry::LpProblem::feasibility(Matrix::from_columns(&products), phi.clone());
    if let crate::geometry::LpOutcome::Optimal { point, .. } = crate::geometry::lp_solve(&lp, tol)? {
        return Ok(Separability::Separable { weights: point });
    }
    let sep = match separating_functional(&products, phi, tol) {
        Ok(s) => s,
        Err(Error::NotSeparable) => {
            return Err(Error::NumericalFailure(
                "membership and separation programs disagree".into(),
            ))
        }
        Err(e) => return Err(e),
    };
    // on normalized vectors n·v + o = ⟨v, n + o·u⟩; flip so products are ≥ 0
    let w = -(&sep.normal + &u * sep.offset);
    let scale = -w.dot(phi);
    let functional = w / scale;
    Ok(Separability::Entangled {
        witness: EntanglementWitness {
            value: functional.dot(phi),
            functional,
        },
    })
}

/// Separability decided by the theorem-free route: every maximal-product
/// vertex is tested for membership in the minimal product.
pub fn min_equals_max(a: &StateSpace, b: &StateSpace) -> Result<bool> {
    Ok(entangled_vertices(a, b)?.is_empty())
}

/// Vertices of `A ⊗max B` outside `A ⊗min B`, each with its witness.
pub fn entangled_vertices(
    a: &StateSpace,
    b: &StateSpace,
) -> Result<Vec<(Vector, EntanglementWitness)>> {
    let max = max_tensor_vertices(a, b)?;
    let mut out = Vec::new();
    for v in max.vertices() {
        if let Separability::Entangled { witness } = is_separable(a, b, v, 1e-9)? {
            out.push((v.clone(), witness));
        }
    }
    Ok(out)
}

/// Outcome of conditioning a bipartite state on an effect.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditional {
    pub probability: f64,
    /// Absent when the probability vanishes.
    pub state: Option<Functional>,
}

impl BipartiteContext {
    /// Builds a context; explicit rules must sit between the minimal and the
    /// maximal tensor product.
    pub fn new(a: StateSpace, b: StateSpace, rule: TensorRule) -> Result<Self> {
        if let TensorRule::Explicit(vs) = &rule {
            let d = a.lifted_dim() * b.lifted_dim();
            if vs.is_empty() {
                return Err(Error::EmptyInput);
            }
            for v in vs {
                check_len(v, d)?;
                if !max_tensor_contains(&a, &b, v, 1e-9)? {
                    return Err(Error::CpViolation(
                        "explicit vertex outside the maximal tensor product".into(),
                    ));
                }
            }
            let hull = StateSpace::from_lifted("explicit", vs.clone())?;
            for p in kron_products(&[a.vertices(), b.vertices()]) {
                if !hull.contains(&p, 1e-9)? {
                    return Err(Error::CpViolation(
                        "explicit rule misses a product state".into(),
                    ));
                }
            }
            let rule = TensorRule::Explicit(hull.vertices().to_vec());
            return Ok(BipartiteContext { a, b, rule });
        }
        Ok(BipartiteContext { a, b, rule })
    }

    pub fn min(a: StateSpace, b: StateSpace) -> Self {
        BipartiteContext {
            a,
            b,
            rule: TensorRule::Min,
        }
    }

    pub fn max(a: StateSpace, b: StateSpace) -> Self {
        BipartiteContext {
            a,
            b,
            rule: TensorRule::Max,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.a.lifted_dim(), self.b.lifted_dim())
    }

    pub fn unit(&self) -> Effect {
        kron(&self.a.unit(), &self.b.unit())
    }

    pub fn space(&self, leg: Leg) -> &StateSpace {
        match leg {
            Leg::A => &self.a,
            Leg::B => &self.b,
        }
    }

    /// The composite state space under this context's rule.
    pub fn state_space(&self) -> Result<StateSpace> {
        match &self.rule {
            TensorRule::Min => min_tensor(&self.a, &self.b),
            TensorRule::Max => max_tensor_vertices(&self.a, &self.b),
            TensorRule::Explicit(vs) => StateSpace::from_lifted("explicit", vs.clone()),
        }
    }

    pub fn contains(&self, phi: &Vector, tol: f64) -> Result<bool> {
        match &self.rule {
            TensorRule::Min => Ok(is_separable(&self.a, &self.b, phi, tol)
                .map(|s| s.is_separable())
                .unwrap_or(false)),
            TensorRule::Max => max_tensor_contains(&self.a, &self.b, phi, tol),
            TensorRule::Explicit(vs) => {
                check_len(phi, self.a.lifted_dim() * self.b.lifted_dim())?;
                StateSpace::from_lifted("explicit", vs.clone())?.contains(phi, tol)
            }
        }
    }

    /// `⟨result, g⟩ = ⟨φ, g ⊗ f⟩` (leg B) or `⟨φ, f ⊗ g⟩` (leg A).
    pub fn partial_contract(&self, phi: &Vector, f: &Effect, leg: Leg) -> Result<Functional> {
        let (da, db) = self.dims();
        contract_leg(phi, da, db, f, leg)
    }

    /// Marginal on the leg that survives contracting `leg` with the unit.
    pub fn marginal_after_tracing(&self, phi: &Vector, leg: Leg) -> Result<Functional> {
        self.partial_contract(phi, &self.space(leg).unit(), leg)
    }

    pub fn conditional_state(
        &self,
        phi: &Vector,
        f: &Effect,
        leg: Leg,
        tol: f64,
    ) -> Result<Conditional> {
        if !is_effect(self.space(leg), f, tol.max(1e-9))? {
            return Err(Error::NotAnEffect);
        }
        let unnormalized = self.partial_contract(phi, f, leg)?;
        let probability = *unnormalized.as_slice().last().expect("nonempty");
        if probability <= tol {
            return Ok(Conditional {
                probability: probability.max(0.0),
                state: None,
            });
        }
        Ok(Conditional {
            probability,
            state: Some(unnormalized / probability),
        })
    }

    /// When a marginal of `φ` is pure, `φ` must be the product of its
    /// marginals; returns that factorization, or `None` when both marginals
    /// are mixed. A pure marginal without product form signals an
    /// inconsistent rule and is reported as an error.
    pub fn product_decomposition_if_pure_marginal(
        &self,
        phi: &Vector,
        tol: f64,
    ) -> Result<Option<(Functional, Functional)>> {
        let y = self.marginal_after_tracing(phi, Leg::B)?;
        let z = self.marginal_after_tracing(phi, Leg::A)?;
        let tol = tol.max(1e-12);
        let pure_a = self.a.matching_vertex(&y, tol).is_some();
        let pure_b = self.b.matching_vertex(&z, tol).is_some();
        if !pure_a && !pure_b {
            return Ok(None);
        }
        let residual = max_abs_diff(&kron(&y, &z), phi);
        if residual > tol {
            return Err(Error::MonogamyViolation(residual));
        }
        Ok(Some((y, z)))
    }
}
