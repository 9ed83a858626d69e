//! Polyhedral cones in generator (V) and facet (H) form.
//!
//! A facet vector `a` stands for the half-space `⟨a, v⟩ ≥ 0`. Conversion in
//! either direction reduces to one routine, [`extreme_rays`], which runs the
//! incremental double-description method on a pointed cone after splitting
//! off its lineality space.

use super::linalg::{column_span, null_space, rank, rows_matrix, RANK_TOL};
use super::lp::{lp_solve, LpOutcome, LpProblem};
use super::{dedup_directions, max_abs_diff, normalize_max, Matrix, Vector, EQ_TOL, SIGN_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DdConfig {
    /// Largest ambient dimension accepted by the enumeration routines.
    pub max_dim: usize,
}

impl Default for DdConfig {
    fn default() -> Self {
        DdConfig { max_dim: 10 }
    }
}

impl DdConfig {
    fn check(&self, dim: usize) -> Result<()> {
        if dim > self.max_dim {
            Err(Error::DimensionTooLarge {
                dim,
                cap: self.max_dim,
            })
        } else {
            Ok(())
        }
    }
}

/// A polyhedral cone with its generators and, when known, its facets.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeRep {
    pub dim: usize,
    pub generators: Vec<Vector>,
    pub facets: Option<Vec<Vector>>,
}

impl ConeRep {
    pub fn from_generators(dim: usize, generators: Vec<Vector>) -> Self {
        ConeRep {
            dim,
            generators,
            facets: None,
        }
    }

    /// Cone given only by its facet inequalities; generators are empty until
    /// [`double_description`] fills them in.
    pub fn from_facets(dim: usize, facets: Vec<Vector>) -> Self {
        ConeRep {
            dim,
            generators: Vec::new(),
            facets: Some(facets),
        }
    }

    fn validate(&self) -> Result<()> {
        for v in self.generators.iter().chain(self.facets.iter().flatten()) {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: v.len(),
                });
            }
            if !super::is_finite(v) {
                return Err(Error::NonFinite);
            }
        }
        Ok(())
    }
}

/// Extreme rays of `{x : ⟨a, x⟩ ≥ 0 for every a in inequalities}`.
///
/// When the cone has a lineality space, an orthonormal basis `±l` of it is
/// appended to the pointed part's rays.
pub fn extreme_rays(inequalities: &[Vector], dim: usize, cfg: &DdConfig) -> Result<Vec<Vector>> {
    cfg.check(dim)?;
    let ineqs: Vec<Vector> = inequalities
        .iter()
        .filter(|a| a.amax() > 0.0)
        .cloned()
        .collect();
    let mut rays = Vec::new();
    let lineality = if ineqs.is_empty() {
        Matrix::identity(dim, dim)
    } else {
        let a = rows_matrix(&ineqs, dim);
        let lineality = null_space(&a, RANK_TOL);
        // restrict to the row space, where the cone is pointed
        let row_space = column_span(&a.transpose(), RANK_TOL);
        let reduced: Vec<Vector> = ineqs.iter().map(|v| row_space.tr_mul(v)).collect();
        for z in pointed_rays(&reduced, row_space.ncols())? {
            rays.push(normalize_max(&(&row_space * z)));
        }
        lineality
    };
    for l in lineality.column_iter() {
        let l = normalize_max(&l.into_owned());
        rays.push(-&l);
        rays.push(l);
    }
    Ok(dedup_directions(rays, EQ_TOL))
}

fn scaled_dot(a: &Vector, x: &Vector) -> f64 {
    a.dot(x) / a.amax()
}

/// Incremental double description for a pointed cone `{z : A z ≥ 0}` where
/// `A` has full column rank `r`.
fn pointed_rays(ineqs: &[Vector], r: usize) -> Result<Vec<Vector>> {
    if r == 0 {
        return Ok(Vec::new());
    }
    // initial simplicial cone from the first r independent rows, in input order
    let mut chosen: Vec<usize> = Vec::with_capacity(r);
    for (i, a) in ineqs.iter().enumerate() {
        let mut trial: Vec<Vector> = chosen.iter().map(|&k| ineqs[k].clone()).collect();
        trial.push(a.clone());
        if rank(&rows_matrix(&trial, r), RANK_TOL) == trial.len() {
            chosen.push(i);
            if chosen.len() == r {
                break;
            }
        }
    }
    if chosen.len() < r {
        return Err(Error::DegenerateCone(
            "inequalities do not have full rank on their row space".into(),
        ));
    }
    let basis = rows_matrix(
        &chosen.iter().map(|&k| ineqs[k].clone()).collect::<Vec<_>>(),
        r,
    );
    let inv = basis
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("singular initial basis".into()))?;
    let mut processed: Vec<usize> = chosen.clone();
    let mut rays: Vec<Ray> = inv
        .column_iter()
        .map(|c| Ray::new(normalize_max(&c.into_owned()), ineqs, &processed))
        .collect();

    for (i, a) in ineqs.iter().enumerate() {
        if chosen.contains(&i) {
            continue;
        }
        let values: Vec<f64> = rays.iter().map(|ray| scaled_dot(a, &ray.dir)).collect();
        let (mut pos, mut neg, mut zero) = (Vec::new(), Vec::new(), Vec::new());
        for (k, &v) in values.iter().enumerate() {
            if v > SIGN_TOL {
                pos.push(k);
            } else if v < -SIGN_TOL {
                neg.push(k);
            } else {
                zero.push(k);
            }
        }
        if neg.is_empty() {
            processed.push(i);
            for ray in rays.iter_mut() {
                ray.refresh(ineqs, &processed);
            }
            continue;
        }
        let mut next: Vec<Vector> = pos
            .iter()
            .chain(zero.iter())
            .map(|&k| rays[k].dir.clone())
            .collect();
        for &p in &pos {
            for &n in &neg {
                let common: Vec<usize> = rays[p]
                    .zeros
                    .iter()
                    .copied()
                    .filter(|z| rays[n].zeros.contains(z))
                    .collect();
                if common.len() + 2 < r {
                    continue;
                }
                let tight = rows_matrix(
                    &common.iter().map(|&k| ineqs[k].clone()).collect::<Vec<_>>(),
                    r,
                );
                if r >= 2 && rank(&tight, RANK_TOL) != r - 2 {
                    continue;
                }
                let new = &rays[n].dir * values[p] - &rays[p].dir * values[n];
                next.push(normalize_max(&new));
            }
        }
        processed.push(i);
        let next = dedup_directions(next, EQ_TOL);
        rays = next
            .into_iter()
            .map(|d| Ray::new(d, ineqs, &processed))
            .collect();
    }
    Ok(rays.into_iter().map(|r| r.dir).collect())
}

struct Ray {
    dir: Vector,
    zeros: Vec<usize>,
}

impl Ray {
    fn new(dir: Vector, ineqs: &[Vector], processed: &[usize]) -> Self {
        let mut ray = Ray {
            dir,
            zeros: Vec::new(),
        };
        ray.refresh(ineqs, processed);
        ray
    }

    fn refresh(&mut self, ineqs: &[Vector], processed: &[usize]) {
        self.zeros = processed
            .iter()
            .copied()
            .filter(|&k| scaled_dot(&ineqs[k], &self.dir).abs() <= SIGN_TOL)
            .collect();
    }
}

/// Replaces each computed ray by a parallel input vector when one exists, so
/// that callers get their own scaling back.
fn prefer_inputs(rays: Vec<Vector>, inputs: &[Vector]) -> Vec<Vector> {
    rays.into_iter()
        .map(|r| {
            inputs
                .iter()
                .find(|g| g.amax() > 0.0 && max_abs_diff(&normalize_max(g), &r) < EQ_TOL)
                .cloned()
                .unwrap_or(r)
        })
        .collect()
}

/// Completes a cone representation: irredundant extreme rays and irredundant
/// facets. A cone without full dimension gets `±n` facet pairs for the normals
/// of its span.
pub fn double_description(input: &ConeRep, cfg: &DdConfig) -> Result<ConeRep> {
    input.validate()?;
    let dim = input.dim;
    cfg.check(dim)?;
    let has_generators = !input.generators.is_empty();
    let facets = match (&input.facets, has_generators) {
        (_, true) => {
            if input.generators.iter().all(|g| g.amax() == 0.0) {
                return Err(Error::DegenerateCone("all generators are zero".into()));
            }
            extreme_rays(&input.generators, dim, cfg)?
        }
        (Some(f), false) => f.clone(),
        (None, false) => return Err(Error::EmptyInput),
    };
    let generators = extreme_rays(&facets, dim, cfg)?;
    let generators = prefer_inputs(generators, &input.generators);
    // a second pass drops redundant facets that were part of the input
    let facets = if has_generators {
        facets
    } else {
        prefer_inputs(extreme_rays(&generators, dim, cfg)?, &facets)
    };
    Ok(ConeRep {
        dim,
        generators,
        facets: Some(facets),
    })
}

/// Dual cone `{ψ : ⟨ψ, x⟩ ≥ 0 for all x in c}`.
pub fn dual_cone(c: &ConeRep, cfg: &DdConfig) -> Result<ConeRep> {
    let full = double_description(c, cfg)?;
    Ok(ConeRep {
        dim: full.dim,
        generators: full.facets.clone().unwrap_or_default(),
        facets: Some(full.generators),
    })
}

/// Membership in the cone generated by `c.generators`, decided by LP.
pub fn cone_contains(c: &ConeRep, v: &Vector, tol: f64) -> Result<bool> {
    if v.len() != c.dim {
        return Err(Error::DimensionMismatch {
            expected: c.dim,
            found: v.len(),
        });
    }
    if c.generators.is_empty() {
        return Ok(v.amax() <= tol);
    }
    let a = Matrix::from_columns(&c.generators);
    let p = LpProblem::feasibility(a, v.clone());
    Ok(lp_solve(&p, tol)?.is_feasible())
}

/// Affine functional `v ↦ ⟨normal, v⟩ + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFunctional {
    pub normal: Vector,
    pub offset: f64,
    /// Smallest gap achieved on either side of the hyperplane.
    pub margin: f64,
}

impl AffineFunctional {
    pub fn eval(&self, v: &Vector) -> f64 {
        self.normal.dot(v) + self.offset
    }
}

/// Strict separation of `y` from `conv(vertices)`: the returned functional is
/// `≤ -margin` on every vertex and `≥ margin` at `y`, with the normal confined
/// to the unit max-norm box and the margin maximized.
pub fn separating_functional(vertices: &[Vector], y: &Vector, tol: f64) -> Result<AffineFunctional> {
    let d = y.len();
    if vertices.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(v) = vertices.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: v.len(),
        });
    }
    let nv = vertices.len();
    // columns: n+ (d), n- (d), o+, o-, delta, box slacks (2d), vertex slacks (nv), y slack
    let cols = 2 * d + 3 + 2 * d + nv + 1;
    let rows = 2 * d + nv + 1;
    let mut a = Matrix::zeros(rows, cols);
    let mut b = Vector::zeros(rows);
    let delta = 2 * d + 2;
    let box0 = 2 * d + 3;
    let vs0 = box0 + 2 * d;
    let ys = vs0 + nv;
    for k in 0..d {
        a[(k, k)] = 1.0;
        a[(k, box0 + k)] = 1.0;
        b[k] = 1.0;
        a[(d + k, d + k)] = 1.0;
        a[(d + k, box0 + d + k)] = 1.0;
        b[d + k] = 1.0;
    }
    let fill_affine = |a: &mut Matrix, row: usize, v: &Vector| {
        for k in 0..d {
            a[(row, k)] = v[k];
            a[(row, d + k)] = -v[k];
        }
        a[(row, 2 * d)] = 1.0;
        a[(row, 2 * d + 1)] = -1.0;
    };
    for (i, v) in vertices.iter().enumerate() {
        let row = 2 * d + i;
        fill_affine(&mut a, row, v);
        a[(row, delta)] = 1.0;
        a[(row, vs0 + i)] = 1.0;
    }
    let row = 2 * d + nv;
    fill_affine(&mut a, row, y);
    a[(row, delta)] = -1.0;
    a[(row, ys)] = -1.0;
    let mut c = Vector::zeros(cols);
    c[delta] = -1.0;
    let outcome = lp_solve(&LpProblem::new(c, a, b), SIGN_TOL)?;
    let LpOutcome::Optimal { point, .. } = outcome else {
        return Err(Error::NumericalFailure(
            "separation program must have an optimum".into(),
        ));
    };
    let margin = point[delta];
    if margin <= tol {
        return Err(Error::NotSeparable);
    }
    let normal = Vector::from_fn(d, |k, _| point[k] - point[d + k]);
    let offset = point[2 * d] - point[2 * d + 1];
    Ok(AffineFunctional {
        normal,
        offset,
        margin,
    })
}

/// Vertices of the bounded section `{x : ⟨a, x⟩ ≥ 0 ∀a, ⟨u, x⟩ = 1}` of a
/// pointed cone. Fails with [`Error::Unbounded`] if some extreme ray is
/// orthogonal to `u` or points away from it.
pub fn cone_section_vertices(
    inequalities: &[Vector],
    u: &Vector,
    cfg: &DdConfig,
) -> Result<Vec<Vector>> {
    let dim = u.len();
    let rays = extreme_rays(inequalities, dim, cfg)?;
    let mut out = Vec::with_capacity(rays.len());
    for r in rays {
        let s = u.dot(&r);
        if s <= SIGN_TOL * r.amax().max(1.0) {
            return Err(Error::Unbounded);
        }
        out.push(refine_on_face(inequalities, &(r / s), u));
    }
    Ok(out)
}

/// Re-solves a normalized ray `x` (with `⟨u, x⟩ = 1`) from its active
/// inequalities, removing the rounding accumulated by the incremental
/// combinations.
fn refine_on_face(inequalities: &[Vector], x: &Vector, u: &Vector) -> Vector {
    let mut rows: Vec<Vector> = inequalities
        .iter()
        .filter(|a| a.amax() > 0.0 && scaled_dot(a, x).abs() <= 1e-7 * x.amax().max(1.0))
        .cloned()
        .collect();
    rows.push(u.clone());
    let m = rows_matrix(&rows, x.len());
    let mut rhs = Vector::zeros(rows.len());
    rhs[rows.len() - 1] = 1.0;
    if rank(&m, RANK_TOL) < x.len() {
        return x.clone();
    }
    match m.svd(true, true).solve(&rhs, 1e-14) {
        Ok(y) if max_abs_diff(&y, x) < 1e-6 * x.amax().max(1.0) => y,
        _ => x.clone(),
    }
}

/// Vertices of the polytope `{x : ⟨a_i, x⟩ + b_i ≥ 0}` via homogenization.
pub fn polytope_vertices(halfspaces: &[(Vector, f64)], dim: usize, cfg: &DdConfig) -> Result<Vec<Vector>> {
    cfg.check(dim)?;
    let lifted_cfg = DdConfig {
        max_dim: cfg.max_dim + 1,
    };
    let mut ineqs: Vec<Vector> = halfspaces
        .iter()
        .map(|(a, b)| {
            let mut v = Vector::zeros(dim + 1);
            v.rows_mut(0, dim).copy_from(a);
            v[dim] = *b;
            v
        })
        .collect();
    ineqs.push(super::unit_vector(dim + 1, dim));
    let rays = extreme_rays(&ineqs, dim + 1, &lifted_cfg)?;
    let mut out = Vec::with_capacity(rays.len());
    for r in rays {
        let t = r[dim];
        if t <= SIGN_TOL * r.amax() {
            return Err(Error::Unbounded);
        }
        let z = refine_on_face(&ineqs, &(&r / t), &super::unit_vector(dim + 1, dim));
        out.push(z.rows(0, dim).into_owned());
    }
    Ok(out)
}
