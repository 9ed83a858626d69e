//! Compatibility of measurements and channels, broadcasting, incompatibility
//! certification, steering and Bell locality — each decided as an LP
//! feasibility problem whose Farkas certificate doubles as a witness.

use crate::channels::{measurement_from_effects, Channel, Measurement};
use crate::effects::Effect;
use crate::error::{Error, Result};
use crate::geometry::linalg::null_space;
use crate::geometry::program::{combine, Block, Expr, ProgramBuilder};
use crate::geometry::{kron_matrix, lp_solve, unit_vector, LpOutcome, LpProblem, Matrix, Vector};
use crate::state_space::{Functional, StateSpace};
use crate::tensor::{contraction_matrix, kron_products, product_generators, TensorRule};

/// Largest composite dimension an LP variable may live in.
pub const MAX_JOINT_DIM: usize = 256;
/// Largest number of product vertices or generator tuples per membership constraint.
pub const MAX_TUPLES: usize = 4096;
/// Bisection steps in [`compatibility_robustness`].
pub const BISECTION_STEPS: usize = 40;
/// Singular-value cutoff for affine dependences among test states.
pub const DEPENDENCE_CUTOFF: f64 = 1e-8;

/// `h_ij` with row sums `f_i` and column sums `g_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEffectGrid {
    pub h: Vec<Vec<Effect>>,
}

impl JointEffectGrid {
    pub fn row_sums(&self) -> Vec<Effect> {
        self.h
            .iter()
            .map(|row| row.iter().fold(Vector::zeros(row[0].len()), |acc, e| acc + e))
            .collect()
    }

    pub fn column_sums(&self) -> Vec<Effect> {
        let n2 = self.h[0].len();
        (0..n2)
            .map(|j| {
                self.h
                    .iter()
                    .fold(Vector::zeros(self.h[0][0].len()), |acc, row| acc + &row[j])
            })
            .collect()
    }
}

/// A channel into `B ⊗ C`, stored as a `(d_B·d_C) × d_A` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct JointChannel {
    pub matrix: Matrix,
    pub dims: (usize, usize),
    pub rule: TensorRule,
}

impl JointChannel {
    /// Contraction of the second output with its unit.
    pub fn first_marginal(&self) -> Matrix {
        let (b, c) = self.dims;
        contraction_matrix(&[b, c], 1, &unit_vector(c, c - 1)) * &self.matrix
    }

    /// Contraction of the first output with its unit.
    pub fn second_marginal(&self) -> Matrix {
        let (b, c) = self.dims;
        contraction_matrix(&[b, c], 0, &unit_vector(b, b - 1)) * &self.matrix
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Compatibilizer {
    Channel(JointChannel),
    EffectGrid(JointEffectGrid),
}

/// Linear functional on the flattened marginal data of a problem (see
/// [`measurement_targets`], [`channel_targets`], [`broadcast_targets`]).
/// Non-negative on every compatible instance; `−1` on the tested one.
#[derive(Debug, Clone, PartialEq)]
pub struct IncompatibilityWitness {
    pub functional: Vector,
}

impl IncompatibilityWitness {
    pub fn evaluate(&self, targets: &Vector) -> Result<f64> {
        if targets.len() != self.functional.len() {
            return Err(Error::DimensionMismatch {
                expected: self.functional.len(),
                found: targets.len(),
            });
        }
        Ok(self.functional.dot(targets))
    }
}

#[derive(Debug, Clone)]
pub struct CompatibilityVerdict {
    pub compatible: bool,
    pub joint: Option<Compatibilizer>,
    pub certificate: Option<IncompatibilityWitness>,
    /// The feasibility program that was solved.
    pub program: LpProblem,
    /// Farkas vector for `program` when infeasible.
    pub farkas: Option<Vector>,
}

/// Effects of both measurements, flattened in order.
pub fn measurement_targets(f: &[Effect], g: &[Effect]) -> Vector {
    Vector::from_vec(f.iter().chain(g).flat_map(|e| e.iter().copied()).collect())
}

/// Both matrices, row-major, in order.
pub fn channel_targets(phi1: &Matrix, phi2: &Matrix) -> Vector {
    let mut v = Vec::with_capacity(phi1.len() + phi2.len());
    for m in [phi1, phi2] {
        for r in 0..m.nrows() {
            v.extend(m.row(r).iter());
        }
    }
    Vector::from_vec(v)
}

/// Each fixed state twice (once per output), in order.
pub fn broadcast_targets(fixed: &[Functional]) -> Vector {
    let v: Vec<f64> = fixed
        .iter()
        .flat_map(|x| x.iter().chain(x.iter()).copied().collect::<Vec<_>>())
        .collect();
    Vector::from_vec(v)
}

enum Membership {
    /// Convex cone over these points (normalization comes from the marginals).
    Hull(Vec<Vector>),
    /// Nonnegative pairing with each generator.
    Dual(Vec<Vector>),
}

fn membership(spaces: &[&StateSpace], rule: &TensorRule) -> Result<(usize, Membership)> {
    let dim: usize = spaces.iter().map(|k| k.lifted_dim()).product();
    if dim > MAX_JOINT_DIM {
        return Err(Error::DimensionTooLarge { dim, cap: MAX_JOINT_DIM });
    }
    let check_count = |n: usize| {
        if n > MAX_TUPLES {
            Err(Error::DimensionTooLarge { dim: n, cap: MAX_TUPLES })
        } else {
            Ok(())
        }
    };
    let m = match rule {
        TensorRule::Min => {
            check_count(spaces.iter().map(|k| k.num_vertices()).product())?;
            let lists: Vec<&[Vector]> = spaces.iter().map(|k| k.vertices()).collect();
            Membership::Hull(kron_products(&lists))
        }
        TensorRule::Max => {
            let counts: Vec<usize> = spaces
                .iter()
                .map(|k| crate::effects::positive_generators(k).map(|g| g.len()))
                .collect::<Result<_>>()?;
            check_count(counts.iter().product())?;
            Membership::Dual(product_generators(spaces)?)
        }
        TensorRule::Explicit(vs) => {
            if spaces.len() != 2 {
                return Err(Error::MalformedProblem(
                    "explicit tensor rules describe bipartite sets only".into(),
                ));
            }
            if let Some(v) = vs.iter().find(|v| v.len() != dim) {
                return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
            }
            Membership::Hull(vs.clone())
        }
    };
    Ok((dim, m))
}

fn constrain(p: &mut ProgramBuilder, exprs: &[Expr], m: &Membership) {
    match m {
        Membership::Hull(points) => {
            let mu = p.nonneg(points.len());
            for (r, expr) in exprs.iter().enumerate() {
                let mut e = expr.clone();
                for (k, pt) in points.iter().enumerate() {
                    mu.push(&mut e, k, -pt[r]);
                }
                p.equal(e, 0.0);
            }
        }
        Membership::Dual(gens) => {
            let s = p.nonneg(gens.len());
            for (k, g) in gens.iter().enumerate() {
                let mut e = combine(exprs, g.iter().copied());
                s.push(&mut e, k, -1.0);
                p.equal(e, 0.0);
            }
        }
    }
}

/// Expressions for the coordinates of a free vector block.
fn vector_exprs(v: &Block) -> Vec<Expr> {
    (0..v.len())
        .map(|i| {
            let mut e = Expr::new();
            v.push(&mut e, i, 1.0);
            e
        })
        .collect()
}

/// Expressions for `J x`, with `J` a free block holding a row-major
/// `rows × x.len()` matrix.
fn matrix_times(j: &Block, rows: usize, x: &Vector) -> Vec<Expr> {
    let p = x.len();
    (0..rows)
        .map(|r| {
            let mut e = Expr::new();
            for (c, &xc) in x.iter().enumerate() {
                j.push(&mut e, r * p + c, xc);
            }
            e
        })
        .collect()
}

fn map_exprs(l: &Matrix, exprs: &[Expr]) -> Vec<Expr> {
    (0..l.nrows())
        .map(|i| combine(exprs, l.row(i).iter().copied()))
        .collect()
}

/// Adds `exprs = target` coordinatewise and returns the row indices.
fn pin(p: &mut ProgramBuilder, exprs: Vec<Expr>, target: &Vector) -> Vec<usize> {
    exprs
        .into_iter()
        .zip(target.iter())
        .map(|(e, &t)| p.equal(e, t))
        .collect()
}

fn unit(d: usize) -> Vector {
    unit_vector(d, d - 1)
}

struct Solved {
    program: LpProblem,
    point: Option<Vector>,
    farkas: Option<Vector>,
}

fn solve(p: &ProgramBuilder, tol: f64) -> Result<Solved> {
    let program = p.build();
    match lp_solve(&program, tol)? {
        LpOutcome::Optimal { point, .. } => Ok(Solved { program, point: Some(point), farkas: None }),
        LpOutcome::Infeasible { certificate } => Ok(Solved {
            program,
            point: None,
            farkas: Some(certificate),
        }),
        LpOutcome::Unbounded => Err(Error::NumericalFailure(
            "feasibility program reported unbounded".into(),
        )),
    }
}

/// Turns the Farkas vector restricted to `rows` into a witness normalized to
/// `−1` on the tested data.
fn witness(program: &LpProblem, y: &Vector, rows: &[usize]) -> Result<IncompatibilityWitness> {
    let gap = y.dot(&program.rhs);
    if gap <= 0.0 {
        return Err(Error::NumericalFailure("Farkas vector has no positive gap".into()));
    }
    Ok(IncompatibilityWitness {
        functional: Vector::from_iterator(rows.len(), rows.iter().map(|&r| -y[r] / gap)),
    })
}

fn common_domain(a: &StateSpace, b: &StateSpace) -> Result<()> {
    if a != b {
        return Err(Error::SpaceMismatch(format!(
            "domains {} and {} differ",
            a.name(),
            b.name()
        )));
    }
    Ok(())
}

/// Joint measurement search: effects `h_ij` (nonnegative on every vertex)
/// with `Σ_j h_ij = f_i` and `Σ_i h_ij = g_j`.
pub fn measurements_compatible(m1: &Measurement, m2: &Measurement, tol: f64) -> Result<CompatibilityVerdict> {
    common_domain(m1.space(), m2.space())?;
    effects_compatible(m1.space(), &m1.effects, &m2.effects, tol)
}

fn effects_compatible(k: &StateSpace, f: &[Effect], g: &[Effect], tol: f64) -> Result<CompatibilityVerdict> {
    let d = k.lifted_dim();
    let (n1, n2) = (f.len(), g.len());
    let mut p = ProgramBuilder::new();
    let h: Vec<Vec<Block>> = (0..n1).map(|_| (0..n2).map(|_| p.free(d)).collect()).collect();
    let slack = p.nonneg(n1 * n2 * k.num_vertices());
    for i in 0..n1 {
        for j in 0..n2 {
            for (v, x) in k.vertices().iter().enumerate() {
                let mut e = Expr::new();
                for r in 0..d {
                    h[i][j].push(&mut e, r, x[r]);
                }
                slack.push(&mut e, (i * n2 + j) * k.num_vertices() + v, -1.0);
                p.equal(e, 0.0);
            }
        }
    }
    let mut marginal_rows = Vec::new();
    for (i, fi) in f.iter().enumerate() {
        for r in 0..d {
            let mut e = Expr::new();
            for hij in &h[i] {
                hij.push(&mut e, r, 1.0);
            }
            marginal_rows.push(p.equal(e, fi[r]));
        }
    }
    for (j, gj) in g.iter().enumerate() {
        for r in 0..d {
            let mut e = Expr::new();
            for row in &h {
                row[j].push(&mut e, r, 1.0);
            }
            marginal_rows.push(p.equal(e, gj[r]));
        }
    }
    let solved = solve(&p, tol)?;
    if let Some(x) = &solved.point {
        let grid = JointEffectGrid {
            h: h.iter()
                .map(|row| row.iter().map(|b| b.values(x)).collect())
                .collect(),
        };
        return Ok(CompatibilityVerdict {
            compatible: true,
            joint: Some(Compatibilizer::EffectGrid(grid)),
            certificate: None,
            program: solved.program,
            farkas: None,
        });
    }
    let y = solved.farkas.expect("infeasible programs carry a certificate");
    let certificate = witness(&solved.program, &y, &marginal_rows)?;
    Ok(CompatibilityVerdict {
        compatible: false,
        joint: None,
        certificate: Some(certificate),
        program: solved.program,
        farkas: Some(y),
    })
}

/// `t·f_i + (1−t)/n · 1`.
pub fn noisy_measurement(m: &Measurement, t: f64, tol: f64) -> Result<Measurement> {
    let n = m.outcomes() as f64;
    let u = m.space().unit();
    let effects: Vec<Effect> = m.effects.iter().map(|f| f * t + &u * ((1.0 - t) / n)).collect();
    measurement_from_effects(m.space(), &effects, tol)
}

/// Largest `t` for which the noisy versions of both measurements are
/// compatible, found by bisection.
pub fn compatibility_robustness(m1: &Measurement, m2: &Measurement, tol: f64) -> Result<f64> {
    common_domain(m1.space(), m2.space())?;
    let compatible_at = |t: f64| -> Result<bool> {
        let a = noisy_measurement(m1, t, tol.max(1e-9))?;
        let b = noisy_measurement(m2, t, tol.max(1e-9))?;
        Ok(effects_compatible(m1.space(), &a.effects, &b.effects, tol)?.compatible)
    };
    if compatible_at(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if compatible_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Joint channel search: `J` with every domain vertex image in the chosen
/// set over `B ⊗ C` and unit contractions equal to `Φ1` and `Φ2`.
pub fn channels_compatible(
    phi1: &Channel,
    phi2: &Channel,
    rule: &TensorRule,
    tol: f64,
) -> Result<CompatibilityVerdict> {
    common_domain(&phi1.domain, &phi2.domain)?;
    let (qb, qc) = (phi1.codomain.lifted_dim(), phi2.codomain.lifted_dim());
    let (dim, set) = membership(&[&phi1.codomain, &phi2.codomain], rule)?;
    let a = &phi1.domain;
    let pa = a.lifted_dim();
    let mut p = ProgramBuilder::new();
    let j = p.free(dim * pa);
    for x in a.vertices() {
        constrain(&mut p, &matrix_times(&j, dim, x), &set);
    }
    let mut marginal_rows = Vec::new();
    let l1 = contraction_matrix(&[qb, qc], 1, &unit(qc));
    let l2 = contraction_matrix(&[qb, qc], 0, &unit(qb));
    for (l, phi) in [(&l1, &phi1.matrix), (&l2, &phi2.matrix)] {
        for r in 0..l.nrows() {
            for c in 0..pa {
                let mut e = Expr::new();
                for (s, &w) in l.row(r).iter().enumerate() {
                    j.push(&mut e, s * pa + c, w);
                }
                marginal_rows.push(p.equal(e, phi[(r, c)]));
            }
        }
    }
    let solved = solve(&p, tol)?;
    finish_channel_verdict(solved, &j, dim, pa, (qb, qc), rule, &marginal_rows)
}

fn finish_channel_verdict(
    solved: Solved,
    j: &Block,
    dim: usize,
    pa: usize,
    dims: (usize, usize),
    rule: &TensorRule,
    marginal_rows: &[usize],
) -> Result<CompatibilityVerdict> {
    if let Some(x) = &solved.point {
        let vals = j.values(x);
        let mut matrix = Matrix::from_row_slice(dim, pa, vals.as_slice());
        matrix.set_row(dim - 1, &unit(pa).transpose());
        return Ok(CompatibilityVerdict {
            compatible: true,
            joint: Some(Compatibilizer::Channel(JointChannel { matrix, dims, rule: rule.clone() })),
            certificate: None,
            program: solved.program,
            farkas: None,
        });
    }
    let y = solved.farkas.expect("infeasible programs carry a certificate");
    let certificate = witness(&solved.program, &y, marginal_rows)?;
    Ok(CompatibilityVerdict {
        compatible: false,
        joint: None,
        certificate: Some(certificate),
        program: solved.program,
        farkas: Some(y),
    })
}

/// Channel `K → K ⊗ K` whose two marginals both fix every state in `fixed`.
pub fn broadcasting_feasible(
    k: &StateSpace,
    fixed: &[Functional],
    rule: &TensorRule,
    tol: f64,
) -> Result<CompatibilityVerdict> {
    for x in fixed {
        if !k.contains(x, tol.max(1e-9))? {
            return Err(Error::NotAState);
        }
    }
    let d = k.lifted_dim();
    let (dim, set) = membership(&[k, k], rule)?;
    let mut p = ProgramBuilder::new();
    let j = p.free(dim * d);
    for x in k.vertices() {
        constrain(&mut p, &matrix_times(&j, dim, x), &set);
    }
    let l1 = contraction_matrix(&[d, d], 1, &unit(d));
    let l2 = contraction_matrix(&[d, d], 0, &unit(d));
    let mut marginal_rows = Vec::new();
    for x in fixed {
        let image = matrix_times(&j, dim, x);
        marginal_rows.extend(pin(&mut p, map_exprs(&l1, &image), x));
        marginal_rows.extend(pin(&mut p, map_exprs(&l2, &image), x));
    }
    let solved = solve(&p, tol)?;
    finish_channel_verdict(solved, &j, dim, d, (d, d), rule, &marginal_rows)
}

/// Whether the family `test_states` certifies that `Φ1`, `Φ2` are
/// incompatible: no assignment `x_i ↦ y_i` in the joint set reproduces both
/// marginals while respecting every affine dependence among the `x_i`.
pub fn certify_incompatibility(
    phi1: &Channel,
    phi2: &Channel,
    test_states: &[Functional],
    rule: &TensorRule,
    tol: f64,
) -> Result<bool> {
    common_domain(&phi1.domain, &phi2.domain)?;
    let a = &phi1.domain;
    for x in test_states {
        if !a.contains(x, tol.max(1e-9))? {
            return Err(Error::NotAState);
        }
    }
    if test_states.is_empty() {
        return Ok(false);
    }
    let (qb, qc) = (phi1.codomain.lifted_dim(), phi2.codomain.lifted_dim());
    let (dim, set) = membership(&[&phi1.codomain, &phi2.codomain], rule)?;
    let cols = Matrix::from_columns(test_states);
    let alphas = null_space(&cols, DEPENDENCE_CUTOFF);
    let mut p = ProgramBuilder::new();
    let ys: Vec<Vec<Expr>> = test_states
        .iter()
        .map(|_| {
            let y = p.free(dim);
            vector_exprs(&y)
        })
        .collect();
    let l1 = contraction_matrix(&[qb, qc], 1, &unit(qc));
    let l2 = contraction_matrix(&[qb, qc], 0, &unit(qb));
    for (y, x) in ys.iter().zip(test_states) {
        constrain(&mut p, y, &set);
        pin(&mut p, map_exprs(&l1, y), &(&phi1.matrix * x));
        pin(&mut p, map_exprs(&l2, y), &(&phi2.matrix * x));
    }
    for alpha in alphas.column_iter() {
        for r in 0..dim {
            let coords: Vec<Expr> = ys.iter().map(|y| y[r].clone()).collect();
            p.equal(combine(&coords, alpha.iter().copied()), 0.0);
        }
    }
    Ok(solve(&p, tol)?.point.is_none())
}

/// Contraction of every listed leg of a multipartite vector with its unit,
/// as a matrix onto the remaining legs.
fn trace_out(dims: &[usize], legs: &[usize]) -> Matrix {
    let mut dims = dims.to_vec();
    let mut legs = legs.to_vec();
    legs.sort_unstable_by(|a, b| b.cmp(a));
    let total: usize = dims.iter().product();
    let mut acc = Matrix::identity(total, total);
    for leg in legs {
        acc = contraction_matrix(&dims, leg, &unit(dims[leg])) * acc;
        dims.remove(leg);
    }
    acc
}

fn check_bipartite(x: &Vector, a: &StateSpace, d: &StateSpace) -> Result<()> {
    let expected = a.lifted_dim() * d.lifted_dim();
    if x.len() != expected {
        return Err(Error::DimensionMismatch { expected, found: x.len() });
    }
    Ok(())
}

/// Whether `Φ1`, `Φ2` (both acting on `A`) steer `x_AD`: true iff no `y_BCD`
/// in the chosen tripartite set reproduces `(Φ1 ⊗ id)x` and `(Φ2 ⊗ id)x`.
pub fn steering_check(
    phi1: &Channel,
    phi2: &Channel,
    x_ad: &Vector,
    d: &StateSpace,
    rule: &TensorRule,
    tol: f64,
) -> Result<bool> {
    common_domain(&phi1.domain, &phi2.domain)?;
    check_bipartite(x_ad, &phi1.domain, d)?;
    let (qb, qc, qd) = (
        phi1.codomain.lifted_dim(),
        phi2.codomain.lifted_dim(),
        d.lifted_dim(),
    );
    let (dim, set) = membership(&[&phi1.codomain, &phi2.codomain, d], rule)?;
    let id_d = Matrix::identity(qd, qd);
    let mut p = ProgramBuilder::new();
    let y = vector_exprs(&p.free(dim));
    constrain(&mut p, &y, &set);
    let dims = [qb, qc, qd];
    pin(&mut p, map_exprs(&trace_out(&dims, &[1]), &y), &(kron_matrix(&phi1.matrix, &id_d) * x_ad));
    pin(&mut p, map_exprs(&trace_out(&dims, &[0]), &y), &(kron_matrix(&phi2.matrix, &id_d) * x_ad));
    Ok(solve(&p, tol)?.point.is_none())
}

/// Bell non-locality of `x_AD` with respect to `Φ1, Φ2` on `A` and `Ψ1, Ψ2`
/// on `D`: true iff no `y_BCEF` reproduces all four `(Φ_i ⊗ Ψ_j)x`.
pub fn bell_check(
    phis: (&Channel, &Channel),
    psis: (&Channel, &Channel),
    x_ad: &Vector,
    rule: &TensorRule,
    tol: f64,
) -> Result<bool> {
    let (phi1, phi2) = phis;
    let (psi1, psi2) = psis;
    common_domain(&phi1.domain, &phi2.domain)?;
    common_domain(&psi1.domain, &psi2.domain)?;
    check_bipartite(x_ad, &phi1.domain, &psi1.domain)?;
    let spaces = [&phi1.codomain, &phi2.codomain, &psi1.codomain, &psi2.codomain];
    let (_, set) = membership(&spaces, rule)?;
    let dims: Vec<usize> = spaces.iter().map(|k| k.lifted_dim()).collect();
    let dim: usize = dims.iter().product();
    let mut p = ProgramBuilder::new();
    let y = vector_exprs(&p.free(dim));
    constrain(&mut p, &y, &set);
    for (i, phi) in [phi1, phi2].into_iter().enumerate() {
        for (j, psi) in [psi1, psi2].into_iter().enumerate() {
            // keep legs i (of B, C) and 2 + j (of E, F)
            let drop = [1 - i, 2 + (1 - j)];
            let target = kron_matrix(&phi.matrix, &psi.matrix) * x_ad;
            pin(&mut p, map_exprs(&trace_out(&dims, &drop), &y), &target);
        }
    }
    Ok(solve(&p, tol)?.point.is_none())
}

/// `x ↦ Φ(x) ⊗ z`: the joint of `Φ` with a constant channel.
pub fn joint_with_constant(phi: &Channel, z: &Functional) -> JointChannel {
    let matrix = Matrix::from_fn(phi.matrix.nrows() * z.len(), phi.matrix.ncols(), |r, c| {
        phi.matrix[(r / z.len(), c)] * z[r % z.len()]
    });
    JointChannel {
        matrix,
        dims: (phi.codomain.lifted_dim(), z.len()),
        rule: TensorRule::Min,
    }
}

/// Image of `x` under a joint channel, for inspection.
pub fn joint_image(j: &JointChannel, x: &Vector) -> Vector {
    &j.matrix * x
}
