//! Channels as unital linear maps on lifted coordinates, together with
//! measurements, preparations, instruments and the post-processing preorder.

use crate::effects::{is_effect, Effect};
use crate::error::{Error, Result};
use crate::geometry::{
    cone_contains, kron_matrix, lp_solve, separating_functional, unit_vector, ConeRep, LpOutcome,
    LpProblem, Matrix, Vector, EQ_TOL,
};
use crate::state_space::{simplex, Functional, StateSpace};
use crate::tensor::{
    apply_on_leg, is_separable, max_tensor_contains, min_tensor, product_generators,
    BipartiteContext, Leg, TensorRule,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub domain: StateSpace,
    pub codomain: StateSpace,
    /// `codomain.lifted_dim × domain.lifted_dim`; the last row is `e_lastᵀ`.
    pub matrix: Matrix,
}

fn check_shape(m: &Matrix, a: &StateSpace, b: &StateSpace) -> Result<()> {
    if m.ncols() != a.lifted_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.lifted_dim(),
            found: m.ncols(),
        });
    }
    if m.nrows() != b.lifted_dim() {
        return Err(Error::DimensionMismatch {
            expected: b.lifted_dim(),
            found: m.nrows(),
        });
    }
    Ok(())
}

/// Linear witness `W` with `⟨W, y⟩ ≥ margin` on the codomain vertices and
/// `⟨W, image⟩ < 0`.
fn outside_witness(b: &StateSpace, image: &Vector, tol: f64) -> Option<Vector> {
    let sep = separating_functional(b.vertices(), image, tol).ok()?;
    Some(-(&sep.normal + b.unit() * sep.offset))
}

/// Checks that `m` maps `a` into `b` and is unital, then fixes the last row to
/// exactly `e_lastᵀ`.
pub fn validate_channel(m: &Matrix, a: &StateSpace, b: &StateSpace, tol: f64) -> Result<Channel> {
    check_shape(m, a, b)?;
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let last = m.nrows() - 1;
    let unit_row = unit_vector(m.ncols(), m.ncols() - 1);
    let drift = (m.row(last).transpose() - &unit_row).amax();
    if drift > tol.max(EQ_TOL) {
        return Err(Error::NotUnital(drift));
    }
    let mut matrix = m.clone();
    matrix.set_row(last, &unit_row.transpose());
    for (vertex, x) in a.vertices().iter().enumerate() {
        let image = &matrix * x;
        if !b.contains(&image, tol)? {
            return Err(Error::NotPositive {
                vertex,
                witness: outside_witness(b, &image, tol),
            });
        }
    }
    Ok(Channel {
        domain: a.clone(),
        codomain: b.clone(),
        matrix,
    })
}

impl Channel {
    pub fn identity(k: &StateSpace) -> Self {
        let d = k.lifted_dim();
        Channel {
            domain: k.clone(),
            codomain: k.clone(),
            matrix: Matrix::identity(d, d),
        }
    }

    /// `τ_z(x) = ⟨x, 1⟩ z`.
    pub fn constant(domain: &StateSpace, codomain: &StateSpace, z: &Functional, tol: f64) -> Result<Self> {
        if !codomain.contains(z, tol)? {
            return Err(Error::NotAState);
        }
        let mut matrix = Matrix::zeros(codomain.lifted_dim(), domain.lifted_dim());
        matrix.set_column(domain.lifted_dim() - 1, z);
        Ok(Channel {
            domain: domain.clone(),
            codomain: codomain.clone(),
            matrix,
        })
    }

    pub fn apply(&self, x: &Functional) -> Result<Functional> {
        self.domain.check_dim(x)?;
        Ok(&self.matrix * x)
    }

    /// `Φ*(f) = Φᵀ f`.
    pub fn adjoint_apply(&self, f: &Effect) -> Result<Effect> {
        self.codomain.check_dim(f)?;
        Ok(self.matrix.tr_mul(f))
    }

    /// Convex mixture `t·self + (1−t)·other`.
    pub fn mix(&self, other: &Channel, t: f64) -> Result<Channel> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::SpaceMismatch("mixed channels differ in domain or codomain".into()));
        }
        Ok(Channel {
            matrix: &self.matrix * t + &other.matrix * (1.0 - t),
            ..self.clone()
        })
    }
}

/// `Φ2 ∘ Φ1`.
pub fn compose(phi2: &Channel, phi1: &Channel) -> Result<Channel> {
    if phi1.codomain != phi2.domain {
        return Err(Error::SpaceMismatch(format!(
            "codomain {} does not match domain {}",
            phi1.codomain.name(),
            phi2.domain.name()
        )));
    }
    Ok(Channel {
        domain: phi1.domain.clone(),
        codomain: phi2.codomain.clone(),
        matrix: &phi2.matrix * &phi1.matrix,
    })
}

/// `(id ⊗ Φ)φ` or `(Φ ⊗ id)φ`, with a check that the image lies in the
/// composite state set of the output context.
pub fn apply_to_leg(
    phi: &Channel,
    state: &Vector,
    ctx: &BipartiteContext,
    leg: Leg,
    tol: f64,
) -> Result<(Vector, BipartiteContext)> {
    if *ctx.space(leg) != phi.domain {
        return Err(Error::SpaceMismatch("channel domain differs from the leg's space".into()));
    }
    let (da, db) = ctx.dims();
    let out = apply_on_leg(&phi.matrix, state, da, db, leg)?;
    let (a, b) = match leg {
        Leg::A => (phi.codomain.clone(), ctx.b.clone()),
        Leg::B => (ctx.a.clone(), phi.codomain.clone()),
    };
    let rule = match &ctx.rule {
        TensorRule::Explicit(vs) if phi.codomain == phi.domain => TensorRule::Explicit(vs.clone()),
        TensorRule::Explicit(_) => TensorRule::Max,
        r => r.clone(),
    };
    let out_ctx = BipartiteContext { a, b, rule };
    if !out_ctx.contains(&out, tol.max(1e-9))? {
        let gens = product_generators(&[&out_ctx.a, &out_ctx.b])?;
        let (worst, value) = gens
            .iter()
            .enumerate()
            .map(|(i, g)| (i, out.dot(g)))
            .fold((0, f64::INFINITY), |m, c| if c.1 < m.1 { c } else { m });
        let nb = crate::effects::positive_generators(&out_ctx.b)?.len();
        return Err(Error::CpViolation(format!(
            "image leaves the {} product; generator pair ({}, {}) pairs to {value:.3e}",
            out_ctx.rule.name(),
            worst / nb,
            worst % nb
        )));
    }
    Ok((out, out_ctx))
}

/// A measurement: effects `f_i` summing to the unit, and the channel into
/// `S_n` that realizes it.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub channel: Channel,
    pub effects: Vec<Effect>,
}

impl Measurement {
    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn space(&self) -> &StateSpace {
        &self.channel.domain
    }

    pub fn probabilities(&self, x: &Functional) -> Result<Vec<f64>> {
        self.space().check_dim(x)?;
        Ok(self.effects.iter().map(|f| x.dot(f)).collect())
    }

    /// Effects stacked as rows.
    pub fn effect_matrix(&self) -> Matrix {
        let d = self.space().lifted_dim();
        Matrix::from_fn(self.effects.len(), d, |i, j| self.effects[i][j])
    }
}

/// Matrix of the channel into `S_n` whose outcome `i` reads `⟨x, f_i⟩`: rows
/// `f_2, …, f_n` followed by the unit.
fn measurement_matrix(effects: &[Effect], unit: &Effect) -> Matrix {
    let n = effects.len();
    let d = unit.len();
    let mut m = Matrix::zeros(n, d);
    for (i, f) in effects.iter().enumerate().skip(1) {
        m.set_row(i - 1, &f.transpose());
    }
    m.set_row(n - 1, &unit.transpose());
    m
}

pub fn measurement_from_effects(k: &StateSpace, effects: &[Effect], tol: f64) -> Result<Measurement> {
    if effects.is_empty() {
        return Err(Error::EmptyInput);
    }
    for f in effects {
        if !is_effect(k, f, tol.max(1e-9))? {
            return Err(Error::NotAnEffect);
        }
    }
    let sum = effects.iter().fold(Vector::zeros(k.lifted_dim()), |acc, f| acc + f);
    let drift = (&sum - k.unit()).amax();
    if drift > tol.max(EQ_TOL) {
        return Err(Error::NotNormalized(1.0 + drift));
    }
    let channel = Channel {
        domain: k.clone(),
        codomain: simplex(effects.len())?,
        matrix: measurement_matrix(effects, &k.unit()),
    };
    Ok(Measurement {
        channel,
        effects: effects.to_vec(),
    })
}

/// Dual basis `b_i` of `S_n`: `⟨s_i, b_j⟩ = δ_ij`.
pub fn simplex_dual_basis(n: usize) -> Vec<Effect> {
    (0..n)
        .map(|i| {
            if i == 0 {
                let mut b = Vector::from_element(n, -1.0);
                b[n - 1] = 1.0;
                b
            } else {
                unit_vector(n, i - 1)
            }
        })
        .collect()
}

/// Channel `S_n → K` with `s_i ↦ x_i`, i.e. `Σ_i x_i b_iᵀ`.
pub fn preparation_from_states(n: usize, states: &[Functional], codomain: &StateSpace, tol: f64) -> Result<Channel> {
    if states.len() != n {
        return Err(Error::InvalidArity(states.len()));
    }
    let domain = simplex(n)?;
    let mut matrix = Matrix::zeros(codomain.lifted_dim(), n);
    for (x, b) in states.iter().zip(simplex_dual_basis(n)) {
        if !codomain.contains(x, tol)? {
            return Err(Error::NotAState);
        }
        matrix += x * b.transpose();
    }
    let last = matrix.nrows() - 1;
    matrix.set_row(last, &unit_vector(n, n - 1).transpose());
    Ok(Channel {
        domain,
        codomain: codomain.clone(),
        matrix,
    })
}

/// Measure-and-prepare channel `x ↦ Σ_i ⟨x, f_i⟩ y_i`.
pub fn measure_and_prepare(m: &Measurement, states: &[Functional], codomain: &StateSpace, tol: f64) -> Result<Channel> {
    let prep = preparation_from_states(m.outcomes(), states, codomain, tol)?;
    compose(&prep, &m.channel)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    pub domain: StateSpace,
    pub codomain: StateSpace,
    pub branches: Vec<Matrix>,
}

pub fn instrument_assemble(branches: &[Matrix], a: &StateSpace, b: &StateSpace, tol: f64) -> Result<Instrument> {
    if branches.is_empty() {
        return Err(Error::EmptyInput);
    }
    let cone = ConeRep::from_generators(b.lifted_dim(), b.vertices().to_vec());
    for (j, m) in branches.iter().enumerate() {
        check_shape(m, a, b)?;
        for x in a.vertices() {
            if !cone_contains(&cone, &(m * x), tol)? {
                return Err(Error::BranchNotPositive(j));
            }
        }
    }
    let total = branches.iter().skip(1).fold(branches[0].clone(), |acc, m| acc + m);
    validate_channel(&total, a, b, tol).map_err(|e| Error::SumNotChannel(e.to_string()))?;
    Ok(Instrument {
        domain: a.clone(),
        codomain: b.clone(),
        branches: branches.to_vec(),
    })
}

impl Instrument {
    /// Outcome `j` has effect `ℐ_jᵀ 1_B`.
    pub fn induced_measurement(&self, tol: f64) -> Result<Measurement> {
        let u = self.codomain.unit();
        let effects: Vec<Effect> = self.branches.iter().map(|m| m.tr_mul(&u)).collect();
        measurement_from_effects(&self.domain, &effects, tol)
    }

    pub fn total_channel(&self) -> Channel {
        let matrix = self.branches.iter().skip(1).fold(self.branches[0].clone(), |acc, m| acc + m);
        let mut matrix = matrix;
        let last = matrix.nrows() - 1;
        matrix.set_row(last, &unit_vector(matrix.ncols(), matrix.ncols() - 1).transpose());
        Channel {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrix,
        }
    }

    /// The instrument as one channel `K_A → S_n ⊗ K_B`, `x ↦ Σ_j s_j ⊗ ℐ_j(x)`.
    pub fn as_channel(&self) -> Result<Channel> {
        let n = self.branches.len();
        let sn = simplex(n)?;
        let codomain = min_tensor(&sn, &self.codomain)?;
        let mut matrix = Matrix::zeros(n * self.codomain.lifted_dim(), self.domain.lifted_dim());
        for (s, m) in sn.vertices().iter().zip(&self.branches) {
            let col = Matrix::from_column_slice(n, 1, s.as_slice());
            matrix += kron_matrix(&col, m);
        }
        Ok(Channel {
            domain: self.domain.clone(),
            codomain,
            matrix,
        })
    }
}

/// Finds a channel `Λ` with `Λ ∘ Φ = Ψ`, if one exists.
pub fn is_post_processing_of(psi: &Channel, phi: &Channel, tol: f64) -> Result<Option<Channel>> {
    if psi.domain != phi.domain {
        return Err(Error::SpaceMismatch("post-processing needs a common domain".into()));
    }
    let p = psi.codomain.lifted_dim();
    let q = phi.codomain.lifted_dim();
    let da = phi.domain.lifted_dim();
    let src = phi.codomain.vertices();
    let dst = psi.codomain.vertices();
    // columns: Λ⁺ (p·q), Λ⁻ (p·q), μ (|src|·|dst|); Λ is row-major
    let nl = p * q;
    let nmu = src.len() * dst.len();
    let cols = 2 * nl + nmu;
    let lam = |r: usize, c: usize| r * q + c;
    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    // Λ Φ = Ψ
    for r in 0..p {
        for c in 0..da {
            let mut terms = Vec::new();
            for k in 0..q {
                let v = phi.matrix[(k, c)];
                if v != 0.0 {
                    terms.push((lam(r, k), v));
                    terms.push((nl + lam(r, k), -v));
                }
            }
            rows.push((terms, psi.matrix[(r, c)]));
        }
    }
    // unital: last row of Λ is e_lastᵀ
    for c in 0..q {
        let target = if c == q - 1 { 1.0 } else { 0.0 };
        rows.push((vec![(lam(p - 1, c), 1.0), (nl + lam(p - 1, c), -1.0)], target));
    }
    // Λ x_k = Σ_l μ_kl y_l
    for (k, x) in src.iter().enumerate() {
        for r in 0..p {
            let mut terms = Vec::new();
            for c in 0..q {
                if x[c] != 0.0 {
                    terms.push((lam(r, c), x[c]));
                    terms.push((nl + lam(r, c), -x[c]));
                }
            }
            for (l, y) in dst.iter().enumerate() {
                if y[r] != 0.0 {
                    terms.push((2 * nl + k * dst.len() + l, -y[r]));
                }
            }
            rows.push((terms, 0.0));
        }
    }
    let mut a = Matrix::zeros(rows.len(), cols);
    let mut b = Vector::zeros(rows.len());
    for (i, (terms, rhs)) in rows.iter().enumerate() {
        for &(j, v) in terms {
            a[(i, j)] += v;
        }
        b[i] = *rhs;
    }
    let LpOutcome::Optimal { point, .. } = lp_solve(&LpProblem::feasibility(a, b), tol)? else {
        return Ok(None);
    };
    let lambda = Matrix::from_fn(p, q, |r, c| point[lam(r, c)] - point[nl + lam(r, c)]);
    let channel = validate_channel(&lambda, &phi.codomain, &psi.codomain, tol.max(1e-7))
        .map_err(|e| Error::NumericalFailure(format!("post-processing solution invalid: {e}")))?;
    Ok(Some(channel))
}

/// Whether `(id ⊗ Φ)` sends every probe state of `probe ⊗max domain` to a
/// separable state.
pub fn is_entanglement_breaking(
    phi: &Channel,
    probe: &StateSpace,
    probe_states: &[Vector],
    tol: f64,
) -> Result<bool> {
    let ctx = BipartiteContext::max(probe.clone(), phi.domain.clone());
    for s in probe_states {
        if !max_tensor_contains(probe, &phi.domain, s, tol.max(1e-9))? {
            return Err(Error::SpaceMismatch("probe state outside the maximal product".into()));
        }
        let (out, _) = apply_to_leg(phi, s, &ctx, Leg::B, tol)?;
        if !is_separable(probe, &phi.codomain, &out, tol)?.is_separable() {
            return Ok(false);
        }
    }
    Ok(true)
}
