//! Order-unit and base norms, and optimal discrimination of two states.

use crate::effects::{effect_algebra, Effect};
use crate::error::{Error, Result};
use crate::geometry::linalg::{projection_residual, span_basis, RANK_TOL};
use crate::geometry::{lp_solve, LpOutcome, LpProblem, Matrix, Vector};
use crate::state_space::{Functional, StateSpace};

/// Relative least-squares residual above which a functional is taken to lie
/// outside the span of the state space.
const SPAN_TOL: f64 = 1e-7;

/// Ties between effect values closer than this keep the lower index.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationResult {
    pub p_succ: f64,
    pub optimal_effect: Effect,
    pub base_norm_value: f64,
}

/// `sup_{x∈K} |⟨x, f⟩|`, attained at a vertex.
pub fn order_unit_norm(k: &StateSpace, f: &Effect) -> Result<f64> {
    k.check_dim(f)?;
    Ok(k.vertices()
        .iter()
        .map(|x| x.dot(f).abs())
        .fold(0.0, f64::max))
}

fn check_span(k: &StateSpace, psi: &Functional) -> Result<()> {
    k.check_dim(psi)?;
    let scale = psi.norm();
    if scale == 0.0 {
        return Ok(());
    }
    let basis = span_basis(k.vertices(), k.lifted_dim(), RANK_TOL);
    let rel = projection_residual(&basis, psi) / scale;
    if rel > SPAN_TOL {
        return Err(Error::OutsideSpan(rel));
    }
    Ok(())
}

/// Base-norm decomposition `ψ = Σλ_i v_i − Σμ_j v_j` with minimal `Σλ + Σμ`.
#[derive(Debug, Clone)]
pub struct BaseNormDecomposition {
    pub value: f64,
    pub positive: Vector,
    pub negative: Vector,
}

pub fn base_norm_decomposition(k: &StateSpace, psi: &Functional) -> Result<BaseNormDecomposition> {
    check_span(k, psi)?;
    let n = k.num_vertices();
    let d = k.lifted_dim();
    let mut a = Matrix::zeros(d, 2 * n);
    for (i, v) in k.vertices().iter().enumerate() {
        a.set_column(i, v);
        a.set_column(n + i, &(-v));
    }
    let c = Vector::from_element(2 * n, 1.0);
    match lp_solve(&LpProblem::new(c, a, psi.clone()), 1e-9)? {
        LpOutcome::Optimal { value, point, .. } => Ok(BaseNormDecomposition {
            value,
            positive: point.rows(0, n).into_owned(),
            negative: point.rows(n, n).into_owned(),
        }),
        _ => Err(Error::NumericalFailure(
            "base-norm program has no optimum for a functional in the span".into(),
        )),
    }
}

/// `inf {λ + μ : ψ = λx − μy, x, y ∈ K}` by linear programming.
pub fn base_norm(k: &StateSpace, psi: &Functional) -> Result<f64> {
    Ok(base_norm_decomposition(k, psi)?.value)
}

/// `max_{f ∈ ext E(K)} |⟨ψ, 2f − 1_K⟩|`, evaluated by enumeration.
pub fn dual_norm_oracle(k: &StateSpace, psi: &Functional) -> Result<f64> {
    check_span(k, psi)?;
    let alg = effect_algebra(k)?;
    Ok(alg
        .effect_vertices
        .iter()
        .map(|f| psi.dot(&(f * 2.0 - &alg.unit)).abs())
        .fold(0.0, f64::max))
}

/// Optimal success probability for telling `x0` (prior `λ`) from `x1`.
pub fn discrimination_probability(
    k: &StateSpace,
    x0: &Functional,
    x1: &Functional,
    lambda: f64,
    tol: f64,
) -> Result<DiscriminationResult> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::BadPrior(lambda));
    }
    if !k.contains(x0, tol)? || !k.contains(x1, tol)? {
        return Err(Error::NotAState);
    }
    let psi = x0 * lambda - x1 * (1.0 - lambda);
    let norm = base_norm(k, &psi)?;
    let alg = effect_algebra(k)?;
    let score = |f: &Effect| lambda * x0.dot(f) + (1.0 - lambda) * (1.0 - x1.dot(f));
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, f) in alg.effect_vertices.iter().enumerate() {
        let v = score(f);
        if v > best_value + TIE_TOL {
            best = i;
            best_value = v;
        }
    }
    Ok(DiscriminationResult {
        p_succ: 0.5 * (1.0 + norm),
        optimal_effect: alg.effect_vertices[best].clone(),
        base_norm_value: norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::is_effect;
    use crate::geometry::vector;
    use crate::state_space::{boxworld_square, regular_polygon, simplex};
    use proptest::prelude::*;

    const TOL: f64 = 1e-9;

    #[test]
    fn order_unit_examples() {
        for k in [simplex(3).unwrap(), boxworld_square(), regular_polygon(5).unwrap()] {
            assert!((order_unit_norm(&k, &k.unit()).unwrap() - 1.0).abs() < 1e-12);
            for f in &effect_algebra(&k).unwrap().effect_vertices {
                assert!(order_unit_norm(&k, f).unwrap() <= 1.0 + 1e-9);
            }
        }
        let s = boxworld_square();
        let d = vector(&[1.0, -1.0, 0.0]);
        assert_eq!(order_unit_norm(&s, &d).unwrap(), 1.0);
    }

    #[test]
    fn base_norm_examples() {
        let s = boxworld_square();
        for x in s.vertices() {
            assert!((base_norm(&s, x).unwrap() - 1.0).abs() < 1e-9);
        }
        let s2 = simplex(2).unwrap();
        let psi = s2.vertex(0) * 0.5 - s2.vertex(1) * 0.5;
        assert!((base_norm(&s2, &psi).unwrap() - 1.0).abs() < 1e-9);
        let psi = s.vertex(0) * 0.5 - s.center() * 0.5;
        assert!((base_norm(&s, &psi).unwrap() - 0.5).abs() < 1e-9);
        assert!((dual_norm_oracle(&s, &psi).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(dual_norm_oracle(&s, &Vector::zeros(3)).unwrap(), 0.0);
        assert!((dual_norm_oracle(&s, &s.center()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outside_span_is_reported() {
        // a flat triangle in R^3: lifted vertices span only 3 of 4 coordinates
        let k = crate::state_space::StateSpace::from_vertices(&[
            vector(&[0.0, 0.0, 0.0]),
            vector(&[1.0, 0.0, 0.0]),
            vector(&[0.0, 1.0, 0.0]),
        ])
        .unwrap();
        assert!(matches!(
            base_norm(&k, &vector(&[0.0, 0.0, 1.0, 0.0])),
            Err(Error::OutsideSpan(_))
        ));
        assert!((base_norm(&k, &vector(&[1.0, 0.0, 0.0, 1.0])).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn discrimination_examples() {
        let s = boxworld_square();
        let (s00, s11) = (s.vertex(0).clone(), s.vertex(3).clone());
        let r = discrimination_probability(&s, &s00, &s11, 0.5, TOL).unwrap();
        assert!((r.p_succ - 1.0).abs() < 1e-9);
        let value = 0.5 * s00.dot(&r.optimal_effect) + 0.5 * (1.0 - s11.dot(&r.optimal_effect));
        assert!((value - 1.0).abs() < 1e-12);
        let candidates = [vector(&[-1.0, 0.0, 1.0]), vector(&[0.0, -1.0, 1.0])];
        assert!(candidates.iter().any(|c| (c - &r.optimal_effect).amax() < 1e-9));

        let r = discrimination_probability(&s, &s00, &s.center(), 0.5, TOL).unwrap();
        assert!((r.p_succ - 0.75).abs() < 1e-9);
        assert!((r.p_succ - 0.5 * (1.0 + r.base_norm_value)).abs() < 1e-12);

        let c = s.center();
        let r = discrimination_probability(&s, &c, &c, 0.7, TOL).unwrap();
        assert!((r.p_succ - 0.7).abs() < 1e-9);
        assert!((&r.optimal_effect - s.unit()).amax() < 1e-12);
        let r = discrimination_probability(&s, &c, &c, 0.2, TOL).unwrap();
        assert!((r.p_succ - 0.8).abs() < 1e-9);
        assert!(r.optimal_effect.amax() < 1e-12);
    }

    #[test]
    fn discrimination_errors() {
        let s = boxworld_square();
        let c = s.center();
        assert!(matches!(
            discrimination_probability(&s, &c, &c, 1.5, TOL),
            Err(Error::BadPrior(_))
        ));
        assert!(matches!(
            discrimination_probability(&s, &vector(&[3.0, 0.0, 1.0]), &c, 0.5, TOL),
            Err(Error::NotAState)
        ));
    }

    fn space(which: usize) -> StateSpace {
        match which {
            0 => boxworld_square(),
            1 => regular_polygon(5).unwrap(),
            2 => simplex(3).unwrap(),
            _ => simplex(4).unwrap(),
        }
    }

    fn random_functional(k: &StateSpace, coeffs: &[f64]) -> Vector {
        let mut psi = Vector::zeros(k.lifted_dim());
        for (i, v) in k.vertices().iter().enumerate() {
            psi += v * coeffs[i % coeffs.len()];
        }
        psi
    }

    fn random_state(k: &StateSpace, w: &[f64]) -> Vector {
        let w: Vec<f64> = (0..k.num_vertices()).map(|i| w[i % w.len()].abs() + 1e-6).collect();
        let total: f64 = w.iter().sum();
        random_functional(k, &w.iter().map(|x| x / total).collect::<Vec<_>>())
    }

    proptest! {
        #[test]
        fn base_norm_matches_the_oracle(
            which in 0usize..4,
            coeffs in prop::collection::vec(-2.0f64..2.0, 5),
        ) {
            let k = space(which);
            let psi = random_functional(&k, &coeffs);
            let lp = base_norm(&k, &psi).unwrap();
            let oracle = dual_norm_oracle(&k, &psi).unwrap();
            prop_assert!((lp - oracle).abs() < 1e-7, "{lp} vs {oracle}");
        }

        #[test]
        fn norm_axioms(
            which in 0usize..4,
            a in prop::collection::vec(-2.0f64..2.0, 5),
            b in prop::collection::vec(-2.0f64..2.0, 5),
            alpha in -3.0f64..3.0,
        ) {
            let k = space(which);
            let (p, q) = (random_functional(&k, &a), random_functional(&k, &b));
            let np = base_norm(&k, &p).unwrap();
            prop_assert!((base_norm(&k, &(&p * alpha)).unwrap() - alpha.abs() * np).abs() < 1e-7);
            prop_assert!(base_norm(&k, &(&p + &q)).unwrap() <= np + base_norm(&k, &q).unwrap() + 1e-7);
            if np < 1e-9 {
                prop_assert!(p.amax() < 1e-7);
            }
            let f = p.clone();
            let nf = order_unit_norm(&k, &f).unwrap();
            prop_assert!((order_unit_norm(&k, &(&f * alpha)).unwrap() - alpha.abs() * nf).abs() < 1e-9);
            prop_assert!(order_unit_norm(&k, &(&f + &q)).unwrap() <= nf + order_unit_norm(&k, &q).unwrap() + 1e-9);
        }

        #[test]
        fn discrimination_matches_the_search(
            which in 0usize..4,
            a in prop::collection::vec(0.0f64..1.0, 5),
            b in prop::collection::vec(0.0f64..1.0, 5),
            lambda in 0.0f64..=1.0,
            t in 0.0f64..=1.0,
        ) {
            let k = space(which);
            let (x0, x1) = (random_state(&k, &a), random_state(&k, &b));
            let r = discrimination_probability(&k, &x0, &x1, lambda, TOL).unwrap();
            let search = effect_algebra(&k).unwrap().effect_vertices.iter()
                .map(|f| lambda * x0.dot(f) + (1.0 - lambda) * (1.0 - x1.dot(f)))
                .fold(f64::MIN, f64::max);
            prop_assert!((r.p_succ - search).abs() < 1e-7);
            prop_assert!(is_effect(&k, &r.optimal_effect, 1e-9).unwrap());
            if (lambda - 0.5).abs() < 1e-15 {
                prop_assert!(r.p_succ >= 0.5 - 1e-9 && r.p_succ <= 1.0 + 1e-9);
            }
            // noise on x0 never helps
            let noisy = &x0 * (1.0 - t) + &x1 * t;
            let rn = discrimination_probability(&k, &noisy, &x1, lambda, TOL).unwrap();
            prop_assert!(rn.p_succ <= r.p_succ + 1e-9);
        }
    }
}
