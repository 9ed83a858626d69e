//! The single qubit in Bloch coordinates. Closed forms only; the qubit is a
//! reference point for the polytope machinery, not a participant in it.

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Slack allowed on the Bloch-ball and effect inequalities.
pub const QUBIT_TOL: f64 = 1e-9;

/// `ρ = ½(I + w·σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub w: Vector3<f64>,
}

impl BlochState {
    pub fn new(w: [f64; 3]) -> Result<Self> {
        let s = BlochState { w: Vector3::from(w) };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let n = self.w.norm();
        if !n.is_finite() || n > 1.0 + QUBIT_TOL {
            return Err(Error::InvalidState(n));
        }
        Ok(())
    }

    pub fn is_pure(&self) -> bool {
        (self.w.norm() - 1.0).abs() <= QUBIT_TOL
    }
}

/// `X = c·I + v·σ`, with `0 ≤ X ≤ I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitEffect {
    pub v: Vector3<f64>,
    pub c: f64,
}

impl QubitEffect {
    pub fn new(v: [f64; 3], c: f64) -> Result<Self> {
        let e = QubitEffect { v: Vector3::from(v), c };
        e.validate()?;
        Ok(e)
    }

    fn validate(&self) -> Result<()> {
        let n = self.v.norm();
        if !n.is_finite() || !self.c.is_finite() {
            return Err(Error::InvalidEffect("non-finite coordinates".into()));
        }
        if n > self.c + QUBIT_TOL || n > 1.0 - self.c + QUBIT_TOL {
            return Err(Error::InvalidEffect(format!(
                "eigenvalues {} and {} leave [0, 1]",
                self.c - n,
                self.c + n
            )));
        }
        Ok(())
    }

    pub fn unit() -> Self {
        QubitEffect { v: Vector3::zeros(), c: 1.0 }
    }
}

/// `Tr(ρX) = c + v·w`.
pub fn qubit_pairing(rho: &BlochState, e: &QubitEffect) -> Result<f64> {
    rho.validate()?;
    e.validate()?;
    Ok(e.c + e.v.dot(&rho.w))
}

/// Trace norm of the operator `½(t·I + w·σ)`.
pub fn qubit_base_norm(t: f64, w: &Vector3<f64>) -> f64 {
    t.abs().max(w.norm())
}

/// Helstrom: `½(1 + ‖λρ0 − (1−λ)ρ1‖₁)`.
pub fn qubit_discrimination(rho0: &BlochState, rho1: &BlochState, lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::BadPrior(lambda));
    }
    rho0.validate()?;
    rho1.validate()?;
    let w = rho0.w * lambda - rho1.w * (1.0 - lambda);
    Ok(0.5 * (1.0 + qubit_base_norm(2.0 * lambda - 1.0, &w)))
}
