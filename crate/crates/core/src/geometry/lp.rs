//! Two-phase primal simplex on standard form
//!
//! ```text
//! minimize c·x  subject to  A x = b,  x ≥ 0
//! ```
//!
//! Pivoting follows Bland's rule (lowest eligible index enters, lowest basic
//! index leaves among ratio ties), so the pivot sequence and every returned
//! certificate are deterministic functions of the input.

use super::{Matrix, Vector};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vector,
    pub constraints: Matrix,
    pub rhs: Vector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    /// `duals` solves `yᵀA ≤ c` with `yᵀb == value`.
    Optimal {
        value: f64,
        point: Vector,
        duals: Vector,
    },
    /// Farkas certificate: `yᵀA ≤ 0` and `yᵀb > 0`.
    Infeasible { certificate: Vector },
    Unbounded,
}

impl LpOutcome {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal { .. } => LpStatus::Optimal,
            LpOutcome::Infeasible { .. } => LpStatus::Infeasible,
            LpOutcome::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible { .. })
    }

    pub fn point(&self) -> Option<&Vector> {
        match self {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn certificate(&self) -> Option<&Vector> {
        match self {
            LpOutcome::Infeasible { certificate } => Some(certificate),
            _ => None,
        }
    }
}

impl LpProblem {
    pub fn new(objective: Vector, constraints: Matrix, rhs: Vector) -> Self {
        Self {
            objective,
            constraints,
            rhs,
        }
    }

    /// Pure feasibility problem (zero objective).
    pub fn feasibility(constraints: Matrix, rhs: Vector) -> Self {
        let n = constraints.ncols();
        Self::new(Vector::zeros(n), constraints, rhs)
    }

    pub fn num_vars(&self) -> usize {
        self.constraints.ncols()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.nrows()
    }

    fn check(&self) -> Result<()> {
        let (m, n) = self.constraints.shape();
        if self.objective.len() != n {
            return Err(Error::MalformedProblem(format!(
                "objective has {} entries for {} columns",
                self.objective.len(),
                n
            )));
        }
        if self.rhs.len() != m {
            return Err(Error::MalformedProblem(format!(
                "rhs has {} entries for {} rows",
                self.rhs.len(),
                m
            )));
        }
        let finite = self.constraints.iter().all(|x| x.is_finite())
            && self.rhs.iter().all(|x| x.is_finite())
            && self.objective.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::MalformedProblem("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// Largest violation of `A x = b` and `x ≥ 0`.
    pub fn violation(&self, x: &Vector) -> f64 {
        let eq = (&self.constraints * x - &self.rhs).amax();
        let neg = x.iter().fold(0.0_f64, |m, &v| m.max(-v));
        eq.max(neg)
    }

    /// Checks a Farkas certificate: `yᵀA ≤ tol` componentwise and `yᵀb ≥ min_gap`.
    pub fn certifies_infeasibility(&self, y: &Vector, tol: f64, min_gap: f64) -> bool {
        if y.len() != self.num_rows() {
            return false;
        }
        let ya = self.constraints.tr_mul(y);
        ya.iter().all(|&v| v <= tol) && y.dot(&self.rhs) >= min_gap
    }
}

/// Solves `p`; `tol` is the feasibility threshold on the phase-one residual
/// (scaled by `max(1, |b|∞)`).
pub fn lp_solve(p: &LpProblem, tol: f64) -> Result<LpOutcome> {
    p.check()?;
    let mut t = Tableau::new(p);
    t.run_phase_one()?;
    let scale = p.rhs.amax().max(1.0);
    if t.objective_value() > tol.max(1e-12) * scale {
        let certificate = t.phase_one_certificate();
        return Ok(LpOutcome::Infeasible { certificate });
    }
    t.drive_out_artificials();
    t.install_phase_two_costs(&p.objective);
    if !t.run_phase_two()? {
        return Ok(LpOutcome::Unbounded);
    }
    let point = t.refined_point(p);
    let value = p.objective.dot(&point);
    let duals = t.duals();
    Ok(LpOutcome::Optimal {
        value,
        point,
        duals,
    })
}

/// Dense tableau `[A | I | b]` with a reduced-cost row. Rows are sign-flipped
/// so that `b ≥ 0`; `signs` records the flips.
struct Tableau {
    m: usize,
    n: usize,
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    /// Negated objective value, kept in the cost row's rhs slot.
    neg_value: f64,
    basis: Vec<usize>,
    signs: Vec<f64>,
    pivots: usize,
}

impl Tableau {
    fn new(p: &LpProblem) -> Self {
        let (m, n) = p.constraints.shape();
        let width = n + m + 1;
        let mut rows = Vec::with_capacity(m);
        let mut signs = Vec::with_capacity(m);
        for i in 0..m {
            let s = if p.rhs[i] < 0.0 { -1.0 } else { 1.0 };
            let mut row = vec![0.0; width];
            for j in 0..n {
                row[j] = s * p.constraints[(i, j)];
            }
            row[n + i] = 1.0;
            row[width - 1] = s * p.rhs[i];
            rows.push(row);
            signs.push(s);
        }
        let mut cost = vec![0.0; width - 1];
        let mut neg_value = 0.0;
        for row in &rows {
            for j in 0..n {
                cost[j] -= row[j];
            }
            neg_value -= row[width - 1];
        }
        Tableau {
            m,
            n,
            rows,
            cost,
            neg_value,
            basis: (n..n + m).collect(),
            signs,
            pivots: 0,
        }
    }

    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.n + self.m]
    }

    fn objective_value(&self) -> f64 {
        -self.neg_value
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.n + self.m + 1;
        let piv = self.rows[r][c];
        {
            let row = &mut self.rows[r];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[c] = 1.0;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for j in 0..width {
                    row[j] -= f * pivot_row[j];
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for j in 0..width - 1 {
                self.cost[j] -= f * pivot_row[j];
            }
            self.cost[c] = 0.0;
            self.neg_value -= f * pivot_row[width - 1];
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Runs Bland-rule simplex over columns `0..limit`. Returns `false` on an
    /// unbounded direction.
    fn iterate(&mut self, limit: usize) -> Result<bool> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::NumericalFailure(
                    "simplex pivot limit exceeded".into(),
                ));
            }
            let Some(c) = (0..limit).find(|&j| self.cost[j] < -COST_TOL) else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.rows[i][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                            if ratio < br && !tie
                                || tie && self.basis[i] < self.basis[bi]
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Ok(false),
            }
        }
    }

    fn run_phase_one(&mut self) -> Result<()> {
        let limit = self.n;
        let bounded = self.iterate(limit)?;
        debug_assert!(bounded, "phase one is bounded below by zero");
        Ok(())
    }

    /// `y = c_Bᵀ B⁻¹` for the phase-one costs, mapped back through row flips.
    fn phase_one_certificate(&self) -> Vector {
        Vector::from_fn(self.m, |i, _| {
            // reduced cost of artificial i is 1 - y_i
            (1.0 - self.cost[self.n + i]) * self.signs[i]
        })
    }

    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.n {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n {
                let a = self.rows[r][j].abs();
                if a > PIVOT_TOL && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((c, _)) = best {
                self.pivot(r, c);
            }
        }
    }

    fn install_phase_two_costs(&mut self, c: &Vector) {
        let width = self.n + self.m;
        let mut cost = vec![0.0; width];
        cost[..self.n].copy_from_slice(c.as_slice());
        let mut neg_value = 0.0;
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = if b < self.n { c[b] } else { 0.0 };
            if cb != 0.0 {
                for j in 0..width {
                    cost[j] -= cb * self.rows[i][j];
                }
                neg_value -= cb * self.rhs(i);
            }
        }
        for &b in &self.basis {
            cost[b] = 0.0;
        }
        self.cost = cost;
        self.neg_value = neg_value;
    }

    fn run_phase_two(&mut self) -> Result<bool> {
        let limit = self.n;
        self.iterate(limit)
    }

    fn duals(&self) -> Vector {
        Vector::from_fn(self.m, |i, _| -self.cost[self.n + i] * self.signs[i])
    }

    /// Basic solution re-solved against the original constraint matrix to
    /// strip accumulated pivoting error; falls back to tableau values.
    fn refined_point(&self, p: &LpProblem) -> Vector {
        let mut x = Vector::zeros(self.n);
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.rhs(i).max(0.0);
            }
        }
        let mut basis_matrix = Matrix::zeros(self.m, self.m);
        for (k, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                basis_matrix.set_column(k, &p.constraints.column(b));
            } else {
                basis_matrix[(b - self.n, k)] = 1.0;
            }
        }
        if let Some(xb) = basis_matrix.lu().solve(&p.rhs) {
            let mut refined = Vector::zeros(self.n);
            let mut ok = true;
            for (k, &b) in self.basis.iter().enumerate() {
                if b < self.n {
                    if !xb[k].is_finite() || xb[k] < -1e-7 {
                        ok = false;
                        break;
                    }
                    refined[b] = xb[k].max(0.0);
                } else if xb[k].abs() > 1e-7 {
                    ok = false;
                    break;
                }
            }
            if ok && p.violation(&refined) <= p.violation(&x) {
                return refined;
            }
        }
        x
    }
}
