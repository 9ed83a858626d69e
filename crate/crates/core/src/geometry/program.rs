//! Incremental construction of equality-form feasibility programs with free
//! and nonnegative variable blocks.

use super::{LpProblem, Matrix, Vector};

/// Sparse linear expression: `(column, coefficient)` pairs; repeated columns add.
pub type Expr = Vec<(usize, f64)>;

/// A contiguous group of program variables. Free blocks occupy two columns
/// per variable (`x = x⁺ − x⁻`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    start: usize,
    len: usize,
    free: bool,
}

impl Block {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Appends `coef · x_i` to `expr`.
    pub fn push(&self, expr: &mut Expr, i: usize, coef: f64) {
        debug_assert!(i < self.len);
        if coef == 0.0 {
            return;
        }
        expr.push((self.start + i, coef));
        if self.free {
            expr.push((self.start + self.len + i, -coef));
        }
    }

    pub fn value(&self, x: &Vector, i: usize) -> f64 {
        let v = x[self.start + i];
        if self.free {
            v - x[self.start + self.len + i]
        } else {
            v
        }
    }

    pub fn values(&self, x: &Vector) -> Vector {
        Vector::from_fn(self.len, |i, _| self.value(x, i))
    }
}

#[derive(Debug, Clone, Default)]
pub struct ProgramBuilder {
    ncols: usize,
    rows: Vec<Expr>,
    rhs: Vec<f64>,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nonneg(&mut self, len: usize) -> Block {
        let b = Block {
            start: self.ncols,
            len,
            free: false,
        };
        self.ncols += len;
        b
    }

    pub fn free(&mut self, len: usize) -> Block {
        let b = Block {
            start: self.ncols,
            len,
            free: true,
        };
        self.ncols += 2 * len;
        b
    }

    /// Adds `expr = rhs` and returns the row index.
    pub fn equal(&mut self, expr: Expr, rhs: f64) -> usize {
        self.rows.push(expr);
        self.rhs.push(rhs);
        self.rows.len() - 1
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Dense program with a zero objective.
    pub fn build(&self) -> LpProblem {
        let mut a = Matrix::zeros(self.rows.len(), self.ncols);
        for (i, expr) in self.rows.iter().enumerate() {
            for &(j, v) in expr {
                a[(i, j)] += v;
            }
        }
        LpProblem::new(
            Vector::zeros(self.ncols),
            a,
            Vector::from_vec(self.rhs.clone()),
        )
    }
}

/// `Σ_k coefs[k] · exprs[k]`.
pub fn combine(exprs: &[Expr], coefs: impl IntoIterator<Item = f64>) -> Expr {
    let mut out = Expr::new();
    for (e, c) in exprs.iter().zip(coefs) {
        if c != 0.0 {
            out.extend(e.iter().map(|&(j, v)| (j, v * c)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lp_solve;

    #[test]
    fn free_variable_can_go_negative() {
        let mut p = ProgramBuilder::new();
        let x = p.free(1);
        let y = p.nonneg(1);
        let mut e = Expr::new();
        x.push(&mut e, 0, 1.0);
        y.push(&mut e, 0, 1.0);
        p.equal(e, -2.0);
        let mut e = Expr::new();
        y.push(&mut e, 0, 1.0);
        p.equal(e, 3.0);
        let sol = lp_solve(&p.build(), 1e-9).unwrap();
        let pt = sol.point().unwrap();
        assert!((x.value(pt, 0) + 5.0).abs() < 1e-9);
        assert!((y.value(pt, 0) - 3.0).abs() < 1e-9);
    }
}
