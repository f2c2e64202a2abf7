//! Exact two-phase simplex over rationals with Bland's pivoting rule.

use num_traits::{One, Zero};

use crate::rational::Rational;

/// `maximize objective · x` subject to `row · x <= bound` for every row and
/// `x >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpProblem {
    pub vars: usize,
    pub rows: Vec<(Vec<Rational>, Rational)>,
    pub objective: Vec<Rational>,
}

impl LpProblem {
    pub fn new(vars: usize, objective: Vec<Rational>) -> Self {
        assert_eq!(objective.len(), vars, "objective length");
        LpProblem {
            vars,
            rows: Vec::new(),
            objective,
        }
    }

    pub fn add_row(&mut self, coefficients: Vec<Rational>, bound: Rational) {
        assert_eq!(coefficients.len(), self.vars, "row length");
        self.rows.push((coefficients, bound));
    }

    pub fn objective_at(&self, point: &[Rational]) -> Rational {
        dot(&self.objective, point)
    }

    /// True iff `point` is nonnegative and satisfies every row exactly.
    pub fn is_feasible(&self, point: &[Rational]) -> bool {
        point.len() == self.vars
            && point.iter().all(|x| *x >= Rational::zero())
            && self
                .rows
                .iter()
                .all(|(row, bound)| dot(row, point) <= *bound)
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Present iff the status is optimal.
    pub value: Option<Rational>,
    pub point: Option<Vec<Rational>>,
}

impl LpResult {
    fn status(status: LpStatus) -> Self {
        LpResult {
            status,
            value: None,
            point: None,
        }
    }
}

struct Tableau {
    /// Constraint rows, each `cols + 1` wide (right-hand side last).
    rows: Vec<Vec<Rational>>,
    /// Reduced-cost row of the current objective, negated convention:
    /// entering columns have a negative entry; the last entry is the value.
    z: Vec<Rational>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Rational::one() / &self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *v -= &f * p;
                    }
                }
            }
        }
        if !self.z[c].is_zero() {
            let f = self.z[c].clone();
            for (v, p) in self.z.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reset `z` to the objective `costs` (maximized) priced out against the
    /// current basis.
    fn set_objective(&mut self, costs: &[Rational]) {
        self.z = vec![Rational::zero(); self.cols + 1];
        for (j, c) in costs.iter().enumerate() {
            self.z[j] = -c.clone();
        }
        for r in 0..self.rows.len() {
            let b = self.basis[r];
            if !self.z[b].is_zero() {
                let f = self.z[b].clone();
                for (v, p) in self.z.iter_mut().zip(&self.rows[r]) {
                    *v -= &f * p;
                }
            }
        }
    }

    /// Bland's rule: lowest-index improving column, lowest-index basic
    /// variable among tied ratios. Returns false when unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| self.z[j] < Rational::zero()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if row[c] > Rational::zero() {
                    let ratio = &row[self.cols] / &row[c];
                    let better = match &leave {
                        None => true,
                        Some((best_r, best)) => {
                            ratio < *best || (ratio == *best && self.basis[r] < self.basis[*best_r])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, c);
        }
    }
}

pub fn simplex_solve(lp: &LpProblem) -> LpResult {
    let n = lp.vars;
    let m = lp.rows.len();
    let artificial: Vec<usize> = (0..m)
        .filter(|&i| lp.rows[i].1 < Rational::zero())
        .collect();
    // columns: originals, one slack per row, then artificials
    let cols = n + m + artificial.len();
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for (i, (coefficients, bound)) in lp.rows.iter().enumerate() {
        let mut row = vec![Rational::zero(); cols + 1];
        let negate = *bound < Rational::zero();
        let sign = if negate {
            -Rational::one()
        } else {
            Rational::one()
        };
        for (j, a) in coefficients.iter().enumerate() {
            row[j] = a * &sign;
        }
        row[n + i] = sign.clone();
        row[cols] = bound * &sign;
        if negate {
            let k = artificial
                .iter()
                .position(|&a| a == i)
                .expect("artificial row");
            row[n + m + k] = Rational::one();
            basis.push(n + m + k);
        } else {
            basis.push(n + i);
        }
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        z: Vec::new(),
        basis,
        cols,
    };

    if !artificial.is_empty() {
        let mut costs = vec![Rational::zero(); cols];
        for k in 0..artificial.len() {
            costs[n + m + k] = -Rational::one();
        }
        t.set_objective(&costs);
        t.optimize(cols);
        if t.z[cols] < Rational::zero() {
            return LpResult::status(LpStatus::Infeasible);
        }
        // drive zero-level artificials out of the basis, dropping redundant rows
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= n + m {
                match (0..n + m).find(|&j| !t.rows[r][j].is_zero()) {
                    Some(c) => t.pivot(r, c),
                    None => {
                        t.rows.remove(r);
                        t.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut costs = vec![Rational::zero(); cols];
    costs[..n].clone_from_slice(&lp.objective);
    t.set_objective(&costs);
    if !t.optimize(n + m) {
        return LpResult::status(LpStatus::Unbounded);
    }
    let mut point = vec![Rational::zero(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            point[b] = t.rows[r][cols].clone();
        }
    }
    LpResult {
        status: LpStatus::Optimal,
        value: Some(t.z[cols].clone()),
        point: Some(point),
    }
}
