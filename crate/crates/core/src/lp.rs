//! Dense two-phase simplex over exact rationals.
//!
//! Solves `maximize c·x  s.t.  A x = b,  x ≥ l`. Pivoting follows Bland's
//! rule (lowest-index entering column, lowest-index leaving basic variable
//! on ratio ties), so the method terminates on degenerate problems without
//! any tolerance. Every outcome carries a checkable witness.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    /// Objective to maximize, one entry per variable.
    pub objective: Vec<Rational>,
    /// Equality rows of `A`.
    pub rows: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
    /// Lower bound of each variable.
    pub lower: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<Rational>,
    pub value: Rational,
}

/// Multipliers `w` with `wᵀA ≤ 0` componentwise and `wᵀ(b − A l) > 0`.
/// No `x ≥ l` can then satisfy `A x = b`.
#[derive(Clone, Debug, PartialEq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Rational>,
}

/// A feasible point and a direction `d ≥ 0` with `A d = 0` and `c·d > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnboundedRay {
    pub point: Vec<Rational>,
    pub direction: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible(FarkasCertificate),
    Unbounded(UnboundedRay),
}

impl LinearProgram {
    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.vars();
        if self.lower.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} lower bounds for {n} variables",
                self.lower.len()
            )));
        }
        if self.rhs.len() != self.rows.len() {
            return Err(Error::InvalidInput(format!(
                "{} right-hand sides for {} rows",
                self.rhs.len(),
                self.rows.len()
            )));
        }
        if let Some(bad) = self.rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!(
                "row {bad} has {} coefficients, expected {n}",
                self.rows[bad].len()
            )));
        }
        Ok(())
    }

    /// `b − A l`, the right-hand side after shifting variables to `x − l`.
    fn shifted_rhs(&self) -> Vec<Rational> {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| b - dot(row, &self.lower))
            .collect()
    }

    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.vars()
            && x.iter().zip(&self.lower).all(|(v, l)| v >= l)
            && self
                .rows
                .iter()
                .zip(&self.rhs)
                .all(|(row, b)| &dot(row, x) == b)
    }
}

impl FarkasCertificate {
    pub fn verify(&self, lp: &LinearProgram) -> bool {
        let w = &self.multipliers;
        if w.len() != lp.rows.len() {
            return false;
        }
        let columns_ok = (0..lp.vars()).all(|j| {
            let s = lp
                .rows
                .iter()
                .zip(w)
                .fold(Rational::zero(), |acc, (row, wi)| acc + &row[j] * wi);
            !s.is_positive()
        });
        columns_ok && dot(w, &lp.shifted_rhs()).is_positive()
    }
}

impl UnboundedRay {
    pub fn verify(&self, lp: &LinearProgram) -> bool {
        lp.is_feasible_point(&self.point)
            && self.direction.len() == lp.vars()
            && self.direction.iter().all(|d| !d.is_negative())
            && lp
                .rows
                .iter()
                .all(|row| dot(row, &self.direction).is_zero())
            && dot(&lp.objective, &self.direction).is_positive()
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

struct Tableau {
    /// Constraint rows over structural then artificial columns.
    t: Vec<Vec<Rational>>,
    beta: Vec<Rational>,
    basis: Vec<usize>,
    structural: usize,
}

enum Step {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn pivot(&mut self, r: usize, j: usize) {
        let inv = Rational::one() / &self.t[r][j];
        for x in self.t[r].iter_mut() {
            *x *= &inv;
        }
        self.beta[r] *= &inv;
        let pivot_row = self.t[r].clone();
        let pivot_beta = self.beta[r].clone();
        for i in 0..self.t.len() {
            if i == r || self.t[i][j].is_zero() {
                continue;
            }
            let f = self.t[i][j].clone();
            for (x, y) in self.t[i].iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            self.beta[i] -= &f * &pivot_beta;
        }
        self.basis[r] = j;
    }

    /// Simplex multipliers `c_Bᵀ B⁻¹`, read off the artificial columns
    /// (which started as the identity).
    fn duals(&self, cost: &[Rational]) -> Vec<Rational> {
        let m = self.t.len();
        (0..m)
            .map(|i| {
                (0..m).fold(Rational::zero(), |acc, r| {
                    acc + &cost[self.basis[r]] * &self.t[r][self.structural + i]
                })
            })
            .collect()
    }

    /// Maximizes `cost` with entering columns restricted to `0..enter_limit`.
    ///
    /// Entering columns follow the largest reduced cost, except after a
    /// degenerate pivot, where Bland's lowest-index rule takes over until the
    /// objective moves again. Cycling needs an unbroken run of degenerate
    /// pivots, and Bland's rule cannot cycle within one.
    fn run(&mut self, cost: &[Rational], enter_limit: usize) -> Step {
        let mut in_basis = vec![false; self.t.first().map_or(0, Vec::len)];
        for &b in &self.basis {
            in_basis[b] = true;
        }
        let mut bland = false;
        loop {
            let mut entering: Option<(usize, Rational)> = None;
            for j in 0..enter_limit {
                if in_basis[j] {
                    continue;
                }
                let reduced = self
                    .t
                    .iter()
                    .zip(&self.basis)
                    .filter(|(row, _)| !row[j].is_zero())
                    .fold(cost[j].clone(), |acc, (row, &b)| acc - &cost[b] * &row[j]);
                if !reduced.is_positive() {
                    continue;
                }
                if bland {
                    entering = Some((j, reduced));
                    break;
                }
                if entering.as_ref().is_none_or(|(_, best)| reduced > *best) {
                    entering = Some((j, reduced));
                }
            }
            let Some((j, _)) = entering else {
                return Step::Optimal;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.t.len() {
                if !self.t[i][j].is_positive() {
                    continue;
                }
                let ratio = &self.beta[i] / &self.t[i][j];
                let better = match &leave {
                    None => true,
                    Some((r, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, step)) => {
                    bland = step.is_zero();
                    in_basis[self.basis[r]] = false;
                    in_basis[j] = true;
                    self.pivot(r, j);
                }
                None => return Step::Unbounded(j),
            }
        }
    }

    fn basic_solution(&self) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); self.structural];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.structural {
                y[b] = self.beta[r].clone();
            }
        }
        y
    }
}

/// Solves `lp` exactly. Infeasibility and unboundedness are ordinary
/// outcomes; only malformed input is an error.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.vars();
    let m = lp.rows.len();
    let shifted = lp.shifted_rhs();

    // Flip rows so the phase-one start (artificials = rhs) is feasible.
    let signs: Vec<Rational> = shifted
        .iter()
        .map(|b| {
            if b.is_negative() {
                -Rational::one()
            } else {
                Rational::one()
            }
        })
        .collect();
    let mut t = Vec::with_capacity(m);
    for (i, row) in lp.rows.iter().enumerate() {
        let mut full: Vec<Rational> = row.iter().map(|a| a * &signs[i]).collect();
        full.extend((0..m).map(|a| {
            if a == i {
                Rational::one()
            } else {
                Rational::zero()
            }
        }));
        t.push(full);
    }
    let mut tab = Tableau {
        t,
        beta: shifted.iter().zip(&signs).map(|(b, s)| b * s).collect(),
        basis: (n..n + m).collect(),
        structural: n,
    };

    let mut phase_one = vec![Rational::zero(); n];
    phase_one.extend(std::iter::repeat_n(-Rational::one(), m));
    // Phase one is bounded above by zero, so it always ends optimal.
    let _ = tab.run(&phase_one, n + m);
    let infeasibility = tab
        .basis
        .iter()
        .zip(&tab.beta)
        .filter(|(&b, _)| b >= n)
        .fold(Rational::zero(), |acc, (_, v)| acc + v);
    if infeasibility.is_positive() {
        let y = tab.duals(&phase_one);
        let multipliers = y.iter().zip(&signs).map(|(yi, s)| -(yi * s)).collect();
        let cert = FarkasCertificate { multipliers };
        if !cert.verify(lp) {
            return Err(Error::Certificate("phase-one Farkas multipliers".into()));
        }
        return Ok(LpOutcome::Infeasible(cert));
    }

    // Drive zero-level artificials out of the basis; rows where that is
    // impossible are linear combinations of the others and are dropped.
    let mut r = 0;
    while r < tab.t.len() {
        if tab.basis[r] < n {
            r += 1;
            continue;
        }
        match (0..n).find(|&j| !tab.t[r][j].is_zero()) {
            Some(j) => {
                tab.pivot(r, j);
                r += 1;
            }
            None => {
                tab.t.remove(r);
                tab.beta.remove(r);
                tab.basis.remove(r);
            }
        }
    }

    let mut cost = lp.objective.clone();
    cost.extend(std::iter::repeat_n(Rational::zero(), m));
    let step = tab.run(&cost, n);
    let y = tab.basic_solution();
    let point: Vec<Rational> = y.iter().zip(&lp.lower).map(|(v, l)| v + l).collect();
    match step {
        Step::Optimal => {
            let value = dot(&lp.objective, &point);
            Ok(LpOutcome::Optimal(LpSolution { x: point, value }))
        }
        Step::Unbounded(j) => {
            let mut direction = vec![Rational::zero(); n];
            direction[j] = Rational::one();
            for (row, &b) in tab.t.iter().zip(&tab.basis) {
                if b < n {
                    direction[b] = -row[j].clone();
                }
            }
            let ray = UnboundedRay { point, direction };
            if !ray.verify(lp) {
                return Err(Error::Certificate("unbounded ray".into()));
            }
            Ok(LpOutcome::Unbounded(ray))
        }
    }
}
