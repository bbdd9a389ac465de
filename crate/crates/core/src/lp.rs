//! Dense two-phase simplex over exact rationals.
//!
//! Bland's least-index rule is used for both the entering and the leaving
//! variable, so the method never cycles and the optimal vertex returned is a
//! deterministic function of the input. Intended for small problems only.

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `optimize c.x  s.t.  rows,  x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<Rational>,
    sense: Sense,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub value: Rational,
    pub point: Vec<Rational>,
}

impl LinearProgram {
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            sense,
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn set_objective(&mut self, coeffs: Vec<Rational>) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.objective = coeffs;
    }

    pub fn set_sense(&mut self, sense: Sense) {
        self.sense = sense;
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Sparse helper: `terms` lists `(variable, coefficient)` pairs; repeated
    /// variables accumulate.
    pub fn add_sparse(&mut self, terms: &[(usize, Rational)], relation: Relation, rhs: Rational) {
        let mut coeffs = vec![Rational::zero(); self.num_vars];
        for (v, c) in terms {
            coeffs[*v] += c;
        }
        self.add(coeffs, relation, rhs);
    }

    pub fn evaluate(&self, point: &[Rational]) -> Rational {
        self.objective.iter().zip(point).map(|(c, x)| c * x).sum()
    }

    /// Whether `point` satisfies every constraint and non-negativity exactly.
    pub fn is_feasible(&self, point: &[Rational]) -> bool {
        if point.len() != self.num_vars || point.iter().any(|x| x.is_negative()) {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs: Rational = c.coeffs.iter().zip(point).map(|(a, x)| a * x).sum();
            match c.relation {
                Relation::Le => lhs <= c.rhs,
                Relation::Ge => lhs >= c.rhs,
                Relation::Eq => lhs == c.rhs,
            }
        })
    }

    pub fn solve(&self) -> Result<LpSolution> {
        Tableau::build(self).solve(self)
    }
}

struct Tableau {
    /// Each row holds the column coefficients followed by the right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    num_cols: usize,
    /// Columns `>= first_artificial` are artificial.
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.num_vars;
        // Normalize every row to a non-negative right-hand side.
        let normalized: Vec<(Vec<Rational>, Relation, Rational)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), flipped, -&c.rhs)
                } else if c.rhs.is_zero() && c.relation == Relation::Ge {
                    // a.x >= 0  <=>  -a.x <= 0, which takes a slack basis column.
                    (
                        c.coeffs.iter().map(|a| -a).collect(),
                        Relation::Le,
                        c.rhs.clone(),
                    )
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();

        let num_slack = normalized
            .iter()
            .filter(|(_, r, _)| *r != Relation::Eq)
            .count();
        let num_art = normalized
            .iter()
            .filter(|(_, r, _)| *r != Relation::Le)
            .count();
        let first_artificial = n + num_slack;
        let num_cols = first_artificial + num_art;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let mut slack = n;
        let mut art = first_artificial;
        for (coeffs, relation, rhs) in normalized {
            let mut row = coeffs;
            row.resize(num_cols + 1, Rational::zero());
            match relation {
                Relation::Le => {
                    row[slack] = Rational::one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                    row[art] = Rational::one();
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = Rational::one();
                    basis.push(art);
                    art += 1;
                }
            }
            row[num_cols] = rhs;
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            num_cols,
            first_artificial,
        }
    }

    fn pivot(&mut self, r: usize, c: usize, cost: &mut [Rational]) {
        let p = self.rows[r][c].clone();
        if p != Rational::one() {
            for a in self.rows[r].iter_mut() {
                if !a.is_zero() {
                    *a = &*a / &p;
                }
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            eliminate(row, &pivot_row, &factor);
        }
        if !cost[c].is_zero() {
            let factor = cost[c].clone();
            eliminate(cost, &pivot_row, &factor);
        }
        self.basis[r] = c;
    }

    /// Reduced-cost row for minimizing `costs` given the current basis.
    fn price_out(&self, costs: &[Rational]) -> Vec<Rational> {
        let mut row = costs.to_vec();
        row.resize(self.num_cols + 1, Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            if !row[b].is_zero() {
                let factor = row[b].clone();
                eliminate(&mut row, &self.rows[i], &factor);
            }
        }
        row
    }

    /// Runs Bland-rule simplex on the reduced-cost row `cost`, allowing only
    /// columns below `enter_limit` to enter.
    fn run(&mut self, cost: &mut [Rational], enter_limit: usize) -> Result<()> {
        let rhs = self.num_cols;
        loop {
            let Some(enter) = (0..enter_limit).find(|&j| cost[j].is_negative()) else {
                return Ok(());
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Unbounded);
            };
            self.pivot(r, enter, cost);
        }
    }

    fn solve(mut self, lp: &LinearProgram) -> Result<LpSolution> {
        let rhs = self.num_cols;
        if self.first_artificial < self.num_cols {
            let mut phase1 = vec![Rational::zero(); self.num_cols];
            for c in phase1.iter_mut().skip(self.first_artificial) {
                *c = Rational::one();
            }
            let mut cost = self.price_out(&phase1);
            self.run(&mut cost, self.num_cols)?;
            // cost[rhs] holds minus the phase-one objective.
            if !cost[rhs].is_zero() {
                return Err(Error::Infeasible);
            }
            self.drive_out_artificials(&mut cost);
        }

        let mut costs: Vec<Rational> = match lp.sense {
            Sense::Minimize => lp.objective.clone(),
            Sense::Maximize => lp.objective.iter().map(|c| -c).collect(),
        };
        costs.resize(self.num_cols, Rational::zero());
        let mut cost = self.price_out(&costs);
        self.run(&mut cost, self.first_artificial)?;

        let mut point = vec![Rational::zero(); lp.num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < lp.num_vars {
                point[b] = self.rows[i][rhs].clone();
            }
        }
        let value = lp.evaluate(&point);
        Ok(LpSolution { value, point })
    }

    /// After a feasible phase one, pivots zero-valued artificials out of the
    /// basis; rows where that is impossible are redundant and are dropped.
    fn drive_out_artificials(&mut self, cost: &mut [Rational]) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < self.first_artificial {
                i += 1;
                continue;
            }
            match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                Some(j) => {
                    self.pivot(i, j, cost);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }
}

fn eliminate(row: &mut [Rational], pivot_row: &[Rational], factor: &Rational) {
    for (a, p) in row.iter_mut().zip(pivot_row) {
        if !p.is_zero() {
            *a -= factor * p;
        }
    }
}
