//! Exact rational linear programming.
//!
//! A dense two-phase simplex with Bland's least-index rule, so it always
//! terminates and every verdict is exact. Problems here are tiny (a price per
//! item plus one margin variable), so no effort goes into sparsity.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize c.x` subject to linear constraints; variables are nonnegative
/// unless marked free.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    num_vars: usize,
    free: Vec<bool>,
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vec<Rational> },
    Infeasible,
    /// The objective is unbounded above; `point` is some feasible point.
    Unbounded { point: Vec<Rational> },
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            free: vec![false; num_vars],
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_free(&self, var: usize) -> bool {
        self.free[var]
    }

    pub fn set_free(&mut self, var: usize) -> Result<()> {
        self.check_var(var)?;
        self.free[var] = true;
        Ok(())
    }

    pub fn set_objective(&mut self, objective: Vec<Rational>) -> Result<()> {
        self.check_len(objective.len(), "objective")?;
        self.objective = objective;
        Ok(())
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Result<()> {
        self.check_len(coeffs.len(), "constraint")?;
        self.constraints.push(Constraint { coeffs, relation, rhs });
        Ok(())
    }

    /// Whether `point` satisfies every constraint and sign restriction exactly.
    pub fn is_feasible(&self, point: &[Rational]) -> bool {
        point.len() == self.num_vars
            && point
                .iter()
                .zip(&self.free)
                .all(|(x, &free)| free || !x.is_negative())
            && self.constraints.iter().all(|c| {
                let lhs: Rational = c.coeffs.iter().zip(point).map(|(a, x)| a * x).sum();
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                }
            })
    }

    pub fn objective_at(&self, point: &[Rational]) -> Rational {
        self.objective.iter().zip(point).map(|(c, x)| c * x).sum()
    }

    fn check_var(&self, var: usize) -> Result<()> {
        if var >= self.num_vars {
            return Err(Error::input(format!("variable {var} out of range ({} variables)", self.num_vars)));
        }
        Ok(())
    }

    fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.num_vars {
            return Err(Error::input(format!(
                "{what} has {len} coefficients, program has {} variables",
                self.num_vars
            )));
        }
        Ok(())
    }
}

/// Solves `program` exactly.
pub fn lp_maximize(program: &LinearProgram) -> Result<LpOutcome> {
    if program.objective.len() != program.num_vars
        || program.constraints.iter().any(|c| c.coeffs.len() != program.num_vars)
    {
        return Err(Error::input("linear program has inconsistent dimensions"));
    }
    Ok(Tableau::build(program).solve(program))
}

/// Dense simplex tableau; the last column of each row holds its right-hand side.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Column of each original variable's positive part, and of its negative
    /// part when free.
    var_cols: Vec<(usize, Option<usize>)>,
    first_artificial: usize,
    num_cols: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn build(program: &LinearProgram) -> Self {
        let mut var_cols = Vec::with_capacity(program.num_vars);
        let mut col = 0;
        for &free in &program.free {
            if free {
                var_cols.push((col, Some(col + 1)));
                col += 2;
            } else {
                var_cols.push((col, None));
                col += 1;
            }
        }
        // normalize every row to a nonnegative right-hand side
        let normalized: Vec<(Vec<Rational>, Relation, Rational)> = program
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
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();
        let num_slack = normalized.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let num_art = normalized.iter().filter(|(_, r, _)| *r != Relation::Le).count();
        let first_slack = col;
        let first_artificial = first_slack + num_slack;
        let num_cols = first_artificial + num_art;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let (mut slack, mut art) = (first_slack, first_artificial);
        for (coeffs, relation, rhs) in normalized {
            let mut row = vec![Rational::zero(); num_cols + 1];
            for (k, a) in coeffs.into_iter().enumerate() {
                let (pos, neg) = var_cols[k];
                if let Some(neg) = neg {
                    row[neg] = -&a;
                }
                row[pos] = a;
            }
            row[num_cols] = rhs;
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
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            var_cols,
            first_artificial,
            num_cols,
        }
    }

    fn solve(mut self, program: &LinearProgram) -> LpOutcome {
        // phase 1: drive the artificial variables to zero
        let phase1_cost: Vec<Rational> = (0..self.num_cols)
            .map(|j| {
                if j >= self.first_artificial {
                    -Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        self.optimize(&phase1_cost, self.num_cols);
        let infeasibility: Rational = self
            .basis
            .iter()
            .zip(&self.rows)
            .filter(|(&b, _)| b >= self.first_artificial)
            .map(|(_, row)| row[self.num_cols].clone())
            .sum();
        if infeasibility.is_positive() {
            return LpOutcome::Infeasible;
        }
        self.evict_artificials();

        let mut cost = vec![Rational::zero(); self.num_cols];
        for (k, c) in program.objective.iter().enumerate() {
            let (pos, neg) = self.var_cols[k];
            cost[pos] = c.clone();
            if let Some(neg) = neg {
                cost[neg] = -c;
            }
        }
        let end = self.optimize(&cost, self.first_artificial);
        let point = self.point();
        match end {
            PhaseEnd::Optimal => LpOutcome::Optimal {
                value: program.objective_at(&point),
                point,
            },
            PhaseEnd::Unbounded => LpOutcome::Unbounded { point },
        }
    }

    /// Runs simplex iterations maximizing `cost` over columns `< allowed`.
    fn optimize(&mut self, cost: &[Rational], allowed: usize) -> PhaseEnd {
        loop {
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut reduced = cost[j].clone();
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    if !row[j].is_zero() && !cost[b].is_zero() {
                        reduced -= &cost[b] * &row[j];
                    }
                }
                reduced.is_positive()
            });
            let Some(entering) = entering else {
                return PhaseEnd::Optimal;
            };
            let mut leaving: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[entering].is_positive() {
                    continue;
                }
                let ratio = &row[self.num_cols] / &row[entering];
                let better = match &leaving {
                    None => true,
                    Some((best, best_ratio)) => {
                        ratio < *best_ratio || (ratio == *best_ratio && self.basis[i] < self.basis[*best])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            let Some((row, _)) = leaving else {
                return PhaseEnd::Unbounded;
            };
            self.pivot(row, entering);
        }
    }

    fn pivot(&mut self, pivot_row: usize, col: usize) {
        let pivot = self.rows[pivot_row][col].clone();
        for x in self.rows[pivot_row].iter_mut() {
            if !x.is_zero() {
                *x /= &pivot;
            }
        }
        let normalized = self.rows[pivot_row].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == pivot_row || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row.iter_mut().zip(&normalized) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
        }
        self.basis[pivot_row] = col;
    }

    /// Pivots zero-valued artificials out of the basis after phase 1, dropping
    /// rows that turn out to be redundant.
    fn evict_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < self.first_artificial {
                i += 1;
                continue;
            }
            match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }

    fn point(&self) -> Vec<Rational> {
        let mut cols = vec![Rational::zero(); self.num_cols];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            cols[b] = row[self.num_cols].clone();
        }
        self.var_cols
            .iter()
            .map(|&(pos, neg)| match neg {
                Some(neg) => &cols[pos] - &cols[neg],
                None => cols[pos].clone(),
            })
            .collect()
    }
}

/// Price vector over items; nonnegative and summing to 1 where produced here.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct PriceVector(#[serde(with = "crate::rational::serde_vec")] pub Vec<Rational>);

impl PriceVector {
    pub fn uniform(m: usize) -> Self {
        PriceVector(vec![Rational::new(1.into(), (m as i64).into()); m])
    }

    pub fn price(&self, bundle: Bundle) -> Rational {
        bundle.items().map(|j| &self.0[j]).sum()
    }

    pub fn is_in_simplex(&self) -> bool {
        !self.0.iter().any(|p| p.is_negative()) && self.0.iter().sum::<Rational>().is_one()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Outcome of [`strict_unaffordability_margin`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Margin {
    /// Largest achievable `delta`, attained at `prices`.
    Bounded { margin: Rational, prices: PriceVector },
    /// No high set was given, so the margin is unconstrained.
    Unbounded { prices: PriceVector },
    Infeasible,
}

impl Margin {
    /// Whether some price vector makes every high set cost strictly more
    /// than the budget (and the affordable set at most the budget).
    pub fn is_strictly_positive(&self) -> bool {
        match self {
            Margin::Bounded { margin, .. } => margin.is_positive(),
            Margin::Unbounded { .. } => true,
            Margin::Infeasible => false,
        }
    }

    pub fn prices(&self) -> Option<&PriceVector> {
        match self {
            Margin::Bounded { prices, .. } | Margin::Unbounded { prices } => Some(prices),
            Margin::Infeasible => None,
        }
    }
}

/// Inclusion-minimal members of `sets`, deduplicated and sorted.
pub fn minimal_sets(sets: &[Bundle]) -> Vec<Bundle> {
    let mut sorted: Vec<Bundle> = sets.to_vec();
    sorted.sort_by_key(|b| (b.len(), *b));
    sorted.dedup();
    let mut kept: Vec<Bundle> = Vec::new();
    for b in sorted {
        if !kept.iter().any(|k| k.is_subset(b)) {
            kept.push(b);
        }
    }
    kept.sort();
    kept
}

/// Maximizes `delta` over prices `p` in the simplex on `m` items subject to
/// `p(T) >= alpha + delta` for every high set `T` and, when given,
/// `p(affordable) <= alpha`.
///
/// The region is closed and bounded, so "some price makes every high set
/// strictly unaffordable" holds exactly when the returned margin is positive.
/// Only inclusion-minimal high sets constrain the optimum, so the others are
/// dropped before solving.
pub fn strict_unaffordability_margin(
    m: usize,
    high_sets: &[Bundle],
    alpha: &Rational,
    affordable: Option<Bundle>,
) -> Result<Margin> {
    let full = Bundle::full(m);
    if let Some(b) = high_sets.iter().chain(&affordable).find(|b| !b.is_subset(full)) {
        return Err(Error::input(format!("bundle {b} not within {m} items")));
    }
    let delta = m;
    let mut lp = LinearProgram::new(m + 1);
    lp.set_free(delta)?;
    let mut objective = vec![Rational::zero(); m + 1];
    objective[delta] = Rational::one();
    lp.set_objective(objective)?;
    let indicator = |b: Bundle| -> Vec<Rational> {
        (0..=m)
            .map(|j| {
                if j < m && b.contains(j) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect()
    };
    lp.add_constraint(indicator(full), Relation::Eq, Rational::one())?;
    for t in minimal_sets(high_sets) {
        let mut row = indicator(t);
        row[delta] = -Rational::one();
        lp.add_constraint(row, Relation::Ge, alpha.clone())?;
    }
    if let Some(a) = affordable {
        lp.add_constraint(indicator(a), Relation::Le, alpha.clone())?;
    }
    let prices = |point: &[Rational]| PriceVector(point[..m].to_vec());
    Ok(match lp_maximize(&lp)? {
        LpOutcome::Optimal { value, point } => Margin::Bounded {
            margin: value,
            prices: prices(&point),
        },
        LpOutcome::Unbounded { point } => Margin::Unbounded {
            prices: prices(&point),
        },
        LpOutcome::Infeasible => Margin::Infeasible,
    })
}
