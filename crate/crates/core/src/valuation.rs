//! Single-agent set functions: a valuation with its signal profile fixed.

use std::sync::Arc;

use num_traits::Zero;

use crate::budget::Budget;
use crate::bundle::Bundle;
use crate::error::Result;
use crate::rational::{int, Rational};
use crate::setcover::SetCover;

/// A function from bundles of `{0, .., m-1}` to nonnegative rationals.
pub trait SetFunction {
    fn num_items(&self) -> usize;
    fn value(&self, bundle: Bundle) -> Rational;
}

/// One agent's valuation evaluated at a fixed signal profile.
#[derive(Clone, Debug)]
pub enum AgentValuation {
    Additive(Vec<Rational>),
    /// Max over additive clauses; never empty.
    Xos { m: usize, clauses: Vec<Vec<Rational>> },
    /// Dense table indexed by [`Bundle::index`].
    Table { m: usize, values: Arc<[Rational]> },
    SetCover(Arc<SetCover>),
}

impl AgentValuation {
    pub fn additive(weights: Vec<Rational>) -> Self {
        AgentValuation::Additive(weights)
    }

    pub fn xos(m: usize, clauses: Vec<Vec<Rational>>) -> Self {
        AgentValuation::Xos { m, clauses }
    }

    /// Tabulates an arbitrary function of bundles over `m` items.
    pub fn from_fn(m: usize, f: impl Fn(Bundle) -> Rational) -> Self {
        AgentValuation::Table {
            m,
            values: Bundle::all(m).map(f).collect(),
        }
    }
}

fn clause_sum(clause: &[Rational], bundle: Bundle) -> Rational {
    bundle
        .items()
        .fold(Rational::zero(), |acc, j| acc + &clause[j])
}

impl SetFunction for AgentValuation {
    fn num_items(&self) -> usize {
        match self {
            AgentValuation::Additive(w) => w.len(),
            AgentValuation::Xos { m, .. } | AgentValuation::Table { m, .. } => *m,
            AgentValuation::SetCover(sc) => sc.num_items(),
        }
    }

    fn value(&self, bundle: Bundle) -> Rational {
        match self {
            AgentValuation::Additive(w) => clause_sum(w, bundle),
            AgentValuation::Xos { clauses, .. } => clauses
                .iter()
                .map(|c| clause_sum(c, bundle))
                .max()
                .unwrap_or_else(Rational::zero),
            AgentValuation::Table { values, .. } => values[bundle.index()].clone(),
            AgentValuation::SetCover(sc) => int(sc.value(bundle) as i64),
        }
    }
}

/// All `2^m` values of a set function, precomputed.
#[derive(Clone, Debug)]
pub struct ValueTable {
    m: usize,
    values: Vec<Rational>,
}

impl ValueTable {
    pub fn build(f: &impl SetFunction, budget: &Budget) -> Result<Self> {
        let m = f.num_items();
        budget.check_subsets(m)?;
        Ok(ValueTable {
            m,
            values: Bundle::all(m).map(|b| f.value(b)).collect(),
        })
    }

    pub fn get(&self, bundle: Bundle) -> &Rational {
        &self.values[bundle.index()]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }
}

impl SetFunction for ValueTable {
    fn num_items(&self) -> usize {
        self.m
    }

    fn value(&self, bundle: Bundle) -> Rational {
        self.values[bundle.index()].clone()
    }
}
