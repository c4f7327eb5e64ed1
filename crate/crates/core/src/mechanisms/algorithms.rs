//! Allocation algorithms for the independent-value setting, used as the
//! inner rule of the black-box mechanism.

use std::fmt;

use crate::budget::Budget;
use crate::bundle::{Allocation, Bundle};
use crate::error::{Error, Result};
use crate::fairness::{envy_witness, share_value, FairnessNotion};
use crate::rational::Rational;
use crate::valuation::{AgentValuation, SetFunction, ValueTable};

/// A rule mapping one fixed valuation per agent to a complete allocation.
pub trait AllocationAlgorithm: fmt::Debug + Send + Sync {
    fn name(&self) -> String;

    fn allocate(
        &self,
        valuations: &[AgentValuation],
        entitlements: &[Rational],
        budget: &Budget,
    ) -> Result<Allocation>;
}

fn item_count(valuations: &[AgentValuation]) -> Result<usize> {
    let m = valuations
        .first()
        .map(|v| v.num_items())
        .ok_or_else(|| Error::input("no agents to allocate to"))?;
    if valuations.iter().any(|v| v.num_items() != m) {
        return Err(Error::input("valuations disagree on the number of items"));
    }
    Ok(m)
}

/// Agents pick in index order, cyclically, each taking the remaining item
/// with the largest marginal value for its current bundle. Ties go to the
/// lowest item index.
#[derive(Clone, Copy, Debug, Default)]
pub struct RoundRobin;

impl AllocationAlgorithm for RoundRobin {
    fn name(&self) -> String {
        "round-robin".into()
    }

    fn allocate(&self, valuations: &[AgentValuation], _: &[Rational], _: &Budget) -> Result<Allocation> {
        let m = item_count(valuations)?;
        let n = valuations.len();
        let mut bundles = vec![Bundle::EMPTY; n];
        let mut remaining = Bundle::full(m);
        let mut turn = 0;
        while !remaining.is_empty() {
            let v = &valuations[turn];
            let held = bundles[turn];
            let base = v.value(held);
            let mut pick: Option<(usize, Rational)> = None;
            for j in remaining.items() {
                let gain = v.value(held.with(j)) - &base;
                if pick.as_ref().is_none_or(|(_, best)| gain > *best) {
                    pick = Some((j, gain));
                }
            }
            let (j, _) = pick.expect("remaining is nonempty");
            bundles[turn] = held.with(j);
            remaining = remaining.without(j);
            turn = (turn + 1) % n;
        }
        Allocation::new(bundles, m)
    }
}

/// The first allocation, in lexicographic order of the owner vector (owner
/// of item 0 most significant), that satisfies `notion` for every agent.
#[derive(Clone, Copy, Debug)]
pub struct BruteForceFair {
    pub notion: FairnessNotion,
}

impl BruteForceFair {
    pub fn new(notion: FairnessNotion) -> Self {
        BruteForceFair { notion }
    }
}

impl AllocationAlgorithm for BruteForceFair {
    fn name(&self) -> String {
        format!("brute-force-{}", self.notion.to_string().to_ascii_lowercase())
    }

    fn allocate(
        &self,
        valuations: &[AgentValuation],
        entitlements: &[Rational],
        budget: &Budget,
    ) -> Result<Allocation> {
        let m = item_count(valuations)?;
        let n = valuations.len();
        if entitlements.len() != n {
            return Err(Error::input("one entitlement per agent required"));
        }
        if self.notion == FairnessNotion::MMS && entitlements.iter().any(|a| *a != entitlements[0]) {
            return Err(Error::domain("maximin share needs equal entitlements"));
        }
        let total = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
        budget.check_partitions("allocations", total)?;
        let tables = valuations
            .iter()
            .map(|v| ValueTable::build(v, budget))
            .collect::<Result<Vec<_>>>()?;
        let shares = if self.notion.is_envy_based() {
            None
        } else {
            Some(
                tables
                    .iter()
                    .zip(entitlements)
                    .map(|(t, a)| share_value(t, self.notion, a, n, budget))
                    .collect::<Result<Vec<_>>>()?,
            )
        };

        let mut owners = vec![0usize; m];
        loop {
            let allocation = Allocation::from_owners(&owners, n);
            if self.is_fair(&allocation, &tables, shares.as_deref())? {
                return Ok(allocation);
            }
            // odometer step, last item least significant
            let mut pos = m;
            loop {
                if pos == 0 {
                    return Err(Error::domain(format!(
                        "no allocation is {} for every agent",
                        self.notion
                    )));
                }
                pos -= 1;
                owners[pos] += 1;
                if owners[pos] < n {
                    break;
                }
                owners[pos] = 0;
            }
        }
    }
}

impl BruteForceFair {
    fn is_fair(&self, allocation: &Allocation, tables: &[ValueTable], shares: Option<&[Rational]>) -> Result<bool> {
        for (agent, table) in tables.iter().enumerate() {
            let ok = match shares {
                Some(shares) => *table.get(allocation.bundle(agent)) >= shares[agent],
                None => envy_witness(table, allocation, agent, self.notion)?.is_none(),
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
