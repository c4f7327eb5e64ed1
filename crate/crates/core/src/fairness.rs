//! Exact fairness oracles: envy-based notions, the proportional, maximin and
//! AnyPrice shares, and the balanced two-way cut used by cut-and-choose.
//!
//! Every oracle has two layers: a single-agent layer over any
//! [`SetFunction`], and an instance layer that evaluates an agent's
//! valuation at a given signal profile first.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::bundle::{Allocation, Bundle};
use crate::error::{Error, Result};
use crate::instance::{Instance, SignalProfile};
use crate::lp::{strict_unaffordability_margin, Margin, PriceVector};
use crate::rational::Rational;
use crate::valuation::{SetFunction, ValueTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FairnessNotion {
    EF,
    EF1,
    EFX,
    PROP,
    MMS,
    APS,
}

impl FairnessNotion {
    pub const ALL: [FairnessNotion; 6] = [
        FairnessNotion::EF,
        FairnessNotion::EF1,
        FairnessNotion::EFX,
        FairnessNotion::PROP,
        FairnessNotion::MMS,
        FairnessNotion::APS,
    ];

    pub fn is_envy_based(self) -> bool {
        matches!(self, FairnessNotion::EF | FairnessNotion::EF1 | FairnessNotion::EFX)
    }
}

impl fmt::Display for FairnessNotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FairnessNotion::EF => "EF",
            FairnessNotion::EF1 => "EF1",
            FairnessNotion::EFX => "EFX",
            FairnessNotion::PROP => "PROP",
            FairnessNotion::MMS => "MMS",
            FairnessNotion::APS => "APS",
        };
        f.write_str(s)
    }
}

impl FromStr for FairnessNotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FairnessNotion::ALL
            .into_iter()
            .find(|n| n.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::input(format!("unknown fairness notion {s:?}")))
    }
}

/// Why an envy-based notion fails: `agent` values `rival`'s bundle (minus
/// `good`, for EF1/EFX) above its own.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnvyWitness {
    pub agent: usize,
    pub rival: usize,
    /// For EFX the good whose removal still leaves envy; absent for EF and
    /// EF1 (where no single removal helps).
    pub good: Option<usize>,
}

/// Checks EF, EF1 or EFX for one agent against every other bundle.
pub fn envy_witness(
    valuation: &impl SetFunction,
    allocation: &Allocation,
    agent: usize,
    notion: FairnessNotion,
) -> Result<Option<EnvyWitness>> {
    if !notion.is_envy_based() {
        return Err(Error::input(format!("{notion} is not an envy-based notion")));
    }
    let own = valuation.value(allocation.bundle(agent));
    for (rival, &other) in allocation.bundles().iter().enumerate() {
        if rival == agent {
            continue;
        }
        let witness = match notion {
            FairnessNotion::EF => (valuation.value(other) > own).then_some(None),
            FairnessNotion::EF1 => {
                let forgiven = other.is_empty()
                    || other.items().any(|j| own >= valuation.value(other.without(j)));
                (!forgiven).then_some(None)
            }
            FairnessNotion::EFX => other
                .items()
                .find(|&j| valuation.value(other.without(j)) > own)
                .map(Some),
            _ => unreachable!(),
        };
        if let Some(good) = witness {
            return Ok(Some(EnvyWitness { agent, rival, good }));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnvyVerdict {
    pub holds: bool,
    pub witness: Option<EnvyWitness>,
}

/// EF/EF1/EFX for `agent` with values taken at `profile`.
pub fn envy_check(
    allocation: &Allocation,
    agent: usize,
    profile: &SignalProfile,
    notion: FairnessNotion,
    instance: &Instance,
) -> Result<EnvyVerdict> {
    check_allocation(allocation, instance)?;
    let v = instance.valuation_at(agent, profile)?;
    let witness = envy_witness(&v, allocation, agent, notion)?;
    Ok(EnvyVerdict {
        holds: witness.is_none(),
        witness,
    })
}

fn check_allocation(allocation: &Allocation, instance: &Instance) -> Result<()> {
    if allocation.num_agents() != instance.num_agents() {
        return Err(Error::input(format!(
            "allocation has {} bundles for {} agents",
            allocation.num_agents(),
            instance.num_agents()
        )));
    }
    Allocation::new(allocation.bundles().to_vec(), instance.num_items()).map(|_| ())
}

/// `alpha * v(M)`.
pub fn prop_value(valuation: &impl SetFunction, alpha: &Rational) -> Rational {
    alpha * valuation.value(Bundle::full(valuation.num_items()))
}

pub fn prop_share(agent: usize, profile: &SignalProfile, instance: &Instance) -> Result<Rational> {
    let v = instance.valuation_at(agent, profile)?;
    Ok(prop_value(&v, instance.entitlement(agent)))
}

/// Number of ways to split `m` items into at most `n` unlabeled nonempty
/// blocks (saturating).
pub fn partition_count(m: usize, n: usize) -> u128 {
    // Stirling numbers of the second kind, row by row
    let mut row = vec![0u128; n + 1];
    row[0] = 1;
    for _ in 0..m {
        let mut next = vec![0u128; n + 1];
        for k in 1..=n {
            next[k] = (k as u128)
                .saturating_mul(row[k])
                .saturating_add(row[k - 1]);
        }
        row = next;
    }
    row.iter().fold(0u128, |a, &b| a.saturating_add(b))
}

/// Maximin share over partitions into `n` parts.
///
/// Partitions are enumerated as restricted growth strings (the lowest item of
/// each part opens it), so each unlabeled partition is visited once.
pub fn mms_value(valuation: &impl SetFunction, n: usize, budget: &Budget) -> Result<Rational> {
    Ok(mms_partition(valuation, n, budget)?.0)
}

/// The maximin share and the first partition attaining it.
pub fn mms_partition(
    valuation: &impl SetFunction,
    n: usize,
    budget: &Budget,
) -> Result<(Rational, Vec<Bundle>)> {
    if n == 0 {
        return Err(Error::input("maximin share over zero parts"));
    }
    let m = valuation.num_items();
    budget.check_partitions("maximin-share partitions", partition_count(m, n))?;
    let table = ValueTable::build(valuation, budget)?;
    let mut parts = vec![Bundle::EMPTY; n];
    let mut best: Option<(Rational, Vec<Bundle>)> = None;
    search_partitions(&table, m, 0, 0, &mut parts, &mut best);
    Ok(best.expect("at least one partition exists"))
}

fn search_partitions(
    table: &ValueTable,
    m: usize,
    item: usize,
    used: usize,
    parts: &mut Vec<Bundle>,
    best: &mut Option<(Rational, Vec<Bundle>)>,
) {
    if item == m {
        let worst = parts
            .iter()
            .map(|&p| table.get(p))
            .min()
            .expect("n >= 1");
        if best.as_ref().is_none_or(|(b, _)| worst > b) {
            *best = Some((worst.clone(), parts.clone()));
        }
        return;
    }
    let open = (used + 1).min(parts.len());
    for k in 0..open {
        parts[k] = parts[k].with(item);
        search_partitions(table, m, item + 1, used.max(k + 1), parts, best);
        parts[k] = parts[k].without(item);
    }
}

pub fn mms_share(
    agent: usize,
    profile: &SignalProfile,
    instance: &Instance,
    budget: &Budget,
) -> Result<Rational> {
    if !instance.has_equal_entitlements() {
        return Err(Error::domain("maximin share needs equal entitlements"));
    }
    let v = instance.valuation_at(agent, profile)?;
    mms_value(&v, instance.num_agents(), budget)
}

/// AnyPrice share together with the certificate for the next-higher value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApsOutcome {
    pub value: Rational,
    /// The smallest bundle value above `value` and a price vector under which
    /// every bundle worth at least that much costs strictly more than the
    /// entitlement. Absent when `value` is already the largest bundle value.
    pub rejected: Option<(Rational, PriceVector)>,
}

/// AnyPrice share with entitlement `alpha`, by threshold search.
///
/// Candidate thresholds are the distinct bundle values, scanned from the top.
/// A threshold `z` is rejected exactly when some price vector makes every
/// bundle worth at least `z` strictly unaffordable; the first surviving
/// threshold is the share.
pub fn aps_value(valuation: &impl SetFunction, alpha: &Rational, budget: &Budget) -> Result<ApsOutcome> {
    let m = valuation.num_items();
    if m == 0 {
        return Ok(ApsOutcome {
            value: Rational::zero(),
            rejected: None,
        });
    }
    let table = ValueTable::build(valuation, budget)?;
    let mut thresholds: Vec<&Rational> = table.values().iter().collect();
    thresholds.sort_unstable_by(|a, b| b.cmp(a));
    thresholds.dedup();
    let mut rejected = None;
    for z in thresholds {
        let high: Vec<Bundle> = Bundle::all(m).filter(|&b| table.get(b) >= z).collect();
        match strict_unaffordability_margin(m, &high, alpha, None)? {
            margin @ (Margin::Bounded { .. } | Margin::Unbounded { .. })
                if margin.is_strictly_positive() =>
            {
                let prices = margin.prices().cloned().expect("feasible margin has prices");
                rejected = Some((z.clone(), prices));
            }
            Margin::Infeasible => {
                return Err(Error::invariant("price simplex reported empty"));
            }
            _ => {
                return Ok(ApsOutcome {
                    value: z.clone(),
                    rejected,
                })
            }
        }
    }
    Err(Error::invariant("threshold 0 rejected by the AnyPrice search"))
}

pub fn aps_share(
    agent: usize,
    profile: &SignalProfile,
    entitlement: &Rational,
    instance: &Instance,
    budget: &Budget,
) -> Result<Rational> {
    let v = instance.valuation_at(agent, profile)?;
    Ok(aps_value(&v, entitlement, budget)?.value)
}

/// Best value among bundles costing at most `alpha` under `prices`, and the
/// lexicographically smallest bundle attaining it.
pub fn best_affordable(
    valuation: &impl SetFunction,
    prices: &PriceVector,
    alpha: &Rational,
) -> (Rational, Bundle) {
    let m = valuation.num_items();
    let mut best = (Rational::zero(), Bundle::EMPTY);
    for b in Bundle::all(m) {
        if prices.price(b) <= *alpha {
            let v = valuation.value(b);
            if v > best.0 {
                best = (v, b);
            }
        }
    }
    best
}

/// The two-way cut `T` with `v(T) >= v(M \ T) = MMS(v)` and
/// `v(T \ {j}) <= v(M \ T)` for every `j` in `T`; the numerically smallest
/// such bundle is returned.
pub fn plaut_roughgarden_cut(valuation: &impl SetFunction, budget: &Budget) -> Result<Bundle> {
    let m = valuation.num_items();
    let table = ValueTable::build(valuation, budget)?;
    let mms = mms_value(&table, 2, budget)?;
    Bundle::all(m)
        .find(|&t| {
            let rest = table.get(t.complement(m));
            table.get(t) >= rest
                && *rest == mms
                && t.items().all(|j| table.get(t.without(j)) <= rest)
        })
        .ok_or_else(|| Error::invariant("no balanced cut found; is the valuation monotone?"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NotionVerdict {
    pub notion: FairnessNotion,
    pub holds: bool,
    /// The share compared against, for share-based notions.
    #[serde(with = "crate::rational::serde_opt", skip_serializing_if = "Option::is_none")]
    pub share: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<EnvyWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgentFairness {
    pub agent: usize,
    pub profile: SignalProfile,
    #[serde(with = "crate::rational::serde_str")]
    pub value: Rational,
    pub verdicts: Vec<NotionVerdict>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FairnessReport {
    pub agents: Vec<AgentFairness>,
}

impl FairnessReport {
    pub fn verdict(&self, agent: usize, notion: FairnessNotion) -> Option<&NotionVerdict> {
        self.agents[agent].verdicts.iter().find(|v| v.notion == notion)
    }

    /// Whether `notion` holds for `agent`; `None` if it was not audited.
    pub fn holds(&self, agent: usize, notion: FairnessNotion) -> Option<bool> {
        self.verdict(agent, notion).map(|v| v.holds)
    }

    /// Whether `notion` holds for every agent.
    pub fn holds_for_all(&self, notion: FairnessNotion) -> Option<bool> {
        (0..self.agents.len())
            .map(|i| self.holds(i, notion))
            .collect::<Option<Vec<_>>>()
            .map(|v| v.into_iter().all(|h| h))
    }

    pub fn all_hold(&self) -> bool {
        self.agents.iter().all(|a| a.verdicts.iter().all(|v| v.holds))
    }
}

/// Audits `notions` for each agent against its own evaluation profile.
pub fn audit(
    allocation: &Allocation,
    per_agent_profiles: &[SignalProfile],
    notions: &[FairnessNotion],
    instance: &Instance,
    budget: &Budget,
) -> Result<FairnessReport> {
    check_allocation(allocation, instance)?;
    let n = instance.num_agents();
    if per_agent_profiles.len() != n {
        return Err(Error::input(format!(
            "{} evaluation profiles for {n} agents",
            per_agent_profiles.len()
        )));
    }
    if notions.contains(&FairnessNotion::MMS) && !instance.has_equal_entitlements() {
        return Err(Error::domain("maximin share needs equal entitlements"));
    }
    let mut agents = Vec::with_capacity(n);
    for (agent, profile) in per_agent_profiles.iter().enumerate() {
        let v = instance.valuation_at(agent, profile)?;
        let verdicts = audit_agent(&v, allocation, agent, instance.entitlement(agent), notions, budget)?;
        agents.push(AgentFairness {
            agent,
            profile: profile.clone(),
            value: v.value(allocation.bundle(agent)),
            verdicts,
        });
    }
    Ok(FairnessReport { agents })
}

/// Share of `notion` for a single agent with entitlement `alpha` among `n`.
pub fn share_value(
    valuation: &impl SetFunction,
    notion: FairnessNotion,
    alpha: &Rational,
    n: usize,
    budget: &Budget,
) -> Result<Rational> {
    match notion {
        FairnessNotion::PROP => Ok(prop_value(valuation, alpha)),
        FairnessNotion::MMS => mms_value(valuation, n, budget),
        FairnessNotion::APS => Ok(aps_value(valuation, alpha, budget)?.value),
        _ => Err(Error::input(format!("{notion} is not a share-based notion"))),
    }
}

pub(crate) fn audit_agent(
    valuation: &impl SetFunction,
    allocation: &Allocation,
    agent: usize,
    alpha: &Rational,
    notions: &[FairnessNotion],
    budget: &Budget,
) -> Result<Vec<NotionVerdict>> {
    let own = valuation.value(allocation.bundle(agent));
    notions
        .iter()
        .map(|&notion| {
            if notion.is_envy_based() {
                let witness = envy_witness(valuation, allocation, agent, notion)?;
                Ok(NotionVerdict {
                    notion,
                    holds: witness.is_none(),
                    share: None,
                    witness,
                })
            } else {
                let share = share_value(valuation, notion, alpha, allocation.num_agents(), budget)?;
                Ok(NotionVerdict {
                    notion,
                    holds: own >= share,
                    share: Some(share),
                    witness: None,
                })
            }
        })
        .collect()
}
