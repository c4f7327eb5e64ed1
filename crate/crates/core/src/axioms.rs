//! Exhaustive (or seeded-sample) checks of valuation class claims.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::budget::Budget;
use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::instance::{Instance, SignalProfile};
use crate::lp::{lp_maximize, LinearProgram, LpOutcome, Relation};
use crate::rational::Rational;
use crate::valuation::{SetFunction, ValueTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomClaim {
    Monotone,
    Additive,
    /// Every bundle has a supporting additive clause (fractionally
    /// subadditive), checked by one feasibility program per bundle.
    Xos,
    Subadditive,
}

impl fmt::Display for AxiomClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AxiomClaim::Monotone => "monotone",
            AxiomClaim::Additive => "additive",
            AxiomClaim::Xos => "xos",
            AxiomClaim::Subadditive => "subadditive",
        })
    }
}

impl FromStr for AxiomClaim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "monotone" => Ok(AxiomClaim::Monotone),
            "additive" => Ok(AxiomClaim::Additive),
            "xos" => Ok(AxiomClaim::Xos),
            "subadditive" => Ok(AxiomClaim::Subadditive),
            other => Err(Error::input(format!("unknown valuation class {other:?}"))),
        }
    }
}

/// A violating input: for monotonicity `bundle ⊂ other` with
/// `v(bundle) > v(other)`; for subadditivity `v(bundle) + v(other) <
/// v(bundle ∪ other)`; for additivity and XOS just the offending bundle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomViolation {
    pub agent: usize,
    pub profile: SignalProfile,
    pub bundle: Bundle,
    pub other: Option<Bundle>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub claim: AxiomClaim,
    pub holds: bool,
    pub violation: Option<AxiomViolation>,
}

/// Checks `claim` for every agent, every signal profile and every bundle
/// (or bundle pair). Enumerations beyond `budget` fail instead of passing.
pub fn verify_valuation_axioms(instance: &Instance, claim: AxiomClaim, budget: &Budget) -> Result<AxiomCheck> {
    let m = instance.num_items();
    budget.check_subsets(m)?;
    if claim == AxiomClaim::Subadditive {
        let pairs = 1u128 << (2 * m);
        budget.check_pairs(pairs.saturating_mul(instance.profile_count() as u128))?;
    }
    for profile in instance.profiles() {
        for agent in 0..instance.num_agents() {
            let table = ValueTable::build(&instance.valuation_at(agent, &profile)?, budget)?;
            if let Some((bundle, other)) = find_violation(&table, claim)? {
                return Ok(AxiomCheck {
                    claim,
                    holds: false,
                    violation: Some(AxiomViolation {
                        agent,
                        profile,
                        bundle,
                        other,
                    }),
                });
            }
        }
    }
    Ok(AxiomCheck {
        claim,
        holds: true,
        violation: None,
    })
}

/// Single-function version of [`verify_valuation_axioms`].
pub fn find_violation(v: &ValueTable, claim: AxiomClaim) -> Result<Option<(Bundle, Option<Bundle>)>> {
    let m = v.num_items();
    match claim {
        AxiomClaim::Monotone => Ok(monotone_violation(v)),
        AxiomClaim::Additive => Ok(Bundle::all(m)
            .find(|&t| {
                let sum: Rational = t.items().map(|j| v.get(Bundle::singleton(j))).sum();
                *v.get(t) != sum
            })
            .map(|t| (t, None))),
        AxiomClaim::Subadditive => {
            for t in Bundle::all(m) {
                for u in Bundle::all(m).filter(|&u| u >= t) {
                    if v.get(t) + v.get(u) < *v.get(t.union(u)) {
                        return Ok(Some((t, Some(u))));
                    }
                }
            }
            Ok(None)
        }
        AxiomClaim::Xos => {
            if let Some(w) = monotone_violation(v) {
                return Ok(Some(w));
            }
            for t in Bundle::all(m) {
                if !has_supporting_clause(v, t)? {
                    return Ok(Some((t, None)));
                }
            }
            Ok(None)
        }
    }
}

fn monotone_violation(v: &ValueTable) -> Option<(Bundle, Option<Bundle>)> {
    let m = v.num_items();
    if !v.get(Bundle::EMPTY).is_zero() {
        return Some((Bundle::EMPTY, None));
    }
    Bundle::all(m).find_map(|t| {
        (0..m)
            .filter(|&j| !t.contains(j))
            .map(|j| t.with(j))
            .find(|&bigger| v.get(t) > v.get(bigger))
            .map(|bigger| (t, Some(bigger)))
    })
}

/// Whether some nonnegative additive `a` supported on `t` has `a(t) = v(t)`
/// and `a(s) <= v(s)` for all `s ⊆ t`.
fn has_supporting_clause(v: &ValueTable, t: Bundle) -> Result<bool> {
    let items: Vec<usize> = t.items().collect();
    let k = items.len();
    if k == 0 {
        return Ok(v.get(t).is_zero());
    }
    let row = |s: Bundle| -> Vec<Rational> {
        items
            .iter()
            .map(|&j| if s.contains(j) { Rational::one() } else { Rational::zero() })
            .collect()
    };
    let mut lp = LinearProgram::new(k);
    lp.add_constraint(row(t), Relation::Eq, v.get(t).clone())?;
    for s in t.subsets().filter(|&s| s != t && !s.is_empty()) {
        lp.add_constraint(row(s), Relation::Le, v.get(s).clone())?;
    }
    Ok(!matches!(lp_maximize(&lp)?, LpOutcome::Infeasible))
}

/// Subadditivity on `samples` seeded random bundle pairs per agent and
/// profile, plus every pair drawn from `canonical`. For valuations over too
/// many items to enumerate.
pub fn verify_subadditive_sampled(
    instance: &Instance,
    samples: usize,
    seed: u64,
    canonical: &[Bundle],
) -> Result<AxiomCheck> {
    let m = instance.num_items();
    let full = Bundle::full(m);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut pairs: Vec<(Bundle, Bundle)> = (0..samples)
        .map(|_| {
            (
                Bundle::from_bits(rng.gen::<u64>()).intersection(full),
                Bundle::from_bits(rng.gen::<u64>()).intersection(full),
            )
        })
        .collect();
    for (i, &a) in canonical.iter().enumerate() {
        for &b in &canonical[i..] {
            pairs.push((a, b));
        }
    }
    for profile in instance.profiles() {
        for agent in 0..instance.num_agents() {
            let v = instance.valuation_at(agent, &profile)?;
            if let Some(&(a, b)) = pairs
                .iter()
                .find(|&&(a, b)| v.value(a) + v.value(b) < v.value(a.union(b)))
            {
                return Ok(AxiomCheck {
                    claim: AxiomClaim::Subadditive,
                    holds: false,
                    violation: Some(AxiomViolation {
                        agent,
                        profile,
                        bundle: a,
                        other: Some(b),
                    }),
                });
            }
        }
    }
    Ok(AxiomCheck {
        claim: AxiomClaim::Subadditive,
        holds: true,
        violation: None,
    })
}
