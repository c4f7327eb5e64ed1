//! Generators and checkers for the negative results: the equilibrium
//! impossibility for MMS and EF1, the two-agent XOS instance without a
//! double-MMS allocation, and the subadditive set-cover instance.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::budget::Budget;
use crate::bundle::{Allocation, Bundle};
use crate::equilibrium::{audit_equilibria, report_space_size, verify_pne_with, PneCertificate};
use crate::error::{Error, Result};
use crate::fairness::{audit, mms_value, FairnessNotion, FairnessReport};
use crate::instance::{Expr, Instance, ReportProfile, SignalProfile, SignalSpace, Valuation};
use crate::lp::PriceVector;
use crate::mechanisms::{Mechanism, MechanismRunner};
use crate::rational::{frac, int, Rational};
use crate::setcover::SetCover;
use crate::valuation::{AgentValuation, SetFunction, ValueTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ImpossibilityVariant {
    Mms,
    Ef1,
}

impl ImpossibilityVariant {
    pub fn notion(self) -> FairnessNotion {
        match self {
            ImpossibilityVariant::Mms => FairnessNotion::MMS,
            ImpossibilityVariant::Ef1 => FairnessNotion::EF1,
        }
    }

    /// `n^2` goods for MMS, `2n` for EF1.
    pub fn num_items(self, n: usize) -> usize {
        match self {
            ImpossibilityVariant::Mms => n * n,
            ImpossibilityVariant::Ef1 => 2 * n,
        }
    }
}

impl fmt::Display for ImpossibilityVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ImpossibilityVariant::Mms => "mms",
            ImpossibilityVariant::Ef1 => "ef1",
        })
    }
}

impl FromStr for ImpossibilityVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mms" => Ok(ImpossibilityVariant::Mms),
            "ef1" => Ok(ImpossibilityVariant::Ef1),
            other => Err(Error::input(format!("unknown impossibility variant {other:?}"))),
        }
    }
}

/// `n` agents with equal entitlements who all value item `j` at agent 0's
/// signal coordinate `j`. Agent 0's signals are all of `{0,1}^m`; the other
/// agents have a single signal.
pub fn impossibility_instance(n: usize, variant: ImpossibilityVariant) -> Result<Instance> {
    if n < 2 {
        return Err(Error::domain(format!("the impossibility family needs n >= 2, got {n}")));
    }
    let m = variant.num_items(n);
    if m >= 20 {
        return Err(Error::domain(format!("{m} goods make the signal space too large")));
    }
    let items: Vec<Expr> = (0..m).map(|j| Expr::sig(0, j)).collect();
    let mut spaces = vec![SignalSpace::binary(m)];
    spaces.extend((1..n).map(|_| SignalSpace::singleton()));
    Instance::new(
        m,
        vec![frac(1, n as i64); n],
        spaces,
        (0..n).map(|_| Valuation::Additive { items: items.clone() }).collect(),
    )
}

/// Position of the 0/1 vector with ones exactly on `ones` in the binary
/// space over `m` items.
pub fn binary_signal(ones: Bundle, m: usize) -> usize {
    ones.items().fold(0, |acc, j| acc | 1 << (m - 1 - j))
}

/// Agent 0 values only what it received under `fair_allocation`.
pub fn adversarial_signal(fair_allocation: &Allocation, instance: &Instance) -> Result<SignalProfile> {
    let m = instance.num_items();
    if instance.space(0).len() != 1 << m {
        return Err(Error::input("instance does not come from the impossibility family"));
    }
    let mut s = vec![0; instance.num_agents()];
    s[0] = binary_signal(fair_allocation.bundle(0), m);
    Ok(SignalProfile(s))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImpossibilityAudit {
    pub mechanism: String,
    pub variant: ImpossibilityVariant,
    pub n: usize,
    pub m: usize,
    pub reproduced: bool,
    /// The first step of the chain that did not go through.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_step: Option<String>,
    pub start_signals: SignalProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reports: Option<ReportProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allocation: Option<Allocation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fair_report: Option<FairnessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adversarial_signals: Option<SignalProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adversarial_pne: Option<PneCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unfair_report: Option<FairnessReport>,
}

/// Runs the impossibility chain from the all-ones signal.
pub fn impossibility_audit(
    mechanism: &Mechanism,
    n: usize,
    variant: ImpossibilityVariant,
    budget: &Budget,
) -> Result<ImpossibilityAudit> {
    let instance = impossibility_instance(n, variant)?;
    let runner = MechanismRunner::new(mechanism, &instance, budget)?;
    let mut start = vec![0; n];
    start[0] = (1 << instance.num_items()) - 1;
    impossibility_chain(&runner, variant, &SignalProfile(start))
}

/// The chain starting from `start`: find an equilibrium whose allocation is
/// fair at `start`, move agent 0's signal to the indicator of its own
/// bundle, and check that the same reports stay an equilibrium whose
/// allocation is no longer fair.
///
/// The truthful-guess profile is tried first; other equilibria are searched
/// only when the full report space fits the budget.
pub fn impossibility_chain(
    runner: &MechanismRunner<'_>,
    variant: ImpossibilityVariant,
    start: &SignalProfile,
) -> Result<ImpossibilityAudit> {
    let instance = runner.instance();
    let mechanism = runner.mechanism();
    let budget = runner.budget();
    let n = instance.num_agents();
    let notion = [variant.notion()];
    let mut result = ImpossibilityAudit {
        mechanism: mechanism.name(),
        variant,
        n,
        m: instance.num_items(),
        reproduced: false,
        failed_step: None,
        start_signals: start.clone(),
        reports: None,
        allocation: None,
        fair_report: None,
        adversarial_signals: None,
        adversarial_pne: None,
        unfair_report: None,
    };
    let at = |s: &SignalProfile| vec![s.clone(); n];

    let mut candidate = None;
    let truthful = mechanism.truthful_guess(instance, start)?;
    if verify_pne_with(runner, start, &truthful)?.is_pne {
        let allocation = runner.allocation(&truthful)?;
        let report = audit(&allocation, &at(start), &notion, instance, budget)?;
        if report.all_hold() {
            candidate = Some((truthful, allocation, report));
        }
    }
    if candidate.is_none() {
        let space = (0..n)
            .map(|i| report_space_size(mechanism, instance, i))
            .try_fold(1u128, |acc, s| acc.checked_mul(s))
            .unwrap_or(u128::MAX);
        if space <= budget.max_reports as u128 {
            let found = audit_equilibria(mechanism, instance, start, &notion, budget)?;
            candidate = found
                .fair_witness()
                .map(|e| (e.reports.clone(), e.allocation.clone(), e.fairness.clone()));
        }
    }
    let Some((reports, allocation, fair_report)) = candidate else {
        result.failed_step = Some(format!("no {} equilibrium found at the starting signals", variant.notion()));
        return Ok(result);
    };

    let adversarial = adversarial_signal(&allocation, instance)?;
    result.reports = Some(reports.clone());
    result.allocation = Some(allocation.clone());
    result.fair_report = Some(fair_report);
    result.adversarial_signals = Some(adversarial.clone());

    let certificate = verify_pne_with(runner, &adversarial, &reports)?;
    let still_pne = certificate.is_pne;
    result.adversarial_pne = Some(certificate);
    if !still_pne {
        result.failed_step = Some("the reports are not an equilibrium at the adversarial signals".into());
        return Ok(result);
    }

    let unfair = audit(&allocation, &at(&adversarial), &notion, instance, budget)?;
    let own = allocation.bundle(0);
    for (i, agent) in unfair.agents.iter().enumerate().skip(1) {
        if allocation.bundle(i).is_disjoint(own) && !agent.value.is_zero() {
            return Err(Error::invariant(format!(
                "agent {i} shares no good with agent 0 but has value {} at the adversarial signals",
                agent.value
            )));
        }
    }
    let violated = unfair.holds_for_all(variant.notion()) == Some(false);
    result.unfair_report = Some(unfair);
    if violated {
        result.reproduced = true;
    } else {
        result.failed_step = Some(format!(
            "the allocation is still {} at the adversarial signals",
            variant.notion()
        ));
    }
    Ok(result)
}

/// Item names `a, b, c, d` are items `0..4`.
fn pair_clause_max(first: (usize, usize), second: (usize, usize)) -> AgentValuation {
    let score = |t: Bundle, (x, y): (usize, usize)| -> i64 {
        let any = t.contains(x) || t.contains(y);
        let both = t.contains(x) && t.contains(y);
        any as i64 + both as i64
    };
    AgentValuation::from_fn(4, move |t| int(score(t, first).max(score(t, second))))
}

/// The two XOS valuations over four goods that admit no allocation giving
/// both agents their maximin share.
pub fn xos_gap_valuations() -> (AgentValuation, AgentValuation) {
    (pair_clause_max((0, 1), (2, 3)), pair_clause_max((0, 3), (1, 2)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct XosGapReport {
    pub holds: bool,
    #[serde(with = "crate::rational::serde_vec")]
    pub mms: Vec<Rational>,
    pub allocations_scanned: usize,
    /// Allocations giving both agents at least their maximin share.
    pub double_mms: Vec<Allocation>,
}

/// Scans all two-agent allocations for one that meets both maximin shares.
pub fn double_mms_scan(
    first: &impl SetFunction,
    second: &impl SetFunction,
    budget: &Budget,
) -> Result<XosGapReport> {
    let m = first.num_items();
    if second.num_items() != m {
        return Err(Error::input("valuations disagree on the number of items"));
    }
    let (t1, t2) = (ValueTable::build(first, budget)?, ValueTable::build(second, budget)?);
    let mms = vec![mms_value(&t1, 2, budget)?, mms_value(&t2, 2, budget)?];
    let mut double_mms = Vec::new();
    let mut scanned = 0;
    for t in Bundle::all(m) {
        scanned += 1;
        let rest = t.complement(m);
        if *t1.get(t) >= mms[0] && *t2.get(rest) >= mms[1] {
            double_mms.push(Allocation::new(vec![t, rest], m)?);
        }
    }
    Ok(XosGapReport {
        holds: double_mms.is_empty(),
        mms,
        allocations_scanned: scanned,
        double_mms,
    })
}

/// True when the fixed XOS pair has maximin share 2 for both agents and no
/// allocation gives both agents 2.
pub fn xos_mms_gap_check() -> Result<XosGapReport> {
    let (v1, v2) = xos_gap_valuations();
    let mut report = double_mms_scan(&v1, &v2, &Budget::default())?;
    report.holds = report.holds && report.mms.iter().all(|x| *x == int(2));
    Ok(report)
}

pub fn set_cover_value(k: usize, bundle: Bundle) -> Result<Rational> {
    let sc = SetCover::new(k)?;
    if !bundle.is_subset(Bundle::full(sc.num_items())) {
        return Err(Error::input(format!("bundle {bundle} is not within {} items", sc.num_items())));
    }
    Ok(int(sc.value(bundle) as i64))
}

/// An affordable bundle of the set-cover instance: all of `M \ B_u` except
/// one item.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApsWitness {
    pub u: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub outside_price: Rational,
    pub dropped_item: usize,
    pub bundle: Bundle,
    #[serde(with = "crate::rational::serde_str")]
    pub price: Rational,
    pub value: usize,
}

/// Picks the cheapest `M \ B_u` (smallest `u` on ties) and drops its most
/// expensive item (smallest index on ties). Every price vector has such a
/// `u` with `p(M \ B_u) <= (m+1)/(2m)` by averaging, after which the rest
/// costs at most 1/2.
pub fn aps_witness(sc: &SetCover, prices: &PriceVector) -> ApsWitness {
    let m = sc.num_items();
    let (u, outside) = (1..=m)
        .map(|u| (u, sc.cover_set(u).complement(m)))
        .min_by(|a, b| prices.price(a.1).cmp(&prices.price(b.1)).then(a.0.cmp(&b.0)))
        .expect("at least one cover set");
    let dropped_item = outside
        .items()
        .max_by(|&a, &b| prices.0[a].cmp(&prices.0[b]).then(b.cmp(&a)))
        .expect("outside sets are nonempty");
    let bundle = outside.without(dropped_item);
    ApsWitness {
        u,
        outside_price: prices.price(outside),
        dropped_item,
        price: prices.price(bundle),
        value: sc.value(bundle),
        bundle,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplementFailure {
    pub bundle: Bundle,
    pub value: usize,
    pub complement_value: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessFailure {
    pub prices: PriceVector,
    pub witness: ApsWitness,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubadditiveApsReport {
    pub k: usize,
    pub m: usize,
    pub seed: u64,
    pub bundles_checked: usize,
    pub complement_failures: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub complement_examples: Vec<ComplementFailure>,
    /// Bundles where both small-cover cases of the definition applied.
    pub overlapping_cases: usize,
    pub prices_checked: usize,
    pub averaging_failures: usize,
    pub witness_failures: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness_examples: Vec<WitnessFailure>,
    /// `k < k/2 + (k - 2)`.
    pub separation: bool,
    pub passed: bool,
}

const EXAMPLES_KEPT: usize = 5;

/// A random point of the price simplex on a rational grid: integer weights
/// in `0..=grid`, normalized.
pub fn sample_prices(rng: &mut impl Rng, m: usize, grid: u32) -> PriceVector {
    loop {
        let weights: Vec<u32> = (0..m).map(|_| rng.gen_range(0..=grid)).collect();
        let total: u64 = weights.iter().map(|&w| w as u64).sum();
        if total > 0 {
            return PriceVector(
                weights
                    .iter()
                    .map(|&w| Rational::new(w.into(), total.into()))
                    .collect(),
            );
        }
    }
}

/// Checks the facts the set-cover incompatibility argument rests on: the
/// complement identity `v(T) + v(M \ T) = k` on random and canonical
/// bundles, the averaging identity and an affordable bundle of value
/// `k - 2` for random prices, and the separation `k < k/2 + (k - 2)`.
pub fn subadditive_incompatibility_check(
    k: usize,
    random_bundles: usize,
    random_prices: usize,
    seed: u64,
) -> Result<SubadditiveApsReport> {
    let sc = Arc::new(SetCover::new(k)?);
    let m = sc.num_items();
    let full = Bundle::full(m);
    let mut rng = StdRng::seed_from_u64(seed);

    let mut bundles: Vec<Bundle> = vec![Bundle::EMPTY, full];
    bundles.extend(sc.cover_sets().iter().copied());
    bundles.extend((0..random_bundles).map(|_| Bundle::from_bits(rng.gen::<u64>()).intersection(full)));
    let mut complement_failures = 0;
    let mut complement_examples = Vec::new();
    let mut overlapping_cases = 0;
    for &t in &bundles {
        let (a, b) = (sc.evaluate(t), sc.evaluate(t.complement(m)));
        overlapping_cases += a.conflict as usize;
        if a.value + b.value != k {
            complement_failures += 1;
            if complement_examples.len() < EXAMPLES_KEPT {
                complement_examples.push(ComplementFailure {
                    bundle: t,
                    value: a.value,
                    complement_value: b.value,
                });
            }
        }
    }

    let half_plus = frac((m + 1) as i64, 2 * m as i64);
    let outside_total = frac((m + 1) as i64, 2);
    let half = frac(1, 2);
    let mut averaging_failures = 0;
    let mut witness_failures = 0;
    let mut witness_examples = Vec::new();
    for _ in 0..random_prices {
        let prices = sample_prices(&mut rng, m, 1000);
        if outside_price_total(&sc, &prices) != outside_total {
            averaging_failures += 1;
        }
        let witness = aps_witness(&sc, &prices);
        let reason = if witness.outside_price > half_plus {
            Some(format!("cheapest outside set costs {}", witness.outside_price))
        } else if witness.price > half {
            Some(format!("witness costs {} > 1/2", witness.price))
        } else if witness.value != k - 2 {
            Some(format!("witness has value {} instead of {}", witness.value, k - 2))
        } else {
            None
        };
        if let Some(reason) = reason {
            witness_failures += 1;
            if witness_examples.len() < EXAMPLES_KEPT {
                witness_examples.push(WitnessFailure { prices, witness, reason });
            }
        }
    }

    let separation = k < k / 2 + (k - 2);
    Ok(SubadditiveApsReport {
        k,
        m,
        seed,
        bundles_checked: bundles.len(),
        complement_failures,
        complement_examples,
        overlapping_cases,
        prices_checked: random_prices,
        averaging_failures,
        witness_failures,
        witness_examples,
        separation,
        passed: complement_failures == 0 && averaging_failures == 0 && witness_failures == 0 && separation,
    })
}

/// Sum over all cover sets of the price of their complements.
pub fn outside_price_total(sc: &SetCover, prices: &PriceVector) -> Rational {
    let m = sc.num_items();
    sc.cover_sets()
        .iter()
        .map(|b| prices.price(b.complement(m)))
        .fold(Rational::zero(), |acc, p| acc + p)
}

/// Uniform prices: every item costs `1/m`.
pub fn uniform_prices(m: usize) -> PriceVector {
    PriceVector(vec![Rational::one() / int(m as i64); m])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::enumerate_pne;
    use crate::mechanisms::{AllocationAlgorithm, BruteForceFair, RoundRobin};
    use crate::rational::one;

    #[test]
    fn impossibility_instances_have_expected_shape() {
        let inst = impossibility_instance(2, ImpossibilityVariant::Mms).unwrap();
        assert_eq!(inst.num_items(), 4);
        assert_eq!(inst.space(0).len(), 16);
        assert_eq!(inst.space(1).len(), 1);
        let ones = SignalProfile(vec![15, 0]);
        for agent in 0..2 {
            let v = inst.valuation_at(agent, &ones).unwrap();
            assert_eq!(mms_value(&v, 2, &Budget::default()).unwrap(), int(2));
        }
        let ef1 = impossibility_instance(3, ImpossibilityVariant::Ef1).unwrap();
        assert_eq!(ef1.num_items(), 6);
        assert!(impossibility_instance(1, ImpossibilityVariant::Mms).is_err());
    }

    #[test]
    fn all_ones_ef1_allocations_give_two_goods_each() {
        let inst = impossibility_instance(3, ImpossibilityVariant::Ef1).unwrap();
        let ones = SignalProfile(vec![63, 0, 0]);
        let profiles = vec![ones; 3];
        let mut owners = [0usize; 6];
        for code in 0..729 {
            let mut c = code;
            for o in owners.iter_mut() {
                *o = c % 3;
                c /= 3;
            }
            let a = Allocation::from_owners(&owners, 3);
            let report = audit(&a, &profiles, &[FairnessNotion::EF1], &inst, &Budget::default()).unwrap();
            let balanced = a.bundles().iter().all(|b| b.len() == 2);
            assert_eq!(report.all_hold(), balanced);
        }
    }

    #[test]
    fn zero_signal_makes_everything_fair() {
        let inst = impossibility_instance(2, ImpossibilityVariant::Mms).unwrap();
        let zero = SignalProfile(vec![0, 0]);
        let a = Allocation::all_to(0, 2, 4);
        let report = audit(&a, &[zero.clone(), zero], &[FairnessNotion::MMS, FairnessNotion::EF1], &inst, &Budget::default())
            .unwrap();
        assert!(report.all_hold());
    }

    #[test]
    fn adversarial_signal_is_the_indicator_of_agent_zeros_bundle() {
        let inst = impossibility_instance(2, ImpossibilityVariant::Mms).unwrap();
        let cases = [
            (Bundle::from_items([0, 1]), vec![one(), one(), int(0), int(0)]),
            (Bundle::full(4), vec![one(); 4]),
            (Bundle::EMPTY, vec![int(0); 4]),
        ];
        for (own, expected) in cases {
            let a = Allocation::new(vec![own, own.complement(4)], 4).unwrap();
            let s = adversarial_signal(&a, &inst).unwrap();
            assert_eq!(inst.space(0).signal(s.get(0)).coords, expected);
        }
    }

    #[test]
    fn brute_force_mms_chain_reproduces_for_three_agents() {
        let mech = Mechanism::blackbox(BruteForceFair::new(FairnessNotion::MMS));
        // the black-box mechanism needs three agents
        assert!(impossibility_audit(&mech, 2, ImpossibilityVariant::Mms, &Budget::default()).is_err());
        let out = impossibility_audit(&mech, 3, ImpossibilityVariant::Mms, &Budget::default()).unwrap();
        assert!(out.reproduced, "{:?}", out.failed_step);
        let unfair = out.unfair_report.unwrap();
        for agent in 1..3 {
            assert_eq!(unfair.agents[agent].value, int(0));
            assert_eq!(unfair.verdict(agent, FairnessNotion::MMS).unwrap().share, Some(int(1)));
        }
    }

    #[test]
    fn round_robin_chain_reproduces_for_ef1() {
        let mech = Mechanism::blackbox(RoundRobin);
        let out = impossibility_audit(&mech, 3, ImpossibilityVariant::Ef1, &Budget::default()).unwrap();
        assert!(out.reproduced, "{:?}", out.failed_step);
        assert!(out.allocation.unwrap().bundles().iter().all(|b| b.len() == 2));
    }

    /// Gives everything to the last agent, so agent 0 never holds anything.
    #[derive(Debug)]
    struct LastTakesAll;

    impl AllocationAlgorithm for LastTakesAll {
        fn name(&self) -> String {
            "last-takes-all".into()
        }

        fn allocate(&self, v: &[AgentValuation], _: &[Rational], _: &Budget) -> Result<Allocation> {
            Ok(Allocation::all_to(v.len() - 1, v.len(), v[0].num_items()))
        }
    }

    #[test]
    fn chain_from_zero_signal_is_not_reproduced() {
        let inst = impossibility_instance(3, ImpossibilityVariant::Ef1).unwrap();
        let mech = Mechanism::blackbox(LastTakesAll);
        let runner = MechanismRunner::new(&mech, &inst, &Budget::default()).unwrap();
        let out = impossibility_chain(&runner, ImpossibilityVariant::Ef1, &SignalProfile(vec![0, 0, 0])).unwrap();
        assert!(!out.reproduced);
        assert_eq!(out.adversarial_signals, Some(SignalProfile(vec![0, 0, 0])));
        assert!(out.failed_step.unwrap().contains("still"));
    }

    #[test]
    fn restricted_ef1_instance_has_an_unfair_equilibrium() {
        let mech = Mechanism::blackbox(BruteForceFair::new(FairnessNotion::EF1));
        let full = impossibility_instance(3, ImpossibilityVariant::Ef1).unwrap();
        let out = impossibility_audit(&mech, 3, ImpossibilityVariant::Ef1, &Budget::default()).unwrap();
        assert!(out.reproduced);
        let adversarial = out.adversarial_signals.unwrap().get(0);
        let inst = full.restrict_space(0, &[63, adversarial]).unwrap();
        let at = SignalProfile(vec![1, 0, 0]);
        let audit = audit_equilibria(&mech, &inst, &at, &[FairnessNotion::EF1], &Budget::default()).unwrap();
        assert!(!audit.all_pne_fair);
        assert!(audit.unfair_witness().is_some());
        assert_eq!(
            enumerate_pne(&mech, &inst, &at, &Budget::default()).unwrap().len(),
            audit.equilibria.len()
        );
    }

    #[test]
    fn xos_gap_holds_and_disappears_for_identical_valuations() {
        let report = xos_mms_gap_check().unwrap();
        assert!(report.holds);
        assert_eq!(report.mms, vec![int(2), int(2)]);
        assert_eq!(report.allocations_scanned, 16);
        let (v1, _) = xos_gap_valuations();
        let same = double_mms_scan(&v1, &v1, &Budget::default()).unwrap();
        assert!(!same.holds);
        assert!(same.double_mms.contains(&Allocation::new(vec![Bundle::from_items([0, 1]), Bundle::from_items([2, 3])], 4).unwrap()));
    }

    #[test]
    fn set_cover_values() {
        assert_eq!(set_cover_value(6, Bundle::full(63)).unwrap(), int(6));
        assert_eq!(set_cover_value(6, Bundle::singleton(40)).unwrap(), int(1));
        assert_eq!(set_cover_value(6, Bundle::EMPTY).unwrap(), int(0));
        assert!(matches!(set_cover_value(5, Bundle::EMPTY), Err(Error::Domain(_))));
    }

    #[test]
    fn uniform_prices_meet_the_averaging_bound_exactly() {
        let sc = SetCover::new(6).unwrap();
        let p = uniform_prices(63);
        assert_eq!(outside_price_total(&sc, &p), int(32));
        let w = aps_witness(&sc, &p);
        assert_eq!(w.outside_price, frac(64, 126));
        assert!(w.price <= frac(1, 2));
    }

    #[test]
    fn cover_set_and_complement_do_not_sum_to_k() {
        // B_u is covered by one set and its complement by two, so both
        // small-cover cases apply and the values add up to 3, not 6
        let sc = SetCover::new(6).unwrap();
        let b = sc.cover_set(9);
        assert_eq!(sc.value(b), 1);
        assert_eq!(sc.value(b.complement(63)), 2);
        let report = subadditive_incompatibility_check(6, 50, 5, 7).unwrap();
        assert!(report.separation);
        assert_eq!(report.averaging_failures, 0);
        assert!(report.complement_failures >= 63);
        assert!(!report.passed);
    }
}
