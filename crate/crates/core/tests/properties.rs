mod common;

use idvfair::equilibrium::verify_pne;
use idvfair::fairness::{aps_value, mms_value, prop_value};
use idvfair::instance::{perceived_profile, Expr, Valuation};
use idvfair::mechanisms::{MechanismRunner, RoundRobin};
use idvfair::rational::{frac, zero};
use idvfair::{Budget, Bundle, Instance, Mechanism, Report, ReportProfile, SignalProfile};
use proptest::prelude::*;
use rand::Rng;

fn scaled(instance: &Instance, factor: &idvfair::Rational) -> Instance {
    let valuations = instance
        .valuations()
        .iter()
        .map(|v| match v {
            Valuation::Additive { items } => Valuation::Additive {
                items: items.iter().map(|e| Expr::scale(factor.clone(), e.clone())).collect(),
            },
            other => other.clone(),
        })
        .collect();
    Instance::new(
        instance.num_items(),
        instance.entitlements().to_vec(),
        instance.spaces().to_vec(),
        valuations,
    )
    .unwrap()
}

fn all_reports(mechanism: &Mechanism, instance: &Instance, agent: usize) -> Vec<Report> {
    let bids = mechanism.bid_count(instance, agent);
    (0..instance.space(agent).len())
        .flat_map(|s| (0..bids).map(move |b| (s, b)))
        .map(|(s, b)| Report {
            signal: s,
            bid: mechanism.bid_at(instance, b),
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn empty_bundle_is_worth_nothing(seed in any::<u64>(), m in 1usize..5) {
        let mut rng = common::rng(seed);
        let kinds = [common::Kind::Xos, common::Kind::Table];
        let inst = common::two_agents(&mut rng, m, 3, kinds, common::equal(2));
        for profile in inst.profiles() {
            for agent in 0..2 {
                prop_assert_eq!(inst.value(agent, &profile, Bundle::EMPTY).unwrap(), zero());
            }
        }
    }

    #[test]
    fn scaling_item_expressions_scales_every_value(seed in any::<u64>(), m in 1usize..5, p in 1i64..7, q in 1i64..7) {
        let mut rng = common::rng(seed);
        let inst = common::interdependent_additive(&mut rng, 2, m, 3);
        let c = frac(p, q);
        let big = scaled(&inst, &c);
        for profile in inst.profiles() {
            for b in Bundle::all(m) {
                for agent in 0..2 {
                    prop_assert_eq!(
                        big.value(agent, &profile, b).unwrap(),
                        &c * inst.value(agent, &profile, b).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn own_signal_valuations_ignore_other_signals(seed in any::<u64>(), n in 2usize..4, m in 1usize..4) {
        let mut rng = common::rng(seed);
        let inst = common::independent_additive(&mut rng, n, m, 3, common::equal(n));
        let base = common::random_profile(&mut rng, &inst);
        for agent in 0..n {
            for other in (0..n).filter(|&k| k != agent) {
                for s in 0..inst.space(other).len() {
                    let moved = base.with(other, s);
                    for b in Bundle::all(m) {
                        prop_assert_eq!(inst.value(agent, &moved, b).unwrap(), inst.value(agent, &base, b).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn perceived_profile_substitutes_own_signal(signals in proptest::collection::vec(0usize..4, 2..5), agent_pick in any::<usize>(), truth in 0usize..4) {
        let reports = ReportProfile(signals.iter().map(|&s| Report { signal: s, bid: idvfair::Bid::Signal(0) }).collect());
        let agent = agent_pick % signals.len();
        let perceived = perceived_profile(agent, truth, &reports);
        for (k, &s) in signals.iter().enumerate() {
            prop_assert_eq!(perceived.get(k), if k == agent { truth } else { s });
        }
        prop_assert_eq!(perceived_profile(agent, signals[agent], &reports), SignalProfile(signals.clone()));
    }

    #[test]
    fn mechanism_outputs_partition_the_goods(seed in any::<u64>(), m in 0usize..5) {
        let mut rng = common::rng(seed);
        let two = common::interdependent_additive(&mut rng, 2, m, 2);
        let three = common::interdependent_additive(&mut rng, 3, m, 2);
        let budget = Budget::default();
        let mechanisms = [
            (Mechanism::CutAndChoose, &two),
            (Mechanism::PriceAndChoose, &two),
            (Mechanism::blackbox(RoundRobin), &three),
        ];
        for (mech, inst) in mechanisms {
            let runner = MechanismRunner::new(&mech, inst, &budget).unwrap();
            let reports = ReportProfile(
                (0..inst.num_agents())
                    .map(|i| {
                        let options = all_reports(&mech, inst, i);
                        options[rng.gen_range(0..options.len())].clone()
                    })
                    .collect(),
            );
            let alloc = runner.allocation(&reports).unwrap();
            let mut seen = Bundle::EMPTY;
            for &b in alloc.bundles() {
                prop_assert!(seen.is_disjoint(b));
                seen = seen.union(b);
            }
            prop_assert_eq!(seen, Bundle::full(m));
        }
    }

    #[test]
    fn blackbox_output_survives_any_single_deviation(seed in any::<u64>(), m in 1usize..4) {
        let mut rng = common::rng(seed);
        let inst = common::interdependent_additive(&mut rng, 3, m, 2);
        let mech = Mechanism::blackbox(RoundRobin);
        let runner = MechanismRunner::new(&mech, &inst, &Budget::default()).unwrap();
        let truth = common::random_profile(&mut rng, &inst);
        let reports = mech.truthful_guess(&inst, &truth).unwrap();
        let expected = runner.allocation(&reports).unwrap();
        for agent in 0..3 {
            for dev in all_reports(&mech, &inst, agent) {
                prop_assert_eq!(&runner.allocation(&reports.with(agent, dev)).unwrap(), &expected);
            }
        }
    }

    #[test]
    fn truthful_guess_is_an_equilibrium_for_cut_and_choose(seed in any::<u64>(), m in 1usize..5) {
        let mut rng = common::rng(seed);
        let inst = common::interdependent_additive(&mut rng, 2, m, 3);
        let truth = common::random_profile(&mut rng, &inst);
        let reports = Mechanism::CutAndChoose.truthful_guess(&inst, &truth).unwrap();
        let cert = verify_pne(&Mechanism::CutAndChoose, &inst, &truth, &reports, &Budget::default()).unwrap();
        prop_assert!(cert.is_pne, "{:?}", cert.deviation);
    }

    #[test]
    fn shares_never_exceed_the_proportional_share(weights in proptest::collection::vec(0i64..6, 1..5), n in 2usize..4) {
        let v = idvfair::valuation::AgentValuation::additive(weights.iter().map(|&w| frac(w, 1)).collect());
        let alpha = frac(1, n as i64);
        let prop = prop_value(&v, &alpha);
        let budget = Budget::default();
        prop_assert!(mms_value(&v, n, &budget).unwrap() <= prop);
        prop_assert!(aps_value(&v, &alpha, &budget).unwrap().value <= prop);
    }
}
