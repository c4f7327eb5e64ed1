//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use idvfair::axioms::{verify_valuation_axioms, AxiomClaim};
use idvfair::counterexamples::{
    impossibility_audit, impossibility_instance, subadditive_incompatibility_check, xos_mms_gap_check,
    ImpossibilityVariant,
};
use idvfair::equilibrium::{enumerate_pne, verify_pne_with};
use idvfair::fairness::{aps_value, best_affordable, mms_value, prop_value, audit, FairnessReport};
use idvfair::lp::PriceVector;
use idvfair::mechanisms::{MechanismRunner, RoundRobin};
use idvfair::rational::{frac, int};
use idvfair::FairnessNotion::{self, APS, EF, EF1, EFX, MMS, PROP};
use idvfair::{Allocation, Budget, Instance, Mechanism, Rational, Report, ReportProfile, SignalProfile};
use rand::Rng;

type Verdict = Result<String, String>;

/// An audited allocation, kept for the implication checks.
struct Audited {
    source: &'static str,
    report: FairnessReport,
    entitlements: Vec<Rational>,
    subadditive: bool,
}

#[derive(Default)]
struct Collected {
    audits: Vec<Audited>,
}

impl Collected {
    fn push(&mut self, source: &'static str, instance: &Instance, report: FairnessReport, budget: &Budget) -> Result<(), String> {
        let check = |claim| verify_valuation_axioms(instance, claim, budget).map_err(|e| e.to_string());
        // Additive implies subadditive at a fraction of the pair scan.
        let subadditive = check(AxiomClaim::Additive)?.holds || check(AxiomClaim::Subadditive)?.holds;
        self.audits.push(Audited {
            source,
            report,
            entitlements: instance.entitlements().to_vec(),
            subadditive,
        });
        Ok(())
    }
}

fn audit_at(
    allocation: &Allocation,
    truth: &SignalProfile,
    notions: &[FairnessNotion],
    instance: &Instance,
    budget: &Budget,
) -> Result<FairnessReport, String> {
    audit(allocation, &vec![truth.clone(); instance.num_agents()], notions, instance, budget).map_err(|e| e.to_string())
}

fn holds(report: &FairnessReport, agent: usize, notion: FairnessNotion) -> bool {
    report.holds(agent, notion) == Some(true)
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let elapsed = start.elapsed();
    if elapsed > limit {
        Err(format!("took {elapsed:.1?}, limit {limit:?}"))
    } else {
        Ok(())
    }
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

fn cut_and_choose_suite(collected: &mut Collected) -> Verdict {
    let start = Instant::now();
    let budget = Budget::default();
    let mech = Mechanism::CutAndChoose;
    let instances = 120;
    for seed in 0..instances {
        let mut rng = common::rng(1000 + seed);
        let m = rng.gen_range(1..=5);
        let kind = if seed % 2 == 0 { common::Kind::Additive } else { common::Kind::Table };
        let inst = common::two_agents(&mut rng, m, 4, [kind, kind], common::equal(2));
        let truth = common::random_profile(&mut rng, &inst);
        let runner = MechanismRunner::new(&mech, &inst, &budget).map_err(|e| e.to_string())?;
        let reports = mech.truthful_guess(&inst, &truth).map_err(|e| e.to_string())?;
        let cert = verify_pne_with(&runner, &truth, &reports).map_err(|e| e.to_string())?;
        if !cert.is_pne {
            return Err(format!("seed {seed}: truthful guess not an equilibrium: {:?}", cert.deviation));
        }
        let alloc = runner.allocation(&reports).map_err(|e| e.to_string())?;
        let report = audit_at(&alloc, &truth, &FairnessNotion::ALL, &inst, &budget)?;
        if !(holds(&report, 0, MMS) && holds(&report, 0, EFX) && holds(&report, 1, EF)) {
            return Err(format!("seed {seed}: allocation {alloc} fails cutter MMS/EFX or chooser EF"));
        }
        collected.push("cut-and-choose", &inst, report, &budget)?;
    }
    within(Duration::from_secs(120), start)?;
    Ok(format!("{instances} instances"))
}

fn price_and_choose_suite(collected: &mut Collected) -> Verdict {
    let start = Instant::now();
    let budget = Budget::default();
    let mech = Mechanism::PriceAndChoose;
    let instances = 120;
    let chooser_kinds = [common::Kind::Additive, common::Kind::Xos, common::Kind::Table];
    for seed in 0..instances {
        let mut rng = common::rng(2000 + seed);
        let m = rng.gen_range(1..=5);
        let chooser = chooser_kinds[seed as usize % chooser_kinds.len()];
        let entitlements = common::unequal_pair(&mut rng);
        let inst = common::two_agents(&mut rng, m, 4, [common::Kind::Xos, chooser], entitlements);
        let truth = common::random_profile(&mut rng, &inst);
        let runner = MechanismRunner::new(&mech, &inst, &budget).map_err(|e| e.to_string())?;
        let reports = mech.truthful_guess(&inst, &truth).map_err(|e| e.to_string())?;
        let cert = verify_pne_with(&runner, &truth, &reports).map_err(|e| e.to_string())?;
        if !cert.is_pne {
            return Err(format!("seed {seed}: truthful guess not an equilibrium: {:?}", cert.deviation));
        }
        let alloc = runner.allocation(&reports).map_err(|e| e.to_string())?;
        let report = audit_at(&alloc, &truth, &[EF, EF1, EFX, PROP, APS], &inst, &budget)?;
        if !(holds(&report, 0, PROP) && holds(&report, 1, APS)) {
            return Err(format!("seed {seed}: allocation {alloc} fails pricer PROP or chooser APS"));
        }
        collected.push("price-and-choose", &inst, report, &budget)?;
    }
    within(Duration::from_secs(300), start)?;
    Ok(format!("{instances} instances"))
}

fn independent_equilibria_suite(collected: &mut Collected) -> Verdict {
    let budget = Budget::default();
    let mech = Mechanism::PriceAndChoose;
    let instances = 40;
    let mut total = 0;
    for seed in 0..instances {
        let mut rng = common::rng(3000 + seed);
        let m = rng.gen_range(1..=3);
        let entitlements = if seed % 2 == 0 { common::equal(2) } else { common::unequal_pair(&mut rng) };
        let inst = common::independent_additive(&mut rng, 2, m, 3, entitlements);
        let truth = common::random_profile(&mut rng, &inst);
        let found = enumerate_pne(&mech, &inst, &truth, &budget).map_err(|e| e.to_string())?;

        // Every report profile checked on its own must agree with the list.
        let runner = MechanismRunner::new(&mech, &inst, &budget).map_err(|e| e.to_string())?;
        let mut expected = BTreeSet::new();
        let first = all_reports(&mech, &inst, 0);
        let second = all_reports(&mech, &inst, 1);
        for (a, r0) in first.iter().enumerate() {
            for (b, r1) in second.iter().enumerate() {
                let reports = ReportProfile(vec![r0.clone(), r1.clone()]);
                if verify_pne_with(&runner, &truth, &reports).map_err(|e| e.to_string())?.is_pne {
                    expected.insert((a, b));
                }
            }
        }
        let listed: BTreeSet<(usize, usize)> = found
            .iter()
            .map(|e| {
                let a = first.iter().position(|r| *r == e.reports.0[0]).unwrap();
                let b = second.iter().position(|r| *r == e.reports.0[1]).unwrap();
                (a, b)
            })
            .collect();
        if listed != expected || listed.len() != found.len() {
            return Err(format!("seed {seed}: enumeration lists {listed:?}, pointwise check finds {expected:?}"));
        }
        if found.is_empty() {
            return Err(format!("seed {seed}: no equilibrium found"));
        }
        for eq in &found {
            let report = audit_at(&eq.allocation, &truth, &[EF, EF1, EFX, PROP, APS], &inst, &budget)?;
            if !(holds(&report, 0, APS) && holds(&report, 1, APS)) {
                return Err(format!("seed {seed}: equilibrium {} misses an APS", eq.allocation));
            }
            collected.push("independent equilibria", &inst, report, &budget)?;
        }
        total += found.len();
    }
    Ok(format!("{instances} instances, {total} equilibria"))
}

fn blackbox_suite(collected: &mut Collected) -> Verdict {
    let budget = Budget::default();
    let mech = Mechanism::blackbox(RoundRobin);
    let instances = 40;
    let mut deviations = 0;
    for seed in 0..instances {
        let mut rng = common::rng(4000 + seed);
        let m = rng.gen_range(1..=4);
        let inst = common::interdependent_additive(&mut rng, 3, m, 3);
        let truth = common::random_profile(&mut rng, &inst);
        let runner = MechanismRunner::new(&mech, &inst, &budget).map_err(|e| e.to_string())?;
        let reports = mech.truthful_guess(&inst, &truth).map_err(|e| e.to_string())?;
        let cert = verify_pne_with(&runner, &truth, &reports).map_err(|e| e.to_string())?;
        if !cert.is_pne {
            return Err(format!("seed {seed}: unanimous truthful guess not an equilibrium"));
        }
        let alloc = runner.allocation(&reports).map_err(|e| e.to_string())?;
        for agent in 0..3 {
            for dev in all_reports(&mech, &inst, agent) {
                deviations += 1;
                let moved = runner.allocation(&reports.with(agent, dev.clone())).map_err(|e| e.to_string())?;
                if moved != alloc {
                    return Err(format!("seed {seed}: agent {agent} moved the output with {dev:?}"));
                }
            }
        }
        let report = audit_at(&alloc, &truth, &FairnessNotion::ALL, &inst, &budget)?;
        if !(0..3).all(|i| holds(&report, i, EF1)) {
            return Err(format!("seed {seed}: allocation {alloc} is not EF1"));
        }
        collected.push("black-box", &inst, report, &budget)?;
    }
    Ok(format!("{instances} instances, {deviations} deviations"))
}

fn impossibility_suite(collected: &mut Collected) -> Verdict {
    let start = Instant::now();
    let budget = Budget::default();
    let cases = [
        ("blackbox-mms", ImpossibilityVariant::Mms),
        ("blackbox-rr", ImpossibilityVariant::Ef1),
    ];
    let mut details = Vec::new();
    for (name, variant) in cases {
        let mech: Mechanism = name.parse().map_err(|e: idvfair::Error| e.to_string())?;
        let result = impossibility_audit(&mech, 3, variant, &budget).map_err(|e| e.to_string())?;
        if !result.reproduced {
            return Err(format!("{name}: {}", result.failed_step.unwrap_or_default()));
        }
        let unfair = result.unfair_report.as_ref().ok_or("missing unfair audit")?;
        if variant == ImpossibilityVariant::Mms {
            for agent in 1..3 {
                let a = &unfair.agents[agent];
                let share = unfair.verdict(agent, MMS).and_then(|v| v.share.clone());
                if a.value != int(0) || share != Some(int(1)) {
                    return Err(format!("agent {agent}: value {} share {share:?}, expected 0 and 1", a.value));
                }
            }
        }
        let inst = impossibility_instance(3, variant).map_err(|e| e.to_string())?;
        let alloc = result.allocation.as_ref().ok_or("missing allocation")?;
        for truth in [Some(&result.start_signals), result.adversarial_signals.as_ref()].into_iter().flatten() {
            let report = audit_at(alloc, truth, &FairnessNotion::ALL, &inst, &budget)?;
            collected.push("impossibility", &inst, report, &budget)?;
        }
        details.push(format!("{variant} m={}", result.m));
    }
    within(Duration::from_secs(600), start)?;
    Ok(details.join(", "))
}

fn share_consistency_suite() -> Verdict {
    let budget = Budget::default();
    let instances = 200;
    let mut prices_checked = 0;
    for seed in 0..instances {
        let mut rng = common::rng(6000 + seed);
        let n = rng.gen_range(2..=3);
        let m = rng.gen_range(1..=4);
        let inst = common::interdependent_additive(&mut rng, n, m, 2);
        let profile = common::random_profile(&mut rng, &inst);
        for agent in 0..n {
            let v = inst.valuation_at(agent, &profile).map_err(|e| e.to_string())?;
            let alpha = inst.entitlement(agent);
            let prop = prop_value(&v, alpha);
            let aps = aps_value(&v, alpha, &budget).map_err(|e| e.to_string())?.value;
            let mms = mms_value(&v, n, &budget).map_err(|e| e.to_string())?;
            if aps > prop || mms > prop {
                return Err(format!("seed {seed} agent {agent}: PROP {prop}, APS {aps}, MMS {mms}"));
            }
            for _ in 0..100 {
                let weights: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=20)).collect();
                let total: i64 = weights.iter().sum();
                let prices = PriceVector(weights.iter().map(|&w| frac(w, total)).collect());
                let (affordable, _) = best_affordable(&v, &prices, alpha);
                prices_checked += 1;
                if aps > affordable {
                    return Err(format!("seed {seed} agent {agent}: APS {aps} above {affordable} at {prices:?}"));
                }
            }
        }
    }
    Ok(format!("{instances} instances, {prices_checked} price vectors"))
}

fn xos_gap_suite() -> Verdict {
    let start = Instant::now();
    let report = xos_mms_gap_check().map_err(|e| e.to_string())?;
    within(Duration::from_secs(1), start)?;
    if !report.holds || report.mms != vec![int(2), int(2)] || report.allocations_scanned != 16 {
        return Err(format!(
            "holds {}, shares {:?}, {} allocations",
            report.holds, report.mms, report.allocations_scanned
        ));
    }
    Ok("16 allocations, both maximin shares 2".into())
}

fn set_cover_suite() -> Verdict {
    let start = Instant::now();
    let report = subadditive_incompatibility_check(6, 10_000, 1_000, 7).map_err(|e| e.to_string())?;
    within(Duration::from_secs(180), start)?;
    let detail = format!(
        "complement failures {}/{}, averaging failures {}/{}, witness failures {}/{}, separation {}",
        report.complement_failures,
        report.bundles_checked,
        report.averaging_failures,
        report.prices_checked,
        report.witness_failures,
        report.prices_checked,
        report.separation
    );
    if report.passed {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lattice_suite(collected: &Collected) -> Verdict {
    let mut checked = 0;
    for (index, audited) in collected.audits.iter().enumerate() {
        let n = audited.report.agents.len();
        for agent in 0..n {
            let verdict = |notion| audited.report.holds(agent, notion);
            let mut implications = vec![(EF, EFX), (EFX, EF1)];
            // Envy-freeness bounds the own share at 1/n of the whole only for
            // entitlements at most 1/n.
            if audited.subadditive && audited.entitlements[agent] <= frac(1, n as i64) {
                implications.push((EF, PROP));
            }
            for (strong, weak) in implications {
                if let (Some(s), Some(w)) = (verdict(strong), verdict(weak)) {
                    checked += 1;
                    if s && !w {
                        return Err(format!(
                            "{} allocation #{index}, agent {agent}: {strong} holds but {weak} fails",
                            audited.source
                        ));
                    }
                }
            }
        }
    }
    if collected.audits.is_empty() {
        return Err("no audited allocations collected".into());
    }
    Ok(format!("{} allocations, {checked} implications", collected.audits.len()))
}

fn main() -> ExitCode {
    let mut collected = Collected::default();
    let mut failed = 0;
    let mut report = |id: u32, name: &str, run: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let verdict = run();
        let elapsed = start.elapsed();
        match verdict {
            Ok(detail) => println!("PASS  {id}. {name}: {detail} ({elapsed:.2?})"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {id}. {name}: {detail} ({elapsed:.2?})");
            }
        }
    };
    report(1, "cut-and-choose truthful equilibria", &mut || cut_and_choose_suite(&mut collected));
    report(2, "price-and-choose truthful equilibria", &mut || price_and_choose_suite(&mut collected));
    report(3, "independent-value equilibria meet APS", &mut || independent_equilibria_suite(&mut collected));
    report(4, "black-box round robin", &mut || blackbox_suite(&mut collected));
    report(5, "impossibility chains", &mut || impossibility_suite(&mut collected));
    report(6, "share oracle consistency", &mut share_consistency_suite);
    report(7, "XOS maximin gap", &mut xos_gap_suite);
    report(8, "set-cover PROP/APS incompatibility", &mut set_cover_suite);
    report(9, "fairness implications", &mut || lattice_suite(&collected));
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of 9 criteria failed");
        ExitCode::FAILURE
    }
}
