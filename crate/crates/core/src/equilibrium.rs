//! Pure Nash equilibria of a mechanism under interdependent values.
//!
//! Agent `i` judges every outcome at its perceived profile: its own true
//! signal together with the signals the others reported. A unilateral
//! deviation replaces `i`'s report, which leaves that profile unchanged, so
//! both sides of each comparison are evaluated against the same valuation.

use std::collections::HashMap;

use serde::Serialize;

use crate::budget::Budget;
use crate::bundle::{Allocation, Bundle};
use crate::error::{Error, Result};
use crate::fairness::{audit, FairnessNotion, FairnessReport};
use crate::instance::{perceived_profile, Instance, Report, ReportProfile, SignalProfile};
use crate::mechanisms::{Mechanism, MechanismRunner};
use crate::rational::Rational;

/// A unilateral deviation that strictly improves the deviator's utility.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfitableDeviation {
    pub agent: usize,
    pub report: Report,
    /// Profile both values below were computed at.
    pub perceived: SignalProfile,
    pub current_bundle: Bundle,
    #[serde(with = "crate::rational::serde_str")]
    pub current_value: Rational,
    pub deviation_bundle: Bundle,
    #[serde(with = "crate::rational::serde_str")]
    pub deviation_value: Rational,
    /// `deviation_value - current_value`, always positive.
    #[serde(with = "crate::rational::serde_str")]
    pub gap: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PneCertificate {
    pub is_pne: bool,
    pub deviations_checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<ProfitableDeviation>,
}

/// Number of reports available to `agent` (own signal times bid).
pub fn report_space_size(mechanism: &Mechanism, instance: &Instance, agent: usize) -> u128 {
    instance.space(agent).len() as u128 * mechanism.bid_count(instance, agent) as u128
}

/// All reports of `agent`, signal-major.
fn reports_of<'a>(runner: &'a MechanismRunner<'_>, agent: usize) -> impl Iterator<Item = Report> + 'a {
    let (mech, inst) = (runner.mechanism(), runner.instance());
    let bids = mech.bid_count(inst, agent);
    (0..inst.space(agent).len())
        .flat_map(move |signal| (0..bids).map(move |b| Report { signal, bid: mech.bid_at(inst, b) }))
}

pub fn verify_pne(
    mechanism: &Mechanism,
    instance: &Instance,
    true_signals: &SignalProfile,
    reports: &ReportProfile,
    budget: &Budget,
) -> Result<PneCertificate> {
    let runner = MechanismRunner::new(mechanism, instance, budget)?;
    verify_pne_with(&runner, true_signals, reports)
}

/// [`verify_pne`] through an existing runner, reusing its caches.
pub fn verify_pne_with(
    runner: &MechanismRunner<'_>,
    true_signals: &SignalProfile,
    reports: &ReportProfile,
) -> Result<PneCertificate> {
    let instance = runner.instance();
    instance.check_profile(true_signals)?;
    runner.mechanism().check_reports(instance, reports)?;
    for agent in 0..instance.num_agents() {
        let size = report_space_size(runner.mechanism(), instance, agent);
        runner
            .budget()
            .check_reports(&format!("deviations of agent {agent}"), size)?;
    }
    let current = runner.allocation(reports)?;
    let mut checked = 0u64;
    for agent in 0..instance.num_agents() {
        let perceived = perceived_profile(agent, true_signals.get(agent), reports);
        let table = runner.table(agent, &perceived)?;
        let current_bundle = current.bundle(agent);
        let current_value = table.get(current_bundle);
        for report in reports_of(runner, agent) {
            if report == *reports.report(agent) {
                continue;
            }
            checked += 1;
            let deviated = runner.allocation(&reports.with(agent, report.clone()))?;
            let deviation_bundle = deviated.bundle(agent);
            let deviation_value = table.get(deviation_bundle);
            if deviation_value > current_value {
                return Ok(PneCertificate {
                    is_pne: false,
                    deviations_checked: checked,
                    deviation: Some(ProfitableDeviation {
                        agent,
                        report,
                        perceived,
                        current_bundle,
                        current_value: current_value.clone(),
                        deviation_bundle,
                        deviation_value: deviation_value.clone(),
                        gap: deviation_value - current_value,
                    }),
                });
            }
        }
    }
    Ok(PneCertificate {
        is_pne: true,
        deviations_checked: checked,
        deviation: None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Equilibrium {
    pub reports: ReportProfile,
    pub allocation: Allocation,
}

/// Every pure Nash equilibrium at `true_signals`, in lexicographic order of
/// the report profile (agent 0 most significant, each agent's reports
/// signal-major).
pub fn enumerate_pne(
    mechanism: &Mechanism,
    instance: &Instance,
    true_signals: &SignalProfile,
    budget: &Budget,
) -> Result<Vec<Equilibrium>> {
    let runner = MechanismRunner::new(mechanism, instance, budget)?;
    enumerate_pne_with(&runner, true_signals)
}

pub fn enumerate_pne_with(runner: &MechanismRunner<'_>, true_signals: &SignalProfile) -> Result<Vec<Equilibrium>> {
    let instance = runner.instance();
    instance.check_profile(true_signals)?;
    let n = instance.num_agents();
    let per_agent: Vec<Vec<Report>> = (0..n).map(|i| reports_of(runner, i).collect()).collect();
    let total = per_agent
        .iter()
        .try_fold(1u128, |acc, r| acc.checked_mul(r.len() as u128))
        .unwrap_or(u128::MAX);
    runner.budget().check_reports("report profiles", total)?;

    let mut outcomes: HashMap<ReportProfile, Allocation> = HashMap::new();
    let mut outcome = |profile: &ReportProfile| -> Result<Allocation> {
        if let Some(a) = outcomes.get(profile) {
            return Ok(a.clone());
        }
        let a = runner.allocation(profile)?;
        outcomes.insert(profile.clone(), a.clone());
        Ok(a)
    };

    let mut found = Vec::new();
    let mut digits = vec![0usize; n];
    loop {
        let profile = ReportProfile(digits.iter().enumerate().map(|(i, &d)| per_agent[i][d].clone()).collect());
        let allocation = outcome(&profile)?;
        let mut stable = true;
        'agents: for agent in 0..n {
            let perceived = perceived_profile(agent, true_signals.get(agent), &profile);
            let table = runner.table(agent, &perceived)?;
            let current = table.get(allocation.bundle(agent)).clone();
            for (d, report) in per_agent[agent].iter().enumerate() {
                if d == digits[agent] {
                    continue;
                }
                let deviated = outcome(&profile.with(agent, report.clone()))?;
                if *table.get(deviated.bundle(agent)) > current {
                    stable = false;
                    break 'agents;
                }
            }
        }
        if stable {
            found.push(Equilibrium { reports: profile, allocation });
        }
        // odometer, last agent least significant
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(found);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < per_agent[pos].len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditedEquilibrium {
    pub reports: ReportProfile,
    pub allocation: Allocation,
    pub fairness: FairnessReport,
    /// Every audited notion holds for every agent.
    pub fair: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquilibriumAudit {
    pub true_signals: SignalProfile,
    pub notions: Vec<FairnessNotion>,
    pub exists_fair_pne: bool,
    /// Vacuously true when there is no equilibrium.
    pub all_pne_fair: bool,
    pub equilibria: Vec<AuditedEquilibrium>,
}

impl EquilibriumAudit {
    pub fn fair_witness(&self) -> Option<&AuditedEquilibrium> {
        self.equilibria.iter().find(|e| e.fair)
    }

    pub fn unfair_witness(&self) -> Option<&AuditedEquilibrium> {
        self.equilibria.iter().find(|e| !e.fair)
    }
}

/// Enumerates all equilibria and audits each allocation with every agent
/// evaluated at the true signals.
pub fn audit_equilibria(
    mechanism: &Mechanism,
    instance: &Instance,
    true_signals: &SignalProfile,
    notions: &[FairnessNotion],
    budget: &Budget,
) -> Result<EquilibriumAudit> {
    if notions.is_empty() {
        return Err(Error::input("no fairness notions to audit"));
    }
    let equilibria = enumerate_pne(mechanism, instance, true_signals, budget)?;
    let profiles = vec![true_signals.clone(); instance.num_agents()];
    let audited = equilibria
        .into_iter()
        .map(|e| {
            let fairness = audit(&e.allocation, &profiles, notions, instance, budget)?;
            Ok(AuditedEquilibrium {
                fair: fairness.all_hold(),
                reports: e.reports,
                allocation: e.allocation,
                fairness,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquilibriumAudit {
        true_signals: true_signals.clone(),
        notions: notions.to_vec(),
        exists_fair_pne: audited.iter().any(|e| e.fair),
        all_pne_fair: audited.iter().all(|e| e.fair),
        equilibria: audited,
    })
}
