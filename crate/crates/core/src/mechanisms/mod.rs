//! The cut-and-choose, price-and-choose and black-box mechanisms as
//! deterministic maps from report profiles to allocations.
//!
//! Every "pick some set" step is resolved to the numerically smallest
//! bundle, so identical reports always give identical outcomes.

mod algorithms;

pub use algorithms::{AllocationAlgorithm, BruteForceFair, RoundRobin};

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::budget::Budget;
use crate::bundle::{Allocation, Bundle};
use crate::error::{Error, Result};
use crate::fairness::{best_affordable, mms_value, plaut_roughgarden_cut};
use crate::instance::{Bid, Instance, Report, ReportProfile, SignalProfile};
use crate::lp::{strict_unaffordability_margin, PriceVector};
use crate::rational::Rational;
use crate::valuation::ValueTable;

/// The black-box transform of an independent-value algorithm.
#[derive(Clone, Debug)]
pub struct BlackBox {
    pub algorithm: Arc<dyn AllocationAlgorithm>,
    /// Returned when no `n - 1` agents agree; `None` gives every item to
    /// agent 0.
    pub default: Option<Allocation>,
}

#[derive(Clone, Debug)]
pub enum Mechanism {
    CutAndChoose,
    PriceAndChoose,
    BlackBox(BlackBox),
}

impl Mechanism {
    pub fn blackbox(algorithm: impl AllocationAlgorithm + 'static) -> Self {
        Mechanism::BlackBox(BlackBox {
            algorithm: Arc::new(algorithm),
            default: None,
        })
    }

    pub fn name(&self) -> String {
        match self {
            Mechanism::CutAndChoose => "cut-and-choose".into(),
            Mechanism::PriceAndChoose => "price-and-choose".into(),
            Mechanism::BlackBox(bb) => format!("blackbox({})", bb.algorithm.name()),
        }
    }

    fn is_two_agent(&self) -> bool {
        !matches!(self, Mechanism::BlackBox(_))
    }

    /// Checks the agent count (and entitlements) the mechanism is defined for.
    pub fn check_instance(&self, instance: &Instance) -> Result<()> {
        let n = instance.num_agents();
        match self {
            Mechanism::CutAndChoose | Mechanism::PriceAndChoose if n != 2 => Err(Error::domain(format!(
                "{} needs exactly 2 agents, got {n}",
                self.name()
            ))),
            Mechanism::CutAndChoose if !instance.has_equal_entitlements() => {
                Err(Error::domain("cut-and-choose needs equal entitlements"))
            }
            Mechanism::BlackBox(_) if n < 3 => Err(Error::domain(format!(
                "the black-box mechanism needs at least 3 agents, got {n}"
            ))),
            Mechanism::BlackBox(BlackBox { default: Some(a), .. }) => {
                Allocation::new(a.bundles().to_vec(), instance.num_items())?;
                if a.num_agents() != n {
                    return Err(Error::input("default allocation has the wrong number of agents"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Size of the bid space of `agent`.
    pub fn bid_count(&self, instance: &Instance, agent: usize) -> usize {
        if self.is_two_agent() {
            instance.space(1 - agent).len()
        } else {
            instance.profile_count()
        }
    }

    /// The `index`-th bid in declared order (bid spaces are the same for every
    /// agent up to their size, see [`Mechanism::bid_count`]).
    pub fn bid_at(&self, instance: &Instance, index: usize) -> Bid {
        if self.is_two_agent() {
            Bid::Signal(index)
        } else {
            Bid::Profile(instance.profile_at(index))
        }
    }

    pub fn check_reports(&self, instance: &Instance, reports: &ReportProfile) -> Result<()> {
        let n = instance.num_agents();
        if reports.len() != n {
            return Err(Error::input(format!("{} reports for {n} agents", reports.len())));
        }
        for (i, r) in reports.0.iter().enumerate() {
            if r.signal >= instance.space(i).len() {
                return Err(Error::input(format!("agent {i} reports unknown signal {}", r.signal)));
            }
            match (&r.bid, self.is_two_agent()) {
                (Bid::Signal(g), true) => {
                    if *g >= instance.space(1 - i).len() {
                        return Err(Error::input(format!("agent {i} bids unknown signal {g}")));
                    }
                }
                (Bid::Profile(p), false) => instance
                    .check_profile(p)
                    .map_err(|e| Error::input(format!("bid of agent {i}: {e}")))?,
                (_, true) => {
                    return Err(Error::input(format!(
                        "agent {i} must bid a single signal of the other agent"
                    )))
                }
                (_, false) => {
                    return Err(Error::input(format!("agent {i} must bid a full signal profile")))
                }
            }
        }
        Ok(())
    }

    /// Everyone reports their own signal and bids the true signals of the
    /// others.
    pub fn truthful_guess(&self, instance: &Instance, true_signals: &SignalProfile) -> Result<ReportProfile> {
        instance.check_profile(true_signals)?;
        self.check_instance(instance)?;
        let s = &true_signals.0;
        Ok(ReportProfile(if self.is_two_agent() {
            vec![
                Report { signal: s[0], bid: Bid::Signal(s[1]) },
                Report { signal: s[1], bid: Bid::Signal(s[0]) },
            ]
        } else {
            s.iter()
                .map(|&si| Report {
                    signal: si,
                    bid: Bid::Profile(true_signals.clone()),
                })
                .collect()
        }))
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Parses `cut-and-choose`, `price-and-choose`, `blackbox-rr` and
/// `blackbox-<notion>` (brute-force search for that notion).
impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "cut-and-choose" => Ok(Mechanism::CutAndChoose),
            "price-and-choose" => Ok(Mechanism::PriceAndChoose),
            "blackbox-rr" | "blackbox-round-robin" => Ok(Mechanism::blackbox(RoundRobin)),
            other => match other.strip_prefix("blackbox-") {
                Some(notion) => Ok(Mechanism::blackbox(BruteForceFair::new(notion.parse()?))),
                None => Err(Error::input(format!(
                    "unknown mechanism {other:?}; expected cut-and-choose, price-and-choose, blackbox-rr or blackbox-<notion>"
                ))),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutBranch {
    /// The chooser-acceptable cut beat the cutter's maximin share.
    BestAcceptable,
    /// Fell back to the balanced cut.
    BalancedCut,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Consensus {
    /// Smallest agreeing agent, whose bid is used.
    pub agent: usize,
    pub agreeing: Vec<usize>,
    pub bid: SignalProfile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mechanism", rename_all = "snake_case")]
pub enum Trace {
    CutAndChoose {
        /// Number of cuts the chooser would accept, per the cutter's report.
        acceptable_cuts: usize,
        #[serde(with = "crate::rational::serde_str")]
        best_acceptable_value: Rational,
        #[serde(with = "crate::rational::serde_str")]
        cutter_mms: Rational,
        branch: CutBranch,
        cut: Bundle,
        chooser_took_cut: bool,
    },
    PriceAndChoose {
        /// Bundles tested for offer membership before one was accepted.
        candidates_examined: usize,
        offer: Bundle,
        prices: PriceVector,
        chooser_took_offer: bool,
    },
    BlackBox {
        algorithm: String,
        consensus: Option<Consensus>,
        used_default: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub allocation: Allocation,
    pub trace: Trace,
}

impl Outcome {
    pub fn prices(&self) -> Option<&PriceVector> {
        match &self.trace {
            Trace::PriceAndChoose { prices, .. } => Some(prices),
            _ => None,
        }
    }
}

struct CutStage {
    acceptable_cuts: usize,
    best_acceptable_value: Rational,
    cutter_mms: Rational,
    branch: CutBranch,
    cut: Bundle,
}

struct OfferStage {
    candidates_examined: usize,
    offer: Bundle,
    prices: PriceVector,
}

/// Runs one mechanism on one instance, caching the parts of the computation
/// that depend only on a sub-report: value tables by (agent, profile), the
/// cutter and pricer stages by `(r_1, b_1)`, and black-box algorithm output
/// by the consensus bid. Caching is invisible since mechanisms are pure.
pub struct MechanismRunner<'a> {
    mechanism: &'a Mechanism,
    instance: &'a Instance,
    budget: Budget,
    tables: RefCell<HashMap<(usize, SignalProfile), Rc<ValueTable>>>,
    cuts: RefCell<HashMap<SignalProfile, Rc<CutStage>>>,
    offers: RefCell<HashMap<SignalProfile, Rc<OfferStage>>>,
    algorithm_outputs: RefCell<HashMap<SignalProfile, Allocation>>,
}

impl<'a> MechanismRunner<'a> {
    pub fn new(mechanism: &'a Mechanism, instance: &'a Instance, budget: &Budget) -> Result<Self> {
        mechanism.check_instance(instance)?;
        if mechanism.is_two_agent() {
            budget.check_subsets(instance.num_items())?;
        }
        Ok(MechanismRunner {
            mechanism,
            instance,
            budget: budget.clone(),
            tables: RefCell::default(),
            cuts: RefCell::default(),
            offers: RefCell::default(),
            algorithm_outputs: RefCell::default(),
        })
    }

    pub fn mechanism(&self) -> &Mechanism {
        self.mechanism
    }

    pub fn instance(&self) -> &Instance {
        self.instance
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    /// `v_agent(profile, .)` tabulated over all bundles.
    pub fn table(&self, agent: usize, profile: &SignalProfile) -> Result<Rc<ValueTable>> {
        let key = (agent, profile.clone());
        if let Some(t) = self.tables.borrow().get(&key) {
            return Ok(t.clone());
        }
        let v = self.instance.valuation_at(agent, profile)?;
        let t = Rc::new(ValueTable::build(&v, &self.budget)?);
        self.tables.borrow_mut().insert(key, t.clone());
        Ok(t)
    }

    pub fn run(&self, reports: &ReportProfile) -> Result<Outcome> {
        self.mechanism.check_reports(self.instance, reports)?;
        match self.mechanism {
            Mechanism::CutAndChoose => self.cut_and_choose(reports),
            Mechanism::PriceAndChoose => self.price_and_choose(reports),
            Mechanism::BlackBox(bb) => self.blackbox(bb, reports),
        }
    }

    pub fn allocation(&self, reports: &ReportProfile) -> Result<Allocation> {
        Ok(self.run(reports)?.allocation)
    }

    /// Profiles the cutter/pricer and the chooser each act on: `(r_1, b_1)`
    /// and `(b_2, r_2)`.
    fn two_agent_profiles(reports: &ReportProfile) -> (SignalProfile, SignalProfile) {
        let guess = |i: usize| match reports.report(i).bid {
            Bid::Signal(g) => g,
            Bid::Profile(_) => unreachable!("checked by check_reports"),
        };
        (
            SignalProfile(vec![reports.report(0).signal, guess(0)]),
            SignalProfile(vec![guess(1), reports.report(1).signal]),
        )
    }

    fn cut_and_choose(&self, reports: &ReportProfile) -> Result<Outcome> {
        let (first, second) = Self::two_agent_profiles(reports);
        let stage = self.cut_stage(&first)?;
        let m = self.instance.num_items();
        let cut = stage.cut;
        let rest = cut.complement(m);
        let chooser = self.table(1, &second)?;
        let chooser_took_cut = chooser.get(rest) <= chooser.get(cut);
        let taken = if chooser_took_cut { cut } else { rest };
        Ok(Outcome {
            allocation: Allocation::new(vec![taken.complement(m), taken], m)?,
            trace: Trace::CutAndChoose {
                acceptable_cuts: stage.acceptable_cuts,
                best_acceptable_value: stage.best_acceptable_value.clone(),
                cutter_mms: stage.cutter_mms.clone(),
                branch: stage.branch,
                cut,
                chooser_took_cut,
            },
        })
    }

    fn cut_stage(&self, profile: &SignalProfile) -> Result<Rc<CutStage>> {
        if let Some(s) = self.cuts.borrow().get(profile) {
            return Ok(s.clone());
        }
        let m = self.instance.num_items();
        let cutter = self.table(0, profile)?;
        let chooser = self.table(1, profile)?;
        let mut acceptable_cuts = 0;
        let mut best: Option<(Rational, Bundle)> = None;
        for t in Bundle::all(m) {
            let rest = t.complement(m);
            if chooser.get(t) >= chooser.get(rest) {
                acceptable_cuts += 1;
                let kept = cutter.get(rest);
                if best.as_ref().is_none_or(|(v, _)| kept > v) {
                    best = Some((kept.clone(), t));
                }
            }
        }
        // T or M \ T always qualifies, so the family is never empty
        let (best_acceptable_value, best_cut) = best.expect("some cut is acceptable");
        let cutter_mms = mms_value(&*cutter, 2, &self.budget)?;
        let (branch, cut) = if best_acceptable_value > cutter_mms {
            (CutBranch::BestAcceptable, best_cut)
        } else {
            (CutBranch::BalancedCut, plaut_roughgarden_cut(&*cutter, &self.budget)?)
        };
        let stage = Rc::new(CutStage {
            acceptable_cuts,
            best_acceptable_value,
            cutter_mms,
            branch,
            cut,
        });
        self.cuts.borrow_mut().insert(profile.clone(), stage.clone());
        Ok(stage)
    }

    fn price_and_choose(&self, reports: &ReportProfile) -> Result<Outcome> {
        let (first, second) = Self::two_agent_profiles(reports);
        let stage = self.offer_stage(&first)?;
        let m = self.instance.num_items();
        let alpha = self.instance.entitlement(1);
        let chooser = self.table(1, &second)?;
        let (best, best_set) = best_affordable(&*chooser, &stage.prices, alpha);
        let chooser_took_offer = *chooser.get(stage.offer) == best;
        let taken = if chooser_took_offer { stage.offer } else { best_set };
        Ok(Outcome {
            allocation: Allocation::new(vec![taken.complement(m), taken], m)?,
            trace: Trace::PriceAndChoose {
                candidates_examined: stage.candidates_examined,
                offer: stage.offer,
                prices: stage.prices.clone(),
                chooser_took_offer,
            },
        })
    }

    /// Finds the offer: among bundles the chooser would pick under some
    /// price vector (per the pricer's report), the one leaving the pricer the
    /// most, smallest first on ties. Candidates are tested best-first, so
    /// the first member found is the answer.
    fn offer_stage(&self, profile: &SignalProfile) -> Result<Rc<OfferStage>> {
        if let Some(s) = self.offers.borrow().get(profile) {
            return Ok(s.clone());
        }
        let m = self.instance.num_items();
        let stage = if m == 0 {
            OfferStage {
                candidates_examined: 0,
                offer: Bundle::EMPTY,
                prices: PriceVector(Vec::new()),
            }
        } else {
            let pricer = self.table(0, profile)?;
            let chooser = self.table(1, profile)?;
            let alpha = self.instance.entitlement(1);
            let mut candidates: Vec<Bundle> = Bundle::all(m).collect();
            candidates.sort_by(|a, b| {
                pricer
                    .get(b.complement(m))
                    .cmp(pricer.get(a.complement(m)))
                    .then(a.cmp(b))
            });
            let mut found = None;
            for (examined, &t) in candidates.iter().enumerate() {
                let high: Vec<Bundle> = Bundle::all(m).filter(|&h| chooser.get(h) > chooser.get(t)).collect();
                let margin = strict_unaffordability_margin(m, &high, alpha, Some(t))?;
                if margin.is_strictly_positive() {
                    let prices = margin.prices().expect("positive margin has prices").clone();
                    found = Some(OfferStage {
                        candidates_examined: examined + 1,
                        offer: t,
                        prices,
                    });
                    break;
                }
            }
            found.ok_or_else(|| Error::invariant("no bundle is an affordable best choice under any prices"))?
        };
        let stage = Rc::new(stage);
        self.offers.borrow_mut().insert(profile.clone(), stage.clone());
        Ok(stage)
    }

    fn blackbox(&self, bb: &BlackBox, reports: &ReportProfile) -> Result<Outcome> {
        let n = self.instance.num_agents();
        let m = self.instance.num_items();
        let bids: Vec<&SignalProfile> = reports
            .0
            .iter()
            .map(|r| match &r.bid {
                Bid::Profile(p) => p,
                Bid::Signal(_) => unreachable!("checked by check_reports"),
            })
            .collect();
        let consistent: Vec<usize> = (0..n).filter(|&i| reports.report(i).signal == bids[i].get(i)).collect();
        // with n >= 3 at most one bid value can gather n - 1 agents
        let consensus = consistent.iter().find_map(|&c| {
            let agreeing: Vec<usize> = consistent.iter().copied().filter(|&i| bids[i] == bids[c]).collect();
            (agreeing.len() + 1 >= n).then(|| Consensus {
                agent: agreeing[0],
                agreeing,
                bid: bids[c].clone(),
            })
        });
        let allocation = match &consensus {
            Some(c) => self.algorithm_output(bb, &c.bid)?,
            None => bb.default.clone().unwrap_or_else(|| Allocation::all_to(0, n, m)),
        };
        Ok(Outcome {
            allocation,
            trace: Trace::BlackBox {
                algorithm: bb.algorithm.name(),
                used_default: consensus.is_none(),
                consensus,
            },
        })
    }

    fn algorithm_output(&self, bb: &BlackBox, bid: &SignalProfile) -> Result<Allocation> {
        if let Some(a) = self.algorithm_outputs.borrow().get(bid) {
            return Ok(a.clone());
        }
        let valuations = (0..self.instance.num_agents())
            .map(|i| self.instance.valuation_at(i, bid))
            .collect::<Result<Vec<_>>>()?;
        let a = bb
            .algorithm
            .allocate(&valuations, self.instance.entitlements(), &self.budget)?;
        if a.num_agents() != self.instance.num_agents() {
            return Err(Error::invariant(format!(
                "{} returned an allocation for {} agents",
                bb.algorithm.name(),
                a.num_agents()
            )));
        }
        Allocation::new(a.bundles().to_vec(), self.instance.num_items())
            .map_err(|e| Error::invariant(format!("{} returned an invalid allocation: {e}", bb.algorithm.name())))?;
        self.algorithm_outputs.borrow_mut().insert(bid.clone(), a.clone());
        Ok(a)
    }
}

pub fn cut_and_choose(instance: &Instance, reports: &ReportProfile, budget: &Budget) -> Result<Outcome> {
    MechanismRunner::new(&Mechanism::CutAndChoose, instance, budget)?.run(reports)
}

pub fn price_and_choose(instance: &Instance, reports: &ReportProfile, budget: &Budget) -> Result<Outcome> {
    MechanismRunner::new(&Mechanism::PriceAndChoose, instance, budget)?.run(reports)
}

pub fn blackbox_mechanism(
    instance: &Instance,
    algorithm: Arc<dyn AllocationAlgorithm>,
    default: Option<Allocation>,
    reports: &ReportProfile,
    budget: &Budget,
) -> Result<Outcome> {
    let mechanism = Mechanism::BlackBox(BlackBox { algorithm, default });
    MechanismRunner::new(&mechanism, instance, budget)?.run(reports)
}
