//! Instances with interdependent valuations.
//!
//! Each agent owns a finite signal space. A valuation is a public function of
//! the whole signal profile and a bundle; agents and signals are addressed by
//! zero-based index throughout.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bundle::{Bundle, MAX_ITEMS};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::setcover::SetCover;
use crate::valuation::{AgentValuation, SetFunction};

/// One element of a signal space: per-item coordinates, or none for a bare
/// token.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signal {
    pub coords: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Singleton,
    Vectors,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignalSpace {
    kind: SpaceKind,
    signals: Vec<Signal>,
}

impl SignalSpace {
    pub fn singleton() -> Self {
        SignalSpace {
            kind: SpaceKind::Singleton,
            signals: vec![Signal { coords: Vec::new() }],
        }
    }

    pub fn vectors(vectors: Vec<Vec<Rational>>) -> Self {
        SignalSpace {
            kind: SpaceKind::Vectors,
            signals: vectors.into_iter().map(|coords| Signal { coords }).collect(),
        }
    }

    /// All vectors of `{0,1}^m`, ordered lexicographically (item 0 most
    /// significant).
    pub fn binary(m: usize) -> Self {
        assert!(m < 32, "binary space over {m} items is too large");
        let vectors = (0..1usize << m)
            .map(|idx| {
                (0..m)
                    .map(|j| {
                        if idx >> (m - 1 - j) & 1 == 1 {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        SignalSpace::vectors(vectors)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn signal(&self, index: usize) -> &Signal {
        &self.signals[index]
    }

    pub fn signals(&self) -> &[Signal] {
        &self.signals
    }

    pub fn position(&self, signal: &Signal) -> Option<usize> {
        self.signals.iter().position(|s| s == signal)
    }
}

/// Per-item value expression over signal coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(Rational),
    /// Coordinate `coord` of agent `agent`'s signal.
    Sig { agent: usize, coord: usize },
    Add(Vec<Expr>),
    Scale(Rational, Box<Expr>),
    Min(Vec<Expr>),
    Max(Vec<Expr>),
}

impl Expr {
    pub fn constant(value: Rational) -> Self {
        Expr::Const(value)
    }

    pub fn sig(agent: usize, coord: usize) -> Self {
        Expr::Sig { agent, coord }
    }

    pub fn scale(factor: Rational, inner: Expr) -> Self {
        Expr::Scale(factor, Box::new(inner))
    }

    fn eval(&self, coord: &impl Fn(usize, usize) -> Rational) -> Rational {
        match self {
            Expr::Const(c) => c.clone(),
            Expr::Sig { agent, coord: j } => coord(*agent, *j),
            Expr::Add(terms) => terms
                .iter()
                .fold(Rational::zero(), |acc, t| acc + t.eval(coord)),
            Expr::Scale(c, e) => c * e.eval(coord),
            Expr::Min(terms) => terms
                .iter()
                .map(|t| t.eval(coord))
                .min()
                .unwrap_or_else(Rational::zero),
            Expr::Max(terms) => terms
                .iter()
                .map(|t| t.eval(coord))
                .max()
                .unwrap_or_else(Rational::zero),
        }
    }

    /// Agents whose signals this expression reads.
    pub fn agents_read(&self, out: &mut Vec<usize>) {
        match self {
            Expr::Const(_) => {}
            Expr::Sig { agent, .. } => out.push(*agent),
            Expr::Add(ts) | Expr::Min(ts) | Expr::Max(ts) => {
                ts.iter().for_each(|t| t.agents_read(out))
            }
            Expr::Scale(_, e) => e.agents_read(out),
        }
    }

    fn validate(&self, spaces: &[SignalSpace], m: usize) -> Result<()> {
        match self {
            Expr::Const(_) => Ok(()),
            Expr::Sig { agent, coord } => {
                let space = spaces
                    .get(*agent)
                    .ok_or_else(|| Error::input(format!("sig({agent},{coord}): no such agent")))?;
                if space.kind != SpaceKind::Vectors {
                    return Err(Error::input(format!(
                        "sig({agent},{coord}): agent {agent} has a singleton signal space"
                    )));
                }
                if *coord >= m {
                    return Err(Error::input(format!(
                        "sig({agent},{coord}): coordinate out of range (m = {m})"
                    )));
                }
                Ok(())
            }
            Expr::Add(ts) | Expr::Min(ts) | Expr::Max(ts) => {
                if ts.is_empty() && !matches!(self, Expr::Add(_)) {
                    return Err(Error::input("min/max over no terms"));
                }
                ts.iter().try_for_each(|t| t.validate(spaces, m))
            }
            Expr::Scale(_, e) => e.validate(spaces, m),
        }
    }

    /// This expression multiplied by `factor`.
    pub fn scaled(&self, factor: &Rational) -> Expr {
        Expr::Scale(factor.clone(), Box::new(self.clone()))
    }
}

/// An agent's public valuation.
#[derive(Clone, Debug)]
pub enum Valuation {
    /// `v(s, T) = sum over j in T of items[j](s)`.
    Additive { items: Vec<Expr> },
    /// `v(s, T) = max over clauses of sum over j in T of clause[j](s)`.
    Xos { clauses: Vec<Vec<Expr>> },
    /// `values[profile index][bundle index]`.
    Table { values: Vec<Arc<[Rational]>> },
    /// The signal-independent set-cover construction.
    SetCover { k: usize },
}

impl Valuation {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Valuation::Additive { .. } => "additive",
            Valuation::Xos { .. } => "xos",
            Valuation::Table { .. } => "table",
            Valuation::SetCover { .. } => "set_cover",
        }
    }
}

/// One signal index per agent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignalProfile(pub Vec<usize>);

impl SignalProfile {
    pub fn get(&self, agent: usize) -> usize {
        self.0[agent]
    }

    pub fn with(&self, agent: usize, signal: usize) -> SignalProfile {
        let mut out = self.0.clone();
        out[agent] = signal;
        SignalProfile(out)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for SignalProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

/// The extra report beyond an agent's own signal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bid {
    /// A guess of one other agent's signal (two-agent mechanisms).
    Signal(usize),
    /// A guess of the whole signal profile.
    Profile(SignalProfile),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Report {
    pub signal: usize,
    pub bid: Bid,
}

/// One `(signal, bid)` report per agent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReportProfile(pub Vec<Report>);

impl ReportProfile {
    pub fn report(&self, agent: usize) -> &Report {
        &self.0[agent]
    }

    pub fn signals(&self) -> SignalProfile {
        SignalProfile(self.0.iter().map(|r| r.signal).collect())
    }

    pub fn with(&self, agent: usize, report: Report) -> ReportProfile {
        let mut out = self.0.clone();
        out[agent] = report;
        ReportProfile(out)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The profile agent `agent` evaluates with: the others' reported signals and
/// its own true signal.
pub fn perceived_profile(agent: usize, true_signal: usize, reports: &ReportProfile) -> SignalProfile {
    reports.signals().with(agent, true_signal)
}

#[derive(Clone, Debug)]
pub struct Instance {
    m: usize,
    entitlements: Vec<Rational>,
    spaces: Vec<SignalSpace>,
    valuations: Vec<Valuation>,
    set_cover: Option<Arc<SetCover>>,
}

impl Instance {
    pub fn new(
        m: usize,
        entitlements: Vec<Rational>,
        spaces: Vec<SignalSpace>,
        valuations: Vec<Valuation>,
    ) -> Result<Self> {
        let n = entitlements.len();
        if n < 2 {
            return Err(Error::input(format!("need at least 2 agents, got {n}")));
        }
        if m > MAX_ITEMS {
            return Err(Error::input(format!("at most {MAX_ITEMS} items supported, got {m}")));
        }
        if spaces.len() != n || valuations.len() != n {
            return Err(Error::input(format!(
                "{n} entitlements but {} signal spaces and {} valuations",
                spaces.len(),
                valuations.len()
            )));
        }
        for (i, a) in entitlements.iter().enumerate() {
            if !a.is_positive() || *a >= Rational::one() {
                return Err(Error::input(format!("entitlement of agent {i} ({a}) not in (0,1)")));
            }
        }
        let total: Rational = entitlements.iter().sum();
        if !total.is_one() {
            return Err(Error::input(format!("entitlements sum to {total}, not 1")));
        }
        for (i, space) in spaces.iter().enumerate() {
            if space.is_empty() {
                return Err(Error::input(format!("signal space of agent {i} is empty")));
            }
            if space.kind == SpaceKind::Singleton && space.len() != 1 {
                return Err(Error::input(format!("singleton space of agent {i} has {} signals", space.len())));
            }
            for (t, s) in space.signals.iter().enumerate() {
                if space.kind == SpaceKind::Vectors && s.coords.len() != m {
                    return Err(Error::input(format!(
                        "signal {t} of agent {i} has {} coordinates, expected {m}",
                        s.coords.len()
                    )));
                }
                if s.coords.iter().any(|c| c.is_negative()) {
                    return Err(Error::input(format!("signal {t} of agent {i} has a negative coordinate")));
                }
            }
        }
        let profiles = spaces
            .iter()
            .try_fold(1usize, |acc, s| acc.checked_mul(s.len()))
            .ok_or_else(|| Error::input("signal profile space too large"))?;
        let mut set_cover = None;
        for (i, v) in valuations.iter().enumerate() {
            let ctx = |e: Error| match e {
                Error::Input(msg) => Error::input(format!("valuations[{i}]: {msg}")),
                other => Error::input(format!("valuations[{i}]: {other}")),
            };
            match v {
                Valuation::Additive { items } => {
                    if items.len() != m {
                        return Err(ctx(Error::input(format!("{} item expressions, expected {m}", items.len()))));
                    }
                    items.iter().try_for_each(|e| e.validate(&spaces, m)).map_err(ctx)?;
                }
                Valuation::Xos { clauses } => {
                    if clauses.is_empty() {
                        return Err(ctx(Error::input("XOS valuation without clauses")));
                    }
                    for c in clauses {
                        if c.len() != m {
                            return Err(ctx(Error::input(format!("clause with {} expressions, expected {m}", c.len()))));
                        }
                        c.iter().try_for_each(|e| e.validate(&spaces, m)).map_err(ctx)?;
                    }
                }
                Valuation::Table { values } => {
                    if values.len() != profiles {
                        return Err(ctx(Error::input(format!(
                            "table covers {} signal profiles, instance has {profiles}",
                            values.len()
                        ))));
                    }
                    for (p, row) in values.iter().enumerate() {
                        if m >= 32 || row.len() != 1usize << m {
                            return Err(ctx(Error::input(format!("table row {p} does not cover all 2^{m} bundles"))));
                        }
                        if !row[0].is_zero() {
                            return Err(ctx(Error::input(format!("table row {p} has nonzero empty-bundle value"))));
                        }
                        if row.iter().any(|x| x.is_negative()) {
                            return Err(ctx(Error::input(format!("table row {p} has a negative value"))));
                        }
                    }
                }
                Valuation::SetCover { k } => {
                    let sc = SetCover::new(*k).map_err(ctx)?;
                    if sc.num_items() != m {
                        return Err(ctx(Error::input(format!(
                            "set-cover construction with k = {k} has {} items, instance has {m}",
                            sc.num_items()
                        ))));
                    }
                    set_cover = Some(Arc::new(sc));
                }
            }
        }
        Ok(Instance {
            m,
            entitlements,
            spaces,
            valuations,
            set_cover,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.entitlements.len()
    }

    pub fn num_items(&self) -> usize {
        self.m
    }

    pub fn entitlement(&self, agent: usize) -> &Rational {
        &self.entitlements[agent]
    }

    pub fn entitlements(&self) -> &[Rational] {
        &self.entitlements
    }

    pub fn has_equal_entitlements(&self) -> bool {
        self.entitlements.windows(2).all(|w| w[0] == w[1])
    }

    pub fn space(&self, agent: usize) -> &SignalSpace {
        &self.spaces[agent]
    }

    pub fn spaces(&self) -> &[SignalSpace] {
        &self.spaces
    }

    pub fn valuation(&self, agent: usize) -> &Valuation {
        &self.valuations[agent]
    }

    pub fn valuations(&self) -> &[Valuation] {
        &self.valuations
    }

    pub fn all_items(&self) -> Bundle {
        Bundle::full(self.m)
    }

    /// Number of signal profiles in the product space.
    pub fn profile_count(&self) -> usize {
        self.spaces.iter().map(|s| s.len()).product()
    }

    /// Position of `profile` in the product enumeration (agent 0 most
    /// significant, each agent's signals in declared order).
    pub fn profile_index(&self, profile: &SignalProfile) -> Result<usize> {
        self.check_profile(profile)?;
        Ok(self
            .spaces
            .iter()
            .zip(&profile.0)
            .fold(0, |acc, (space, &s)| acc * space.len() + s))
    }

    pub fn profile_at(&self, mut index: usize) -> SignalProfile {
        let mut out = vec![0; self.spaces.len()];
        for (i, space) in self.spaces.iter().enumerate().rev() {
            out[i] = index % space.len();
            index /= space.len();
        }
        SignalProfile(out)
    }

    /// Every signal profile, in enumeration order.
    pub fn profiles(&self) -> impl Iterator<Item = SignalProfile> + '_ {
        (0..self.profile_count()).map(|i| self.profile_at(i))
    }

    pub fn check_profile(&self, profile: &SignalProfile) -> Result<()> {
        if profile.len() != self.num_agents() {
            return Err(Error::input(format!(
                "signal profile has {} entries, expected {}",
                profile.len(),
                self.num_agents()
            )));
        }
        for (i, (&s, space)) in profile.0.iter().zip(&self.spaces).enumerate() {
            if s >= space.len() {
                return Err(Error::input(format!(
                    "unknown signal {s} for agent {i} (space has {})",
                    space.len()
                )));
            }
        }
        Ok(())
    }

    pub fn check_agent(&self, agent: usize) -> Result<()> {
        if agent >= self.num_agents() {
            return Err(Error::input(format!("no agent {agent}")));
        }
        Ok(())
    }

    fn coordinate(&self, profile: &SignalProfile) -> impl Fn(usize, usize) -> Rational + '_ {
        let signals: Vec<&Signal> = profile
            .0
            .iter()
            .zip(&self.spaces)
            .map(|(&s, space)| space.signal(s))
            .collect();
        move |agent, coord| signals[agent].coords[coord].clone()
    }

    fn eval_items(&self, exprs: &[Expr], profile: &SignalProfile, agent: usize) -> Result<Vec<Rational>> {
        let coord = self.coordinate(profile);
        exprs
            .iter()
            .enumerate()
            .map(|(j, e)| {
                let v = e.eval(&coord);
                if v.is_negative() {
                    Err(Error::input(format!(
                        "valuation of agent {agent} gives item {j} the negative value {v} at profile {profile}"
                    )))
                } else {
                    Ok(v)
                }
            })
            .collect()
    }

    /// `v_agent(profile, .)` as a single-agent set function.
    pub fn valuation_at(&self, agent: usize, profile: &SignalProfile) -> Result<AgentValuation> {
        self.check_agent(agent)?;
        self.check_profile(profile)?;
        Ok(match &self.valuations[agent] {
            Valuation::Additive { items } => {
                AgentValuation::Additive(self.eval_items(items, profile, agent)?)
            }
            Valuation::Xos { clauses } => AgentValuation::Xos {
                m: self.m,
                clauses: clauses
                    .iter()
                    .map(|c| self.eval_items(c, profile, agent))
                    .collect::<Result<_>>()?,
            },
            Valuation::Table { values } => AgentValuation::Table {
                m: self.m,
                values: values[self.profile_index(profile)?].clone(),
            },
            Valuation::SetCover { .. } => AgentValuation::SetCover(
                self.set_cover
                    .clone()
                    .expect("set-cover valuations are built at construction"),
            ),
        })
    }

    /// `v_agent(profile, bundle)`.
    pub fn value(&self, agent: usize, profile: &SignalProfile, bundle: Bundle) -> Result<Rational> {
        if !bundle.is_subset(self.all_items()) {
            return Err(Error::input(format!("bundle {bundle} not within the {} items", self.m)));
        }
        Ok(self.valuation_at(agent, profile)?.value(bundle))
    }

    /// Copy of this instance with the signal space of `agent` restricted to
    /// the listed signals (in that order). Only instances without table
    /// valuations can be restricted, since tables index the full product.
    pub fn restrict_space(&self, agent: usize, keep: &[usize]) -> Result<Instance> {
        self.check_agent(agent)?;
        if self.valuations.iter().any(|v| matches!(v, Valuation::Table { .. })) {
            return Err(Error::domain("cannot restrict the signal space of a table-valued instance"));
        }
        let space = &self.spaces[agent];
        let mut signals = Vec::with_capacity(keep.len());
        for &s in keep {
            if s >= space.len() {
                return Err(Error::input(format!("unknown signal {s} for agent {agent}")));
            }
            signals.push(space.signals[s].clone());
        }
        let mut spaces = self.spaces.clone();
        spaces[agent] = SignalSpace {
            kind: space.kind,
            signals,
        };
        Instance::new(self.m, self.entitlements.clone(), spaces, self.valuations.clone())
    }
}
