//! Random instance generators shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::sync::Arc;

use idvfair::bundle::Bundle;
use idvfair::instance::{Expr, SignalSpace, Valuation};
use idvfair::rational::{frac, int, zero};
use idvfair::{Instance, Rational};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn small_int(rng: &mut StdRng, lo: i64, hi: i64) -> Rational {
    int(rng.gen_range(lo..=hi))
}

/// `size` signal vectors with `m` coordinates each in `0..=max`.
pub fn vector_space(rng: &mut StdRng, size: usize, m: usize, max: i64) -> SignalSpace {
    if size == 1 && rng.gen_bool(0.3) {
        return SignalSpace::singleton();
    }
    SignalSpace::vectors(
        (0..size)
            .map(|_| (0..m).map(|_| small_int(rng, 0, max)).collect())
            .collect(),
    )
}

fn reads_coords(space: &SignalSpace) -> bool {
    !space.signal(0).coords.is_empty()
}

/// Item `j` is worth a constant plus a nonnegative mix of coordinate `j` of
/// the signals of `readers`.
pub fn item_expr(rng: &mut StdRng, j: usize, readers: &[usize], spaces: &[SignalSpace]) -> Expr {
    let mut terms = vec![Expr::constant(small_int(rng, 0, 2))];
    for &k in readers {
        if reads_coords(&spaces[k]) && rng.gen_bool(0.7) {
            terms.push(Expr::scale(frac(rng.gen_range(1..=3), rng.gen_range(1..=2)), Expr::sig(k, j)));
        }
    }
    Expr::Add(terms)
}

pub fn additive(rng: &mut StdRng, m: usize, readers: &[usize], spaces: &[SignalSpace]) -> Valuation {
    Valuation::Additive {
        items: (0..m).map(|j| item_expr(rng, j, readers, spaces)).collect(),
    }
}

pub fn xos(rng: &mut StdRng, m: usize, readers: &[usize], spaces: &[SignalSpace]) -> Valuation {
    let clauses = rng.gen_range(1..=3);
    Valuation::Xos {
        clauses: (0..clauses)
            .map(|_| (0..m).map(|j| item_expr(rng, j, readers, spaces)).collect())
            .collect(),
    }
}

/// A monotone table: each bundle is worth at least every bundle one item
/// smaller, plus a random increment.
pub fn monotone_table(rng: &mut StdRng, m: usize, profiles: usize) -> Valuation {
    let values = (0..profiles)
        .map(|_| {
            let mut v = vec![zero(); 1 << m];
            for bits in 1..1u64 << m {
                let b = Bundle::from_bits(bits);
                let base = b.items().map(|j| v[b.without(j).index()].clone()).max().unwrap();
                v[b.index()] = base + small_int(rng, 0, 2);
            }
            Arc::from(v)
        })
        .collect();
    Valuation::Table { values }
}

fn profile_count(spaces: &[SignalSpace]) -> usize {
    spaces.iter().map(|s| s.len()).product()
}

pub const UNEQUAL: [(i64, i64); 6] = [(1, 3), (1, 4), (2, 5), (1, 5), (3, 7), (2, 3)];

pub fn unequal_pair(rng: &mut StdRng) -> Vec<Rational> {
    let (p, q) = UNEQUAL[rng.gen_range(0..UNEQUAL.len())];
    vec![frac(p, q), frac(q - p, q)]
}

pub fn equal(n: usize) -> Vec<Rational> {
    vec![frac(1, n as i64); n]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Additive,
    Table,
    Xos,
}

/// A two-agent instance with interdependent valuations of the given kinds.
pub fn two_agents(
    rng: &mut StdRng,
    m: usize,
    max_space: usize,
    kinds: [Kind; 2],
    entitlements: Vec<Rational>,
) -> Instance {
    let spaces: Vec<SignalSpace> = (0..2)
        .map(|_| {
            let size = rng.gen_range(1..=max_space);
            vector_space(rng, size, m, 3)
        })
        .collect();
    let profiles = profile_count(&spaces);
    let valuations = kinds
        .iter()
        .map(|kind| match kind {
            Kind::Additive => additive(rng, m, &[0, 1], &spaces),
            Kind::Xos => xos(rng, m, &[0, 1], &spaces),
            Kind::Table => monotone_table(rng, m, profiles),
        })
        .collect();
    Instance::new(m, entitlements, spaces, valuations).expect("generated instance is valid")
}

/// Additive valuations where every agent reads only its own signal.
pub fn independent_additive(rng: &mut StdRng, n: usize, m: usize, max_space: usize, entitlements: Vec<Rational>) -> Instance {
    let spaces: Vec<SignalSpace> = (0..n)
        .map(|_| {
            let size = rng.gen_range(1..=max_space);
            vector_space(rng, size, m, 3)
        })
        .collect();
    let valuations = (0..n).map(|i| additive(rng, m, &[i], &spaces)).collect();
    Instance::new(m, entitlements, spaces, valuations).expect("generated instance is valid")
}

/// Additive valuations where every agent reads every signal.
pub fn interdependent_additive(rng: &mut StdRng, n: usize, m: usize, max_space: usize) -> Instance {
    let spaces: Vec<SignalSpace> = (0..n)
        .map(|_| {
            let size = rng.gen_range(1..=max_space);
            vector_space(rng, size, m, 3)
        })
        .collect();
    let readers: Vec<usize> = (0..n).collect();
    let valuations = (0..n).map(|_| additive(rng, m, &readers, &spaces)).collect();
    Instance::new(m, equal(n), spaces, valuations).expect("generated instance is valid")
}

pub fn random_profile(rng: &mut StdRng, instance: &Instance) -> idvfair::SignalProfile {
    idvfair::SignalProfile(
        (0..instance.num_agents())
            .map(|i| rng.gen_range(0..instance.space(i).len()))
            .collect(),
    )
}
