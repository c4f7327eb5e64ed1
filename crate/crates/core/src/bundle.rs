//! Item bundles as 64-bit sets and allocations as ordered partitions.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest number of items a [`Bundle`] can hold.
pub const MAX_ITEMS: usize = 64;

/// A subset of the items `{0, .., m-1}`, stored as a bit-set.
///
/// Bundles order by their numeric bit pattern (item `j` is bit `j`); every
/// "lexicographically smallest bundle" tie rule in the library refers to
/// this order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bundle(u64);

impl Bundle {
    pub const EMPTY: Bundle = Bundle(0);

    pub fn from_bits(bits: u64) -> Self {
        Bundle(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// The full item set `{0, .., m-1}`.
    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_ITEMS, "at most {MAX_ITEMS} items are supported");
        if m == MAX_ITEMS {
            Bundle(u64::MAX)
        } else {
            Bundle((1u64 << m) - 1)
        }
    }

    pub fn singleton(item: usize) -> Self {
        Bundle(1u64 << item)
    }

    pub fn from_items<I: IntoIterator<Item = usize>>(items: I) -> Self {
        items.into_iter().fold(Bundle::EMPTY, |b, j| b.with(j))
    }

    /// Builds a bundle over `m` items, rejecting out-of-range or repeated indices.
    pub fn try_from_items(items: &[usize], m: usize) -> Result<Self> {
        let mut bundle = Bundle::EMPTY;
        for &j in items {
            if j >= m {
                return Err(Error::input(format!("item {j} out of range (m = {m})")));
            }
            if bundle.contains(j) {
                return Err(Error::input(format!("item {j} listed twice")));
            }
            bundle = bundle.with(j);
        }
        Ok(bundle)
    }

    pub fn contains(self, item: usize) -> bool {
        item < MAX_ITEMS && self.0 & (1u64 << item) != 0
    }

    pub fn with(self, item: usize) -> Self {
        Bundle(self.0 | (1u64 << item))
    }

    pub fn without(self, item: usize) -> Self {
        Bundle(self.0 & !(1u64 << item))
    }

    pub fn union(self, other: Bundle) -> Self {
        Bundle(self.0 | other.0)
    }

    pub fn intersection(self, other: Bundle) -> Self {
        Bundle(self.0 & other.0)
    }

    pub fn difference(self, other: Bundle) -> Self {
        Bundle(self.0 & !other.0)
    }

    pub fn complement(self, m: usize) -> Self {
        Bundle::full(m).difference(self)
    }

    pub fn is_subset(self, other: Bundle) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Bundle) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Items in ascending order.
    pub fn items(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(j)
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.items().collect()
    }

    /// Index of this bundle in a dense table of all `2^m` subsets.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// All subsets of `{0, .., m-1}` in ascending numeric order.
    pub fn all(m: usize) -> impl Iterator<Item = Bundle> {
        assert!(m < MAX_ITEMS, "cannot enumerate subsets of {m} items");
        (0..(1u64 << m)).map(Bundle)
    }

    /// All subsets of `self`, ascending.
    pub fn subsets(self) -> impl Iterator<Item = Bundle> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let current = next?;
            next = if current == full {
                None
            } else {
                Some((current.wrapping_sub(full)) & full)
            };
            Some(Bundle(current))
        })
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.items()).finish()
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, j) in self.items().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")
    }
}

/// Serialized as a sorted list of item indices.
impl Serialize for Bundle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bundle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<usize>::deserialize(d)?;
        Bundle::try_from_items(&items, MAX_ITEMS).map_err(serde::de::Error::custom)
    }
}

/// An ordered partition of all `m` items into one bundle per agent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Allocation {
    bundles: Vec<Bundle>,
}

impl Allocation {
    /// Checks that the bundles are pairwise disjoint and cover `{0, .., m-1}`.
    pub fn new(bundles: Vec<Bundle>, m: usize) -> Result<Self> {
        let mut seen = Bundle::EMPTY;
        for (i, &b) in bundles.iter().enumerate() {
            if !b.is_disjoint(seen) {
                return Err(Error::input(format!(
                    "bundle of agent {i} overlaps an earlier bundle"
                )));
            }
            seen = seen.union(b);
        }
        if seen != Bundle::full(m) {
            return Err(Error::input(format!(
                "bundles cover {seen} instead of all {m} items"
            )));
        }
        Ok(Allocation { bundles })
    }

    /// Everything to `agent`, nothing to the others.
    pub fn all_to(agent: usize, n: usize, m: usize) -> Self {
        let mut bundles = vec![Bundle::EMPTY; n];
        bundles[agent] = Bundle::full(m);
        Allocation { bundles }
    }

    /// Builds the allocation in which item `j` goes to `owners[j]`.
    pub fn from_owners(owners: &[usize], n: usize) -> Self {
        let mut bundles = vec![Bundle::EMPTY; n];
        for (j, &i) in owners.iter().enumerate() {
            bundles[i] = bundles[i].with(j);
        }
        Allocation { bundles }
    }

    pub fn bundle(&self, agent: usize) -> Bundle {
        self.bundles[agent]
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn num_agents(&self) -> usize {
        self.bundles.len()
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.bundles.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}
