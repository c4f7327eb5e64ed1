//! The subadditive set-cover valuation over nonzero binary `k`-vectors.
//!
//! Items are the `2^k - 1` nonzero vectors of `GF(2)^k`; item index `i`
//! stands for the vector with bit pattern `i + 1`. For each nonzero `u` the
//! cover set `B_u` holds the items orthogonal to `u`. With `g` the cover
//! number of a bundle, the valuation is
//!
//! ```text
//! v(T) = g(T)            if g(T) < k/2
//!        k - g(M \ T)    if g(M \ T) < k/2
//!        k/2             otherwise
//! ```
//!
//! Only cover sizes below `k/2` are ever needed, so `g` is decided by bounded
//! enumeration over combinations of cover sets.

use crate::bundle::{Bundle, MAX_ITEMS};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SetCover {
    k: usize,
    m: usize,
    /// `B_u` for every nonzero `u`, indexed by `u - 1`.
    covers: Vec<Bundle>,
    /// `M \ B_u`, indexed by `u - 1`.
    outside: Vec<Bundle>,
}

/// Which branch of the piecewise definition produced a value. Branches are
/// tried in order, so a bundle matching both small-cover tests takes the
/// first; such bundles are flagged through [`SetCoverEval::conflict`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetCoverCase {
    Small { cover: usize },
    CoSmall { co_cover: usize },
    Middle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SetCoverEval {
    pub value: usize,
    pub case: SetCoverCase,
    /// Both the bundle and its complement are coverable by fewer than `k/2`
    /// cover sets, i.e. the first two branches overlap.
    pub conflict: bool,
}

impl SetCover {
    pub fn new(k: usize) -> Result<Self> {
        if k < 6 || !k.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "set-cover construction needs an even k >= 6, got {k}"
            )));
        }
        let m = (1usize << k) - 1;
        if m > MAX_ITEMS {
            return Err(Error::domain(format!(
                "k = {k} gives {m} items, more than the {MAX_ITEMS}-item bundle width"
            )));
        }
        let full = Bundle::full(m);
        let covers: Vec<Bundle> = (1..=m)
            .map(|u| {
                Bundle::from_items((0..m).filter(|&i| ((i + 1) & u).count_ones() % 2 == 0))
            })
            .collect();
        let outside = covers.iter().map(|b| full.difference(*b)).collect();
        Ok(SetCover {
            k,
            m,
            covers,
            outside,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_items(&self) -> usize {
        self.m
    }

    /// `B_u` for the nonzero vector `u` (as a bit pattern in `1..=m`).
    pub fn cover_set(&self, u: usize) -> Bundle {
        self.covers[u - 1]
    }

    pub fn cover_sets(&self) -> &[Bundle] {
        &self.covers
    }

    /// Smallest `l < limit` such that `l` cover sets cover `bundle`, if any.
    pub fn cover_number_below(&self, bundle: Bundle, limit: usize) -> Option<usize> {
        (0..limit).find(|&l| self.coverable(bundle, l, 0))
    }

    /// Whether some `l` cover sets with indices `>= start` cover `uncovered`.
    fn coverable(&self, uncovered: Bundle, l: usize, start: usize) -> bool {
        if uncovered.is_empty() {
            return true;
        }
        if l == 0 {
            return false;
        }
        (start..self.outside.len())
            .any(|u| self.coverable(uncovered.intersection(self.outside[u]), l - 1, u + 1))
    }

    pub fn evaluate(&self, bundle: Bundle) -> SetCoverEval {
        let half = self.k / 2;
        let rest = bundle.complement(self.m);
        let small = self.cover_number_below(bundle, half);
        let co_small = self.cover_number_below(rest, half);
        let conflict = small.is_some() && co_small.is_some();
        let (value, case) = match (small, co_small) {
            (Some(g), _) => (g, SetCoverCase::Small { cover: g }),
            (None, Some(g)) => (self.k - g, SetCoverCase::CoSmall { co_cover: g }),
            (None, None) => (half, SetCoverCase::Middle),
        };
        SetCoverEval {
            value,
            case,
            conflict,
        }
    }

    pub fn value(&self, bundle: Bundle) -> usize {
        self.evaluate(bundle).value
    }

    /// Whether `bundle` is coverable by `l` cover sets.
    pub fn covered_by(&self, bundle: Bundle, l: usize) -> bool {
        self.coverable(bundle, l, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(SetCover::new(4).is_err());
        assert!(SetCover::new(7).is_err());
        assert!(SetCover::new(8).is_err());
        assert!(SetCover::new(6).is_ok());
    }

    #[test]
    fn cover_sets_have_expected_sizes() {
        let sc = SetCover::new(6).unwrap();
        assert_eq!(sc.num_items(), 63);
        for b in sc.cover_sets() {
            assert_eq!(b.len(), 31);
            assert_eq!(b.complement(63).len(), 32);
        }
        // every item lies outside exactly (m + 1) / 2 cover sets
        for j in 0..63 {
            let outside = sc.cover_sets().iter().filter(|b| !b.contains(j)).count();
            assert_eq!(outside, 32);
        }
    }

    #[test]
    fn canonical_values() {
        let sc = SetCover::new(6).unwrap();
        assert_eq!(sc.value(Bundle::full(63)), 6);
        assert_eq!(sc.value(Bundle::EMPTY), 0);
        assert_eq!(sc.value(Bundle::singleton(17)), 1);
        assert_eq!(sc.value(sc.cover_set(5)), 1);
    }

    #[test]
    fn three_dependent_cover_sets_cover_everything() {
        // B_u, B_w and B_(u xor w) jointly cover M, so the cover number of M
        // is 3 rather than k, and B_u and its complement (covered by
        // B_w and B_(u xor w)) both fall under a small-cover branch.
        let sc = SetCover::new(6).unwrap();
        let full = Bundle::full(63);
        assert_eq!(sc.cover_set(1).union(sc.cover_set(2)).union(sc.cover_set(3)), full);
        assert_eq!(sc.cover_number_below(full, 7), Some(3));
        let b = sc.cover_set(5);
        assert_eq!(sc.cover_number_below(b.complement(63), 7), Some(2));
        let eval = sc.evaluate(b.complement(63));
        assert!(eval.conflict);
        assert_eq!(eval.value, 2);
    }
}
