use crate::error::{Error, Result};

/// Hard limits on exhaustive enumerations.
///
/// Exceeding a limit is always an error; no enumeration is ever truncated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest `m` for which all `2^m` bundles may be enumerated.
    pub max_subset_items: usize,
    /// Largest number of partitions (MMS) or allocations (brute-force search).
    pub max_partitions: u64,
    /// Largest report-profile space for equilibrium enumeration, and largest
    /// per-agent deviation space for equilibrium verification.
    pub max_reports: u64,
    /// Largest number of bundle pairs for subadditivity checks.
    pub max_pairs: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_subset_items: 12,
            max_partitions: 1_000_000,
            max_reports: 1_000_000,
            max_pairs: 1 << 20,
        }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget {
            max_subset_items: 30,
            max_partitions: u64::MAX,
            max_reports: u64::MAX,
            max_pairs: u64::MAX,
        }
    }

    pub fn check_subsets(&self, m: usize) -> Result<()> {
        if m > self.max_subset_items {
            return Err(Error::budget(
                "bundle enumeration",
                format!("2^{m} bundles"),
                format!("2^{}", self.max_subset_items),
            ));
        }
        Ok(())
    }

    pub fn check_partitions(&self, what: &str, count: u128) -> Result<()> {
        if count > self.max_partitions as u128 {
            return Err(Error::budget(what, count, self.max_partitions));
        }
        Ok(())
    }

    pub fn check_reports(&self, what: &str, count: u128) -> Result<()> {
        if count > self.max_reports as u128 {
            return Err(Error::budget(what, count, self.max_reports));
        }
        Ok(())
    }

    pub fn check_pairs(&self, count: u128) -> Result<()> {
        if count > self.max_pairs as u128 {
            return Err(Error::budget("bundle pairs", count, self.max_pairs));
        }
        Ok(())
    }
}
