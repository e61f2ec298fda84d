//! Ground-set arithmetic: k-subsets of `[n]`, families of them, exact
//! binomial coefficients and the canonical lexicographic order.
//!
//! Elements are 1-based. Element `i` lives at bit `i - 1` of a `u128`, which
//! caps the ground set at 128 elements.

mod family;
mod format;
mod kset;

pub use family::Family;
pub use format::{
    parse_family, parse_family_json, read_family, render_for_path, serialize_family,
    serialize_family_json, write_family,
};
pub use kset::{enumerate_ksets, KSet, KSetIter};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported ground set.
pub const MAX_N: u32 = 128;

/// Default cap on the number of k-sets any single enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// The pair `(n, k)`: k-element subsets of an n-element ground set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroundParams {
    n: u32,
    k: u32,
}

impl GroundParams {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        if k > n {
            return Err(Error::param(format!("k = {k} exceeds n = {n}")));
        }
        if n > MAX_N {
            return Err(Error::param(format!(
                "n = {n} exceeds the supported maximum of {MAX_N}"
            )));
        }
        Ok(GroundParams { n, k })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of k-subsets of the ground set.
    pub fn universe_size(&self) -> BigUint {
        binomial(self.n as u64, self.k as i64)
    }

    /// Bit mask of the whole ground set.
    pub fn ground_mask(&self) -> u128 {
        if self.n == 128 {
            u128::MAX
        } else {
            (1u128 << self.n) - 1
        }
    }

    /// Checks that `set` is a k-subset of `[n]`.
    pub fn validate(&self, set: KSet) -> Result<()> {
        if set.bits() & !self.ground_mask() != 0 {
            return Err(Error::param(format!(
                "{set} has elements outside [1, {}]",
                self.n
            )));
        }
        if set.len() != self.k {
            return Err(Error::param(format!(
                "{set} has {} elements, expected {}",
                set.len(),
                self.k
            )));
        }
        Ok(())
    }

    /// `|a ∩ b|`, after checking both sets belong to this ground set.
    pub fn intersection_size(&self, a: KSet, b: KSet) -> Result<u32> {
        self.validate(a)?;
        self.validate(b)?;
        Ok(a.intersection_size(b))
    }
}

/// Exact binomial coefficient `C(a, b)`; zero when `b < 0` or `b > a`.
pub fn binomial(a: u64, b: i64) -> BigUint {
    if b < 0 || b as u64 > a {
        return BigUint::zero();
    }
    let b = (b as u64).min(a - b as u64);
    let mut acc = BigUint::one();
    for i in 1..=b {
        acc *= a - b + i;
        acc /= i;
    }
    acc
}

/// `C(a, b)` for signed `a`; negative `a` yields zero, matching the counting
/// interpretation used for the closed-form bounds.
pub fn binomial_signed(a: i64, b: i64) -> BigUint {
    if a < 0 {
        BigUint::zero()
    } else {
        binomial(a as u64, b)
    }
}

/// Small binomial as a plain integer, saturating at `u64::MAX`.
pub fn binomial_u64(a: u64, b: i64) -> u64 {
    binomial(a, b).to_u64().unwrap_or(u64::MAX)
}

/// `C(m, 2)` for small counts.
pub(crate) fn choose2(m: i64) -> i64 {
    if m < 2 {
        0
    } else {
        m * (m - 1) / 2
    }
}
