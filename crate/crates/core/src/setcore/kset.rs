use std::cmp::Ordering;
use std::fmt;

use num_traits::ToPrimitive;

use super::GroundParams;
use crate::error::{Error, Result};

/// A subset of `[n]` stored as a bit mask (element `i` at bit `i - 1`).
///
/// Ordering is lexicographic on the ascending element lists, so `{1,2,9}`
/// sorts before `{1,3,4}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct KSet(u128);

impl KSet {
    pub const EMPTY: KSet = KSet(0);

    pub fn from_bits(bits: u128) -> Self {
        KSet(bits)
    }

    /// Panics if an element lies outside `1..=128`.
    pub fn from_elements(elements: &[u32]) -> Self {
        let mut bits = 0u128;
        for &e in elements {
            assert!((1..=128).contains(&e), "element {e} outside 1..=128");
            bits |= 1u128 << (e - 1);
        }
        KSet(bits)
    }

    /// The interval `[lo, hi]`; empty when `lo > hi`.
    pub fn interval(lo: u32, hi: u32) -> Self {
        let mut bits = 0u128;
        for e in lo.max(1)..=hi.min(128) {
            bits |= 1u128 << (e - 1);
        }
        KSet(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, element: u32) -> bool {
        (1..=128).contains(&element) && self.0 >> (element - 1) & 1 == 1
    }

    pub fn contains_all(self, other: KSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn is_disjoint(self, other: KSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn intersection_size(self, other: KSet) -> u32 {
        (self.0 & other.0).count_ones()
    }

    pub fn intersection(self, other: KSet) -> KSet {
        KSet(self.0 & other.0)
    }

    pub fn union(self, other: KSet) -> KSet {
        KSet(self.0 | other.0)
    }

    pub fn difference(self, other: KSet) -> KSet {
        KSet(self.0 & !other.0)
    }

    pub fn with(self, element: u32) -> KSet {
        KSet(self.0 | KSet::from_elements(&[element]).0)
    }

    pub fn without(self, element: u32) -> KSet {
        KSet(self.0 & !KSet::from_elements(&[element]).0)
    }

    /// Elements in ascending order.
    pub fn elements(self) -> Elements {
        Elements(self.0)
    }

    pub fn to_vec(self) -> Vec<u32> {
        self.elements().collect()
    }

    /// Smallest element, if any.
    pub fn min_element(self) -> Option<u32> {
        (self.0 != 0).then(|| self.0.trailing_zeros() + 1)
    }
}

pub struct Elements(u128);

impl Iterator for Elements {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(tz + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Elements {}

impl Ord for KSet {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        // Both lists agree below the lowest differing element `d`. The set
        // holding `d` is smaller unless the other list ends before `d`.
        let d = diff.trailing_zeros();
        let above = if d == 127 { 0 } else { u128::MAX << (d + 1) };
        if self.0 >> d & 1 == 1 {
            if other.0 & above != 0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        } else if self.0 & above != 0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

impl PartialOrd for KSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elements().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// Serialized as the ascending element list.
impl serde::Serialize for KSet {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.elements())
    }
}

impl fmt::Debug for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Lexicographic iterator over all k-subsets of `[n]`.
pub struct KSetIter {
    n: u32,
    current: Option<Vec<u32>>,
}

impl KSetIter {
    pub fn new(params: GroundParams) -> Self {
        KSetIter {
            n: params.n(),
            current: Some((1..=params.k()).collect()),
        }
    }
}

impl Iterator for KSetIter {
    type Item = KSet;

    fn next(&mut self) -> Option<KSet> {
        let combo = self.current.as_mut()?;
        let out = KSet::from_elements(combo);
        let k = combo.len();
        // rightmost position that can still be incremented
        match (0..k)
            .rev()
            .find(|&i| combo[i] < self.n - (k - 1 - i) as u32)
        {
            Some(i) => {
                combo[i] += 1;
                for j in i + 1..k {
                    combo[j] = combo[j - 1] + 1;
                }
            }
            None => self.current = None,
        }
        Some(out)
    }
}

/// All `C(n, k)` subsets in ascending lexicographic order, refusing when the
/// count exceeds `cap`.
pub fn enumerate_ksets(params: GroundParams, cap: u64) -> Result<Vec<KSet>> {
    let total = params.universe_size();
    match total.to_u64() {
        Some(count) if count <= cap => Ok(KSetIter::new(params).collect()),
        _ => Err(Error::CapExceeded {
            what: "k-set enumeration",
            required: total,
            cap,
        }),
    }
}
