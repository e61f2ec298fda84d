//! Pair-sum conditions on ℓ-subfamilies and an exact checker for them.
//!
//! A family satisfies a condition when every ℓ distinct members have total
//! pairwise intersection size at least the condition's threshold. The checker
//! computes the exact minimum over all ℓ-subfamilies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setcore::{binomial, choose2, Family};
use crate::tuples::TupleSearch;

/// Largest tuple size the checker accepts.
pub const MAX_ELL: u32 = 64;

/// Families with at most this many ℓ-subfamilies are checked by plain
/// enumeration.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `C(ℓ-1, 2) + 1`, intersecting case.
    Eq2,
    /// `C(ℓ, 2)(t-1) + C(ℓ-1, 2) + 1`.
    Eq3,
    /// `C(ℓ, 2)(t-1) + C(ℓ-1, 2)`, one below `Eq3`.
    Eq4,
    /// `C(ℓ-1, 2) - s`, intersecting case with slack `s`.
    Eq10,
    /// Every pair meets in at least `t` elements.
    Pairwise,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Eq2 => "eq2",
            Variant::Eq3 => "eq3",
            Variant::Eq4 => "eq4",
            Variant::Eq10 => "eq10",
            Variant::Pairwise => "pairwise",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "eq2" => Ok(Variant::Eq2),
            "eq3" => Ok(Variant::Eq3),
            "eq4" => Ok(Variant::Eq4),
            "eq10" => Ok(Variant::Eq10),
            "pairwise" | "pairwise_t" => Ok(Variant::Pairwise),
            other => Err(Error::param(format!("unknown variant `{other}`"))),
        }
    }
}

/// A validated condition `(t, ℓ, variant, s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ConditionSpec {
    t: u32,
    ell: u32,
    variant: Variant,
    slack: u32,
}

impl ConditionSpec {
    /// Checks the hypotheses each variant is stated under. For `Pairwise`
    /// the tuple size is forced to 2.
    pub fn new(t: u32, ell: u32, variant: Variant, slack: u32) -> Result<Self> {
        if t == 0 {
            return Err(Error::param("t must be at least 1"));
        }
        let ell = if variant == Variant::Pairwise { 2 } else { ell };
        if ell < 2 {
            return Err(Error::param(format!("ell = {ell} must be at least 2")));
        }
        if ell > MAX_ELL {
            return Err(Error::param(format!(
                "ell = {ell} exceeds the supported maximum of {MAX_ELL}"
            )));
        }
        match variant {
            Variant::Eq2 | Variant::Eq10 if t != 1 => {
                return Err(Error::param(format!(
                    "{variant} is stated for t = 1, got t = {t}"
                )));
            }
            Variant::Eq4 if ell < 3 => {
                return Err(Error::param("eq4 requires ell >= 3"));
            }
            Variant::Eq10 if 2 * slack + 1 > ell => {
                return Err(Error::param(format!(
                    "eq10 requires 2s + 1 <= ell, got s = {slack}, ell = {ell}"
                )));
            }
            _ => {}
        }
        if slack != 0 && variant != Variant::Eq10 {
            return Err(Error::param(format!(
                "slack s only applies to eq10, not {variant}"
            )));
        }
        Ok(ConditionSpec {
            t,
            ell,
            variant,
            slack,
        })
    }

    pub fn pairwise(t: u32) -> Result<Self> {
        ConditionSpec::new(t, 2, Variant::Pairwise, 0)
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn slack(&self) -> u32 {
        self.slack
    }

    /// Minimum allowed pair-sum of an ℓ-subfamily (for `Pairwise`, of a
    /// single pair).
    pub fn threshold(&self) -> i64 {
        let t = self.t as i64;
        let ell = self.ell as i64;
        match self.variant {
            Variant::Eq2 => choose2(ell - 1) + 1,
            Variant::Eq3 => choose2(ell) * (t - 1) + choose2(ell - 1) + 1,
            Variant::Eq4 => choose2(ell) * (t - 1) + choose2(ell - 1),
            Variant::Eq10 => choose2(ell - 1) - self.slack as i64,
            Variant::Pairwise => t,
        }
    }

    /// Same condition with the threshold computed from `variant`, keeping
    /// `t` and `ℓ`.
    pub fn with_variant(&self, variant: Variant) -> Result<Self> {
        let slack = if variant == Variant::Eq10 {
            self.slack
        } else {
            0
        };
        ConditionSpec::new(self.t, self.ell, variant, slack)
    }
}

/// Threshold of `(t, ℓ, variant, s)` after validating the hypotheses.
pub fn threshold(t: u32, ell: u32, variant: Variant, slack: u32) -> Result<i64> {
    Ok(ConditionSpec::new(t, ell, variant, slack)?.threshold())
}

/// An ℓ-subfamily whose pair-sum falls below the threshold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub indices: Vec<usize>,
    pub pair_sum: i64,
    pub threshold: i64,
}

impl Violation {
    /// Recomputes the pair-sum and checks the record is consistent.
    pub fn verify(&self, family: &Family) -> bool {
        self.indices.windows(2).all(|w| w[0] < w[1])
            && pair_sum(family, &self.indices).is_ok_and(|s| s == self.pair_sum)
            && self.pair_sum < self.threshold
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    /// `min_pairsum` is `None` when no search was needed (vacuous quantifier
    /// or a threshold of at most zero).
    Satisfied {
        min_pairsum: Option<i64>,
        threshold: i64,
    },
    Violated(Violation),
}

impl CheckOutcome {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, CheckOutcome::Satisfied { .. })
    }

    pub fn violation(&self) -> Option<&Violation> {
        match self {
            CheckOutcome::Violated(v) => Some(v),
            CheckOutcome::Satisfied { .. } => None,
        }
    }
}

/// Sum of `|F_i ∩ F_j|` over unordered pairs of the indexed members.
pub fn pair_sum(family: &Family, tuple: &[usize]) -> Result<i64> {
    let m = family.len();
    for (pos, &i) in tuple.iter().enumerate() {
        if i >= m {
            return Err(Error::param(format!(
                "index {i} out of range for a family of {m}"
            )));
        }
        if tuple[..pos].contains(&i) {
            return Err(Error::param(format!("index {i} repeated")));
        }
    }
    let mut total = 0i64;
    for (a, &i) in tuple.iter().enumerate() {
        for &j in &tuple[a + 1..] {
            total += family.intersection_size(i, j) as i64;
        }
    }
    Ok(total)
}

/// Minimum pair-sum over all ℓ-subfamilies and the lexicographically least
/// index tuple attaining it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinPairSum {
    pub value: i64,
    pub witness: Vec<usize>,
}

fn check_min_args(family: &Family, ell: u32) -> Result<()> {
    if ell < 2 {
        return Err(Error::param(format!("ell = {ell} must be at least 2")));
    }
    if ell > MAX_ELL {
        return Err(Error::param(format!(
            "ell = {ell} exceeds the supported maximum of {MAX_ELL}"
        )));
    }
    if family.len() < ell as usize {
        return Err(Error::param(format!(
            "family has {} members, fewer than ell = {ell}",
            family.len()
        )));
    }
    Ok(())
}

/// Exact minimum pair-sum. Enumerates directly when there are at most
/// [`EXHAUSTIVE_LIMIT`] subfamilies, otherwise uses branch and bound.
pub fn min_pairsum(family: &Family, ell: u32) -> Result<MinPairSum> {
    check_min_args(family, ell)?;
    if binomial(family.len() as u64, ell as i64) <= EXHAUSTIVE_LIMIT.into() {
        min_pairsum_exhaustive(family, ell)
    } else {
        min_pairsum_branch_and_bound(family, ell)
    }
}

/// Plain enumeration of every ℓ-subfamily in lexicographic order.
pub fn min_pairsum_exhaustive(family: &Family, ell: u32) -> Result<MinPairSum> {
    check_min_args(family, ell)?;
    let sets = family.members();
    let ell = ell as usize;
    let m = sets.len();
    let mut idx: Vec<usize> = (0..ell).collect();
    // partial[r] = pair-sum of idx[..r]
    let mut partial = vec![0i64; ell + 1];
    for r in 1..ell {
        partial[r + 1] = partial[r]
            + (0..r)
                .map(|q| sets[idx[q]].intersection_size(sets[idx[r]]) as i64)
                .sum::<i64>();
    }
    let mut best = MinPairSum {
        value: partial[ell],
        witness: idx.clone(),
    };
    while let Some(r) = (0..ell).rev().find(|&r| idx[r] < m - (ell - r)) {
        idx[r] += 1;
        for q in r + 1..ell {
            idx[q] = idx[q - 1] + 1;
        }
        for q in r..ell {
            partial[q + 1] = partial[q]
                + (0..q)
                    .map(|p| sets[idx[p]].intersection_size(sets[idx[q]]) as i64)
                    .sum::<i64>();
        }
        if partial[ell] < best.value {
            best = MinPairSum {
                value: partial[ell],
                witness: idx.clone(),
            };
        }
    }
    Ok(best)
}

/// Branch and bound over the complete graph weighted by intersection sizes.
/// Splits the root across the rayon pool when it has more than one thread;
/// the result does not depend on the thread count.
pub fn min_pairsum_branch_and_bound(family: &Family, ell: u32) -> Result<MinPairSum> {
    check_min_args(family, ell)?;
    let masks: Vec<u128> = family.members().iter().map(|m| m.bits()).collect();
    let search = TupleSearch::new(&masks).with_pair_bound(choose2(ell as i64) as usize);
    let parallel = rayon::current_num_threads() > 1;
    let (found, _nodes) = search.minimize(&[], ell as usize, parallel);
    let (value, witness) = found.expect("family has at least ell members");
    Ok(MinPairSum { value, witness })
}

/// Minimum pair-sum without the lexicographic witness, which is the
/// expensive part on large families.
pub fn min_pairsum_value(family: &Family, ell: u32) -> Result<i64> {
    check_min_args(family, ell)?;
    if binomial(family.len() as u64, ell as i64) <= EXHAUSTIVE_LIMIT.into() {
        return Ok(min_pairsum_exhaustive(family, ell)?.value);
    }
    let masks: Vec<u128> = family.members().iter().map(|m| m.bits()).collect();
    let search = TupleSearch::new(&masks).with_pair_bound(choose2(ell as i64) as usize);
    let parallel = rayon::current_num_threads() > 1;
    let (found, _nodes) = search.min_value(&[], ell as usize, parallel);
    Ok(found.expect("family has at least ell members").0)
}

/// Lexicographically least pair with the smallest intersection.
fn min_pair(family: &Family) -> Option<(i64, usize, usize)> {
    let sets = family.members();
    let mut best: Option<(i64, usize, usize)> = None;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let w = sets[i].intersection_size(sets[j]) as i64;
            if best.is_none_or(|b| w < b.0) {
                best = Some((w, i, j));
            }
        }
    }
    best
}

/// Decides whether `family` satisfies `spec`, returning the minimizing
/// subfamily as a [`Violation`] when it does not.
pub fn check_condition(family: &Family, spec: &ConditionSpec) -> Result<CheckOutcome> {
    let threshold = spec.threshold();
    if threshold <= 0 || family.len() < spec.ell() as usize {
        return Ok(CheckOutcome::Satisfied {
            min_pairsum: None,
            threshold,
        });
    }
    let (value, witness) = if spec.variant() == Variant::Pairwise {
        let (w, i, j) = min_pair(family).expect("at least two members");
        (w, vec![i, j])
    } else {
        let value = min_pairsum_value(family, spec.ell())?;
        if value >= threshold {
            return Ok(CheckOutcome::Satisfied {
                min_pairsum: Some(value),
                threshold,
            });
        }
        let r = min_pairsum(family, spec.ell())?;
        (r.value, r.witness)
    };
    if value >= threshold {
        Ok(CheckOutcome::Satisfied {
            min_pairsum: Some(value),
            threshold,
        })
    } else {
        Ok(CheckOutcome::Violated(Violation {
            indices: witness,
            pair_sum: value,
            threshold,
        }))
    }
}
