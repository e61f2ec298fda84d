//! Lower bound on tuple weight from interchangeable elements.
//!
//! Two elements are twins when swapping them maps the pool onto itself.
//! Twins form classes, and a member is then described up to symmetry by how
//! many elements it takes from each class. For a fixed multiset of such
//! types the lightest arrangement spreads each class's incidences as evenly
//! as possible, which gives a bound that ignores only the requirement that
//! members be distinct.

use std::collections::{HashMap, HashSet};

use crate::setcore::choose2;

/// Pools with more classes than this have too little symmetry to help.
const MAX_CLASSES: usize = 24;
const MAX_TYPES: usize = 400;
const NODE_BUDGET: u64 = 2_000_000;

/// Lower bound on the weight of `need` distinct members of `masks`, or
/// `None` when the pool is not symmetric enough or the budget runs out.
/// Only bounds below `cutoff` are searched for.
pub(crate) fn orbit_lower_bound(masks: &[u128], need: usize, cutoff: i64) -> Option<i64> {
    if need < 2 || masks.len() < need {
        return None;
    }
    let classes = twin_classes(masks)?;
    let mut types: HashMap<Vec<u8>, u64> = HashMap::new();
    for &m in masks {
        let counts = classes
            .iter()
            .map(|&c| (m & c).count_ones() as u8)
            .collect();
        *types.entry(counts).or_default() += 1;
        if types.len() > MAX_TYPES {
            return None;
        }
    }
    let mut types: Vec<(Vec<u8>, u64)> = types.into_iter().collect();
    types.sort_unstable();
    let sizes: Vec<i64> = classes.iter().map(|c| c.count_ones() as i64).collect();
    let mut search = TypeSearch {
        types: &types,
        sizes: &sizes,
        totals: vec![0; sizes.len()],
        best: cutoff,
        nodes: 0,
    };
    search.dfs(0, need);
    (search.nodes <= NODE_BUDGET).then_some(search.best)
}

fn twin_classes(masks: &[u128]) -> Option<Vec<u128>> {
    let pool: HashSet<u128> = masks.iter().copied().collect();
    let union = masks.iter().fold(0u128, |a, &m| a | m);
    let mut classes: Vec<u128> = Vec::new();
    let mut bits = union;
    while bits != 0 {
        let e = bits.trailing_zeros();
        bits &= bits - 1;
        let twin = classes.iter().position(|&c| {
            let swap = (1u128 << c.trailing_zeros()) | (1u128 << e);
            masks
                .iter()
                .all(|&m| (m & swap).count_ones() != 1 || pool.contains(&(m ^ swap)))
        });
        match twin {
            Some(i) => classes[i] |= 1u128 << e,
            None if classes.len() == MAX_CLASSES => return None,
            None => classes.push(1u128 << e),
        }
    }
    Some(classes)
}

/// Least weight of `total` incidences spread over `size` elements.
fn spread(total: i64, size: i64) -> i64 {
    let (q, r) = (total / size, total % size);
    r * choose2(q + 1) + (size - r) * choose2(q)
}

struct TypeSearch<'a> {
    types: &'a [(Vec<u8>, u64)],
    sizes: &'a [i64],
    totals: Vec<i64>,
    best: i64,
    nodes: u64,
}

impl TypeSearch<'_> {
    fn cost(&self) -> i64 {
        self.totals
            .iter()
            .zip(self.sizes)
            .map(|(&a, &c)| spread(a, c))
            .sum()
    }

    // adding members never lowers the cost, so a partial cost is a bound
    fn dfs(&mut self, from: usize, need: usize) {
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            return;
        }
        let cost = self.cost();
        if cost >= self.best {
            return;
        }
        if need == 0 {
            self.best = cost;
            return;
        }
        for i in from..self.types.len() {
            let (counts, avail) = &self.types[i];
            let most = (*avail).min(need as u64) as usize;
            for used in 1..=most {
                for (a, &c) in self.totals.iter_mut().zip(counts) {
                    *a += c as i64;
                }
                self.dfs(i + 1, need - used);
            }
            for (a, &c) in self.totals.iter_mut().zip(counts) {
                *a -= most as i64 * c as i64;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setcore::{GroundParams, KSetIter};

    #[test]
    fn complete_layer_bound_is_exact() {
        // five 3-sets of [9]: 15 incidences over 9 elements, degrees 2,2,2,2,2,2,1,1,1
        let pool: Vec<u128> = KSetIter::new(GroundParams::new(9, 3).unwrap())
            .map(|s| s.bits())
            .collect();
        assert_eq!(twin_classes(&pool).unwrap().len(), 1);
        assert_eq!(orbit_lower_bound(&pool, 5, i64::MAX), Some(6));
        assert_eq!(orbit_lower_bound(&pool, 3, i64::MAX), Some(0));
    }

    #[test]
    fn path_has_no_twins() {
        let pool = [0b0011u128, 0b0110, 0b1100];
        let classes = twin_classes(&pool).unwrap();
        // the path's reflection moves two pairs at once; no single swap works
        assert_eq!(classes, vec![0b0001, 0b0010, 0b0100, 0b1000]);
        assert_eq!(orbit_lower_bound(&pool, 3, i64::MAX), Some(2));
    }

    fn brute_min(pool: &[u128], need: usize) -> i64 {
        let mut best = i64::MAX;
        let mut idx: Vec<usize> = (0..need).collect();
        loop {
            let mut w = 0i64;
            for a in 0..need {
                for b in a + 1..need {
                    w += (pool[idx[a]] & pool[idx[b]]).count_ones() as i64;
                }
            }
            best = best.min(w);
            let Some(r) = (0..need).rev().find(|&r| idx[r] < pool.len() - (need - r)) else {
                return best;
            };
            idx[r] += 1;
            for q in r + 1..need {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn bound_never_exceeds_minimum(seed in proptest::collection::vec(0usize..35, 3..14), need in 2usize..5) {
            let all: Vec<u128> = KSetIter::new(GroundParams::new(7, 3).unwrap()).map(|s| s.bits()).collect();
            let mut pool: Vec<u128> = seed.iter().map(|&i| all[i]).collect();
            pool.sort_unstable();
            pool.dedup();
            proptest::prop_assume!(pool.len() >= need);
            if let Some(b) = orbit_lower_bound(&pool, need, i64::MAX) {
                proptest::prop_assert!(b <= brute_min(&pool, need));
            }
        }
    }
}
