//! Branch-and-bound search for light ℓ-tuples.
//!
//! The weight of a tuple of sets is the sum of its pairwise intersection
//! sizes. Written per element, that is `Σ_e C(d_e, 2)` where `d_e` counts the
//! tuple members containing `e`, which gives a second lower bound besides the
//! additive one on candidate costs.
//!
//! Tuples are always explored in ascending index order, so the first tuple
//! accepted at the final target value is the lexicographically least one.

use std::sync::atomic::{AtomicI64, Ordering};

use rayon::prelude::*;

use crate::orbits::orbit_lower_bound;
use crate::setcore::choose2;

const NO_TARGET: i64 = i64::MAX;

/// Levels tried upward from the root bound before falling back to a plain
/// descent from the greedy value.
const DEEPENING_LEVELS: i64 = 6;

/// A pool of equal-size sets to draw tuple members from.
pub(crate) struct TupleSearch<'a> {
    masks: &'a [u128],
    k: u32,
    /// `pair_prefix[q]` = sum of the `q` smallest pairwise weights in the pool.
    pair_prefix: Vec<i64>,
}

/// Best tuple found: weight and indices into the pool.
pub(crate) type Found = (i64, Vec<usize>);

enum Mode<'f> {
    Minimize,
    First,
    All(&'f mut dyn FnMut(i64, &[usize]) -> bool),
}

impl<'a> TupleSearch<'a> {
    pub fn new(masks: &'a [u128]) -> Self {
        let k = masks.first().map_or(0, |m| m.count_ones());
        debug_assert!(masks.iter().all(|m| m.count_ones() == k));
        TupleSearch {
            masks,
            k,
            pair_prefix: vec![0],
        }
    }

    /// Precomputes the `max_pairs` globally smallest pair weights for use as
    /// the bound on pairs among members not yet chosen. Costs `O(m²)`.
    pub fn with_pair_bound(mut self, max_pairs: usize) -> Self {
        if max_pairs == 0 || self.masks.len() < 2 {
            return self;
        }
        let mut hist = vec![0u64; self.k as usize + 1];
        for (i, &a) in self.masks.iter().enumerate() {
            for &b in &self.masks[i + 1..] {
                hist[(a & b).count_ones() as usize] += 1;
            }
        }
        let mut prefix = Vec::with_capacity(max_pairs + 1);
        prefix.push(0);
        let mut acc = 0i64;
        'outer: for (w, &count) in hist.iter().enumerate() {
            for _ in 0..count {
                if prefix.len() > max_pairs {
                    break 'outer;
                }
                acc += w as i64;
                prefix.push(acc);
            }
        }
        self.pair_prefix = prefix;
        self
    }

    /// Lexicographically least tuple of `need` pool members of minimum total
    /// weight together with the fixed `base` sets. `None` when the pool has
    /// fewer than `need` members.
    ///
    /// The minimum is found first in a heuristic order; the witness is then
    /// the first tuple in index order at that weight.
    pub fn minimize(&self, base: &[u128], need: usize, parallel: bool) -> (Option<Found>, u64) {
        let (value, mut nodes) = self.min_value(base, need, parallel);
        let Some((value, _)) = value else {
            return (None, nodes);
        };
        let cands = self.candidates(base);
        let parallel = parallel && cands.len() >= 64 && need >= 2;
        let (found, n) = self.first_at_most(base, need, value, &cands, parallel);
        nodes += n;
        debug_assert_eq!(found.as_ref().map(|f| f.0), Some(value));
        (found, nodes)
    }

    /// Minimum weight together with some tuple attaining it.
    pub fn min_value(&self, base: &[u128], need: usize, parallel: bool) -> (Option<Found>, u64) {
        if self.masks.len() < need {
            return (None, 0);
        }
        if need == 0 {
            return (Some((self.base_weight(base), Vec::new())), 1);
        }
        // light rows first: good tuples turn up early
        let base_cost = |c: u128| {
            base.iter()
                .map(|&b| (b & c).count_ones() as i64)
                .sum::<i64>()
        };
        let m = self.masks.len() as i64;
        let mut order: Vec<(i64, usize)> = self
            .masks
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let row: i64 = self
                    .masks
                    .iter()
                    .map(|&c| (a & c).count_ones() as i64)
                    .sum();
                (row + base_cost(a) * m, i)
            })
            .collect();
        order.sort_unstable();
        let masks: Vec<u128> = order.iter().map(|&(_, i)| self.masks[i]).collect();
        let sorted = TupleSearch {
            masks: &masks,
            k: self.k,
            pair_prefix: self.pair_prefix.clone(),
        };
        let floor = match base {
            [] => orbit_lower_bound(self.masks, need, sorted.greedy_upper_bound(base, need)),
            _ => None,
        };
        let (found, nodes) = sorted.min_value_in_order(base, need, floor.unwrap_or(0), parallel);
        let found = found.map(|(value, tuple)| {
            let mut original: Vec<usize> = tuple.iter().map(|&p| order[p].1).collect();
            original.sort_unstable();
            (value, original)
        });
        (found, nodes)
    }

    fn candidates(&self, base: &[u128]) -> Vec<(u32, i32)> {
        Run::new(self, base, 0, Mode::Minimize, NO_TARGET).initial_candidates(base)
    }

    /// Deepens from the root bound: the first level admitting a tuple is the
    /// minimum. A failed level is a proof with the tightest target, far
    /// cheaper than descending from the greedy value when the two are
    /// close; for wide gaps the descent takes over.
    fn min_value_in_order(
        &self,
        base: &[u128],
        need: usize,
        floor: i64,
        parallel: bool,
    ) -> (Option<Found>, u64) {
        let upper = self.greedy_upper_bound(base, need);
        let cands = self.candidates(base);
        let psum = self.base_weight(base);
        let parallel = parallel && cands.len() >= 64 && need >= 2;
        let lower = Run::new(self, base, need, Mode::Minimize, NO_TARGET)
            .lower_bound(psum, &cands, need)
            .max(floor);
        let mut nodes = 1;
        let last_level = upper.min(lower.saturating_add(DEEPENING_LEVELS));
        for level in lower..=last_level {
            let (found, n) = self.first_at_most(base, need, level, &cands, parallel);
            nodes += n;
            if found.is_some() {
                return (found, nodes);
            }
        }
        assert!(last_level < upper, "the greedy tuple has weight {upper}");

        if !parallel {
            let mut run = Run::new(self, base, need, Mode::Minimize, upper);
            run.dfs(psum, &cands, need, 0);
            return (run.found, nodes + run.nodes);
        }
        // Split at the root: each branch fixes its first member and the
        // branches share the best weight seen so far.
        let shared = AtomicI64::new(upper);
        let results: Vec<(Option<Found>, u64)> = (0..=cands.len() - need)
            .into_par_iter()
            .map(|pos| {
                let mut branch_run = Run::new(self, base, need, Mode::Minimize, upper);
                branch_run.shared = Some(&shared);
                branch_run.branch(psum, &cands, pos, need, 0);
                (branch_run.found, branch_run.nodes)
            })
            .collect();
        nodes += results.iter().map(|r| r.1).sum::<u64>();
        let best = results.into_iter().filter_map(|r| r.0).min();
        (best, nodes)
    }

    /// First tuple in index order of weight at most `level`.
    fn first_at_most(
        &self,
        base: &[u128],
        need: usize,
        level: i64,
        cands: &[(u32, i32)],
        parallel: bool,
    ) -> (Option<Found>, u64) {
        let psum = self.base_weight(base);
        if !parallel {
            let mut run = Run::new(self, base, need, Mode::First, level);
            run.dfs(psum, cands, need, 0);
            return (run.found, run.nodes);
        }
        let nodes = std::sync::atomic::AtomicU64::new(0);
        let found = (0..=cands.len() - need)
            .into_par_iter()
            .find_map_first(|pos| {
                let mut run = Run::new(self, base, need, Mode::First, level);
                run.branch(psum, cands, pos, need, 0);
                nodes.fetch_add(run.nodes, Ordering::Relaxed);
                run.found
            });
        (found, nodes.into_inner())
    }

    fn base_weight(&self, base: &[u128]) -> i64 {
        (0..base.len())
            .flat_map(|i| (i + 1..base.len()).map(move |j| (i, j)))
            .map(|(i, j)| (base[i] & base[j]).count_ones() as i64)
            .sum()
    }

    /// First tuple (in index order) whose weight with `base` is below `limit`.
    pub fn find_below(&self, base: &[u128], need: usize, limit: i64) -> Option<Found> {
        if self.masks.len() < need {
            return None;
        }
        let mut run = Run::new(self, base, need, Mode::First, limit - 1);
        let cands = run.initial_candidates(base);
        run.dfs(run.base_sum, &cands, need, 0);
        run.found
    }

    /// Calls `visit` on every tuple whose weight with `base` is below `limit`,
    /// in lexicographic order, until it returns `false`.
    pub fn for_each_below(
        &self,
        base: &[u128],
        need: usize,
        limit: i64,
        visit: &mut dyn FnMut(i64, &[usize]) -> bool,
    ) {
        if self.masks.len() < need {
            return;
        }
        let mut run = Run::new(self, base, need, Mode::All(visit), limit - 1);
        let cands = run.initial_candidates(base);
        run.dfs(run.base_sum, &cands, need, 0);
    }

    fn pair_bound(&self, pairs: usize) -> i64 {
        let last = self.pair_prefix.len() - 1;
        self.pair_prefix[pairs.min(last)]
    }

    /// Weight of a greedily built tuple: a valid starting upper bound.
    fn greedy_upper_bound(&self, base: &[u128], need: usize) -> i64 {
        let m = self.masks.len();
        let w = |a: u128, b: u128| (a & b).count_ones() as i64;
        let base_sum: i64 = (0..base.len())
            .flat_map(|i| (i + 1..base.len()).map(move |j| (i, j)))
            .map(|(i, j)| w(base[i], base[j]))
            .sum();
        let base_cost: Vec<i64> = self
            .masks
            .iter()
            .map(|&c| base.iter().map(|&b| w(b, c)).sum())
            .collect();
        if need == 0 {
            return base_sum;
        }
        let mut order: Vec<(i64, usize)> = (0..m)
            .map(|i| {
                let row: i64 = self.masks.iter().map(|&c| w(self.masks[i], c)).sum();
                (row + base_cost[i] * m as i64, i)
            })
            .collect();
        order.sort_unstable();

        let mut best = NO_TARGET;
        let mut cost = vec![0i64; m];
        let mut used = vec![false; m];
        for &(_, start) in order.iter().take(8) {
            cost.copy_from_slice(&base_cost);
            used.iter_mut().for_each(|u| *u = false);
            let mut total = base_sum;
            let mut pick = start;
            for step in 0..need {
                if step > 0 {
                    pick = match (0..m).filter(|&j| !used[j]).min_by_key(|&j| (cost[j], j)) {
                        Some(j) => j,
                        None => break,
                    };
                }
                used[pick] = true;
                total += cost[pick];
                let pm = self.masks[pick];
                for (j, c) in cost.iter_mut().enumerate() {
                    *c += w(pm, self.masks[j]);
                }
            }
            best = best.min(total);
        }
        best
    }
}

struct Run<'s, 'a, 'f> {
    search: &'s TupleSearch<'a>,
    mode: Mode<'f>,
    target: i64,
    shared: Option<&'s AtomicI64>,
    found: Option<Found>,
    stop: bool,
    partial: Vec<usize>,
    degree: [u8; 128],
    base_sum: i64,
    buffers: Vec<Vec<(u32, i32)>>,
    nodes: u64,
}

impl<'s, 'a, 'f> Run<'s, 'a, 'f> {
    fn new(
        search: &'s TupleSearch<'a>,
        base: &[u128],
        need: usize,
        mode: Mode<'f>,
        target: i64,
    ) -> Self {
        let mut degree = [0u8; 128];
        for &b in base {
            add_degrees(&mut degree, b, 1);
        }
        let base_sum = degree.iter().map(|&d| choose2(d as i64)).sum();
        Run {
            search,
            mode,
            target,
            shared: None,
            found: None,
            stop: false,
            partial: Vec::with_capacity(need),
            degree,
            base_sum,
            buffers: vec![Vec::new(); need + 1],
            nodes: 0,
        }
    }

    fn initial_candidates(&self, base: &[u128]) -> Vec<(u32, i32)> {
        self.search
            .masks
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let cost: u32 = base.iter().map(|&b| (b & c).count_ones()).sum();
                (i as u32, cost as i32)
            })
            .collect()
    }

    #[inline]
    fn target(&self) -> i64 {
        match self.shared {
            Some(s) => self.target.min(s.load(Ordering::Relaxed)),
            None => self.target,
        }
    }

    fn accept(&mut self, value: i64) {
        if value > self.target() {
            return;
        }
        match &mut self.mode {
            Mode::Minimize => {
                self.found = Some((value, self.partial.clone()));
                self.target = value - 1;
                if let Some(s) = self.shared {
                    s.fetch_min(value, Ordering::Relaxed);
                }
            }
            Mode::First => {
                self.found = Some((value, self.partial.clone()));
                self.stop = true;
            }
            Mode::All(visit) => {
                if !visit(value, &self.partial) {
                    self.stop = true;
                }
            }
        }
    }

    fn dfs(&mut self, psum: i64, cands: &[(u32, i32)], need: usize, depth: usize) {
        self.nodes += 1;
        if need == 0 {
            self.accept(psum);
            return;
        }
        if cands.len() < need || self.lower_bound(psum, cands, need) > self.target() {
            return;
        }
        for pos in 0..=cands.len() - need {
            self.branch(psum, cands, pos, need, depth);
            if self.stop {
                return;
            }
        }
    }

    /// Fixes `cands[pos]` as the next member and recurses on the candidates
    /// after it that still fit under the target.
    fn branch(&mut self, psum: i64, cands: &[(u32, i32)], pos: usize, need: usize, depth: usize) {
        let (c, cost) = cands[pos];
        let c = c as usize;
        let next_sum = psum + cost as i64;
        let rest = need - 1;
        let slack =
            self.target() - next_sum - self.search.pair_bound(choose2(rest as i64) as usize);
        if slack < 0 {
            return;
        }
        let cmask = self.search.masks[c];
        self.partial.push(c);
        if rest == 0 {
            self.nodes += 1;
            self.accept(next_sum);
        } else {
            let mut buf = std::mem::take(&mut self.buffers[depth]);
            buf.clear();
            for &(d, dc) in &cands[pos + 1..] {
                let nd = dc + (cmask & self.search.masks[d as usize]).count_ones() as i32;
                if nd as i64 <= slack {
                    buf.push((d, nd));
                }
            }
            if buf.len() >= rest {
                add_degrees(&mut self.degree, cmask, 1);
                self.dfs(next_sum, &buf, rest, depth + 1);
                add_degrees(&mut self.degree, cmask, -1);
            }
            self.buffers[depth] = buf;
        }
        self.partial.pop();
    }

    /// Max of the additive-cost bound and the element-degree bound.
    fn lower_bound(&self, psum: i64, cands: &[(u32, i32)], need: usize) -> i64 {
        let mut smallest = [i32::MAX; 64];
        let keep = need.min(64);
        for &(_, cost) in cands {
            if cost < smallest[keep - 1] {
                let mut i = keep - 1;
                while i > 0 && smallest[i - 1] > cost {
                    smallest[i] = smallest[i - 1];
                    i -= 1;
                }
                smallest[i] = cost;
            }
        }
        let additive: i64 = psum
            + smallest[..keep].iter().map(|&c| c as i64).sum::<i64>()
            + self.search.pair_bound(choose2(need as i64) as usize);
        if additive > self.target() {
            return additive;
        }

        // Every remaining member contains `forced` and spends its other
        // elements inside `free`; element `e` gaining its j-th extra member
        // costs `d_e + j - 1` more.
        let (mut forced, mut union) = (u128::MAX, 0u128);
        for &(d, _) in cands {
            let m = self.search.masks[d as usize];
            forced &= m;
            union |= m;
        }
        let free = union & !forced;
        let mut degree_bound = psum;
        let mut bits = forced;
        while bits != 0 {
            let e = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let d = self.degree[e] as i64;
            degree_bound += choose2(d + need as i64) - choose2(d);
        }
        let per_member = self.search.k as usize - forced.count_ones() as usize;
        let mut remaining = (need * per_member) as u64;
        if remaining > 0 {
            let mut hist = [0u64; 256];
            let mut bits = free;
            while bits != 0 {
                let e = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let d = self.degree[e] as usize;
                for j in 0..need {
                    hist[(d + j).min(255)] += 1;
                }
            }
            for (v, &count) in hist.iter().enumerate() {
                let take = count.min(remaining);
                degree_bound += v as i64 * take as i64;
                remaining -= take;
                if remaining == 0 {
                    break;
                }
            }
        }
        additive.max(degree_bound)
    }
}

fn add_degrees(degree: &mut [u8; 128], mask: u128, delta: i8) {
    let mut bits = mask;
    while bits != 0 {
        let e = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        degree[e] = degree[e].wrapping_add_signed(delta);
    }
}
