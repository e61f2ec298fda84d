//! Exact maximum-family search.
//!
//! Candidates are all k-subsets of `[n]` in lexicographic order. The solver
//! decides each candidate in turn (take it, then skip it), keeping only the
//! candidates that are still individually compatible with what was taken.
//! The condition is hereditary, so a candidate only has to be checked
//! against tuples through itself, and a skipped candidate stays skipped.
//!
//! Families are found in lexicographic order, ties included, so the result
//! is the lexicographically least maximum family whenever the search
//! completes.

mod export;

use std::time::{Duration, Instant};

use serde::Serialize;

pub use export::{bad_tuples, export_cnf, export_ilp};

use crate::clique::{max_clique, CliqueQuery, Graph, Limits};
use crate::conditions::{check_condition, ConditionSpec};
use crate::error::{Error, Result};
use crate::setcore::{enumerate_ksets, Family, GroundParams, KSet, DEFAULT_ENUMERATION_CAP};
use crate::tuples::TupleSearch;

pub const DEFAULT_EXHAUSTIVE_THRESHOLD: u64 = 24;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    #[default]
    None,
    /// Force `[k]` into the family. Every nonempty feasible family can be
    /// relabelled to contain it, and the lexicographically least maximum
    /// family always does, so the result is unchanged.
    ElementOrder,
}

impl std::str::FromStr for Symmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Symmetry::None),
            "element-order" => Ok(Symmetry::ElementOrder),
            other => Err(Error::param(format!("unknown symmetry `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Wall-clock budget in seconds; 0 means none.
    pub time_limit: f64,
    /// A feasible family to start from; the result is at least as large.
    pub incumbent: Option<Family>,
    pub node_cap: Option<u64>,
    pub symmetry: Symmetry,
    /// Enumerate every subfamily instead of branching. Only allowed when
    /// `C(n, k) <= exhaustive_threshold`.
    pub exhaustive: bool,
    pub exhaustive_threshold: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            time_limit: 0.0,
            incumbent: None,
            node_cap: None,
            symmetry: Symmetry::None,
            exhaustive: false,
            exhaustive_threshold: DEFAULT_EXHAUSTIVE_THRESHOLD,
        }
    }
}

impl SearchOptions {
    fn limits(&self, start: Instant) -> Limits {
        Limits {
            deadline: (self.time_limit > 0.0)
                .then(|| start + Duration::from_secs_f64(self.time_limit)),
            node_cap: self.node_cap,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub best: Family,
    pub size: usize,
    /// The search finished: no feasible family is larger than `best`.
    pub optimal: bool,
    pub nodes: u64,
    /// Seconds.
    pub elapsed: f64,
    /// Proven upper bound on the size of any feasible family.
    pub bound: u64,
}

/// Chosen members of a partial family, for incremental feasibility checks.
/// Intersections are read off the bitmasks directly.
#[derive(Clone, Debug)]
pub struct SearchState {
    spec: ConditionSpec,
    members: Vec<KSet>,
    masks: Vec<u128>,
}

impl SearchState {
    pub fn new(spec: ConditionSpec) -> Self {
        SearchState {
            spec,
            members: Vec::new(),
            masks: Vec::new(),
        }
    }

    pub fn members(&self) -> &[KSet] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Adds `candidate` when that keeps the state feasible.
    pub fn push(&mut self, candidate: KSet) -> bool {
        if self.members.contains(&candidate) || !incremental_feasible(self, candidate) {
            return false;
        }
        self.members.push(candidate);
        self.masks.push(candidate.bits());
        true
    }
}

/// Whether every ℓ-tuple made of `candidate` and `ℓ - 1` members of `state`
/// meets the threshold. Assumes the state itself is feasible.
pub fn incremental_feasible(state: &SearchState, candidate: KSet) -> bool {
    let need = state.spec.ell() as usize - 1;
    let threshold = state.spec.threshold();
    if threshold <= 0 || state.masks.len() < need {
        return true;
    }
    TupleSearch::new(&state.masks)
        .find_below(&[candidate.bits()], need, threshold)
        .is_none()
}

/// Largest family of k-subsets of `[n]` satisfying `spec`.
pub fn max_family(
    params: GroundParams,
    spec: &ConditionSpec,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    let start = Instant::now();
    let universe = params.universe_size();
    if opts.exhaustive && universe > opts.exhaustive_threshold.into() {
        return Err(Error::CapExceeded {
            what: "exhaustive search",
            required: universe,
            cap: opts.exhaustive_threshold,
        });
    }
    let candidates = enumerate_ksets(params, DEFAULT_ENUMERATION_CAP)?;
    if let Some(inc) = &opts.incumbent {
        if inc.params() != params {
            return Err(Error::param(format!(
                "incumbent is over (n = {}, k = {}), expected (n = {}, k = {})",
                inc.params().n(),
                inc.params().k(),
                params.n(),
                params.k()
            )));
        }
        if let Some(v) = check_condition(inc, spec)?.violation() {
            return Err(Error::param(format!(
                "incumbent is infeasible: members {:?} have pair-sum {} < {}",
                v.indices, v.pair_sum, v.threshold
            )));
        }
    }

    let n_cand = candidates.len() as u64;
    let threshold = spec.threshold();
    let (chosen, optimal, nodes, open_bound) = if threshold <= 0 {
        ((0..candidates.len()).collect(), true, 1, n_cand)
    } else if opts.exhaustive {
        let (chosen, nodes) = exhaustive(&candidates, spec);
        (chosen, true, nodes, 0)
    } else if spec.ell() == 2 {
        pairwise_search(&candidates, spec, opts, start)
    } else {
        let mut run = Branching::new(&candidates, spec, opts, start);
        run.solve();
        (run.best, !run.aborted, run.nodes, run.open_bound)
    };

    let mut best = Family::from_valid(params, chosen.iter().map(|&i| candidates[i]).collect());
    if let Some(inc) = &opts.incumbent {
        if inc.len() > best.len() {
            best = inc.clone();
        }
    }
    let size = best.len();
    let bound = if optimal {
        size as u64
    } else {
        open_bound.max(size as u64)
    };
    debug_assert!(check_condition(&best, spec)
        .map(|o| o.is_satisfied())
        .unwrap_or(false));
    Ok(SearchResult {
        best,
        size,
        optimal,
        nodes,
        elapsed: start.elapsed().as_secs_f64(),
        bound,
    })
}

fn forced_start(opts: &SearchOptions) -> Vec<usize> {
    match opts.symmetry {
        Symmetry::None => Vec::new(),
        Symmetry::ElementOrder => vec![0],
    }
}

fn initial_target(opts: &SearchOptions) -> usize {
    opts.incumbent.as_ref().map_or(0, Family::len)
}

/// `ℓ = 2`: feasible families are the cliques of the compatibility graph.
fn pairwise_search(
    candidates: &[KSet],
    spec: &ConditionSpec,
    opts: &SearchOptions,
    start: Instant,
) -> (Vec<usize>, bool, u64, u64) {
    let threshold = spec.threshold() as u32;
    let graph = Graph::from_fn(candidates.len(), |i, j| {
        candidates[i].intersection_size(candidates[j]) >= threshold
    });
    let out = max_clique(
        &graph,
        &CliqueQuery {
            target: initial_target(opts),
            stop_at_target: false,
            forced: forced_start(opts),
            limits: opts.limits(start),
        },
    );
    (
        out.best.unwrap_or_default(),
        out.complete,
        out.nodes,
        out.open_bound as u64,
    )
}

struct Branching<'c> {
    candidates: &'c [KSet],
    masks: Vec<u128>,
    ell: usize,
    threshold: i64,
    limits: Limits,
    forced: Vec<usize>,
    target: usize,
    chosen: Vec<usize>,
    best: Vec<usize>,
    aborted: bool,
    open_bound: u64,
    nodes: u64,
}

impl<'c> Branching<'c> {
    fn new(
        candidates: &'c [KSet],
        spec: &ConditionSpec,
        opts: &SearchOptions,
        start: Instant,
    ) -> Self {
        Branching {
            candidates,
            masks: candidates.iter().map(|c| c.bits()).collect(),
            ell: spec.ell() as usize,
            threshold: spec.threshold(),
            limits: opts.limits(start),
            forced: forced_start(opts),
            target: initial_target(opts),
            chosen: Vec::new(),
            best: Vec::new(),
            aborted: false,
            open_bound: 0,
            nodes: 0,
        }
    }

    fn solve(&mut self) {
        let all: Vec<usize> = (0..self.candidates.len()).collect();
        match self.forced.first().copied() {
            None => self.expand(all),
            Some(f) => {
                self.chosen.push(f);
                let rest = self.compatible(f, &all[f + 1..]);
                self.expand(rest);
            }
        }
    }

    /// Candidates from `pool` still compatible once `c` joins `chosen`
    /// (`c` is already the last entry of `chosen`).
    fn compatible(&self, c: usize, pool: &[usize]) -> Vec<usize> {
        let prev: Vec<u128> = self.chosen[..self.chosen.len() - 1]
            .iter()
            .map(|&i| self.masks[i])
            .collect();
        let need = self.ell - 2;
        let cm = self.masks[c];
        if prev.len() < need {
            return pool.to_vec();
        }
        let w = |a: u128, b: u128| (a & b).count_ones() as i64;
        if need == 1 {
            let via: Vec<i64> = prev.iter().map(|&x| w(x, cm)).collect();
            return pool
                .iter()
                .copied()
                .filter(|&d| {
                    let dm = self.masks[d];
                    let base = w(cm, dm);
                    prev.iter()
                        .zip(&via)
                        .all(|(&x, &v)| base + v + w(x, dm) >= self.threshold)
                })
                .collect();
        }
        let search = TupleSearch::new(&prev);
        pool.iter()
            .copied()
            .filter(|&d| {
                search
                    .find_below(&[cm, self.masks[d]], need, self.threshold)
                    .is_none()
            })
            .collect()
    }

    fn expand(&mut self, cands: Vec<usize>) {
        self.nodes += 1;
        if self.limits.exceeded(self.nodes) {
            self.aborted = true;
            self.open_bound = self
                .open_bound
                .max((self.chosen.len() + cands.len()) as u64);
            return;
        }
        if self.chosen.len() >= self.target {
            self.best = self.chosen.clone();
            self.target = self.chosen.len() + 1;
        }
        for (i, &c) in cands.iter().enumerate() {
            if self.chosen.len() + cands.len() - i < self.target {
                return;
            }
            self.chosen.push(c);
            let next = self.compatible(c, &cands[i + 1..]);
            self.expand(next);
            self.chosen.pop();
            if self.aborted {
                // `c` was taken and skipped; the rest is unexplored
                self.open_bound = self
                    .open_bound
                    .max((self.chosen.len() + cands.len() - i - 1) as u64);
                return;
            }
        }
    }
}

/// Every subfamily by bitmask, with feasibility propagated from the mask
/// minus its top member. Returns the lexicographically least largest one.
fn exhaustive(candidates: &[KSet], spec: &ConditionSpec) -> (Vec<usize>, u64) {
    let n = candidates.len();
    assert!(n < 32);
    let total = 1usize << n;
    let mut feasible = vec![false; total];
    feasible[0] = true;
    let need = spec.ell() as usize - 1;
    let threshold = spec.threshold();
    let mut best = 0usize;
    for mask in 1..total {
        let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
        let rest = mask ^ (1 << top);
        if !feasible[rest] {
            continue;
        }
        let pool: Vec<u128> = (0..top)
            .filter(|&i| rest >> i & 1 == 1)
            .map(|i| candidates[i].bits())
            .collect();
        let ok = TupleSearch::new(&pool)
            .find_below(&[candidates[top].bits()], need, threshold)
            .is_none();
        feasible[mask] = ok;
        if ok && better(mask, best) {
            best = mask;
        }
    }
    (
        (0..n).filter(|&i| best >> i & 1 == 1).collect(),
        total as u64,
    )
}

/// Larger, or equally large and lexicographically smaller as a family.
fn better(a: usize, b: usize) -> bool {
    match a.count_ones().cmp(&b.count_ones()) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            let diff = a ^ b;
            diff != 0 && a & (diff & diff.wrapping_neg()) != 0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::Variant;
    use crate::constructions::construct_thm6;

    fn spec(t: u32, ell: u32, v: Variant) -> ConditionSpec {
        ConditionSpec::new(t, ell, v, 0).unwrap()
    }

    #[test]
    fn ekr_at_n_equals_2k() {
        let r = max_family(
            GroundParams::new(6, 3).unwrap(),
            &ConditionSpec::pairwise(1).unwrap(),
            &SearchOptions::default(),
        )
        .unwrap();
        assert_eq!((r.size, r.optimal, r.bound), (10, true, 10));
        assert!(
            check_condition(&r.best, &ConditionSpec::pairwise(1).unwrap())
                .unwrap()
                .is_satisfied()
        );
    }

    #[test]
    fn vacuous_threshold_takes_everything() {
        let s = ConditionSpec::new(1, 3, Variant::Eq10, 1).unwrap();
        assert_eq!(s.threshold(), 0);
        let r = max_family(
            GroundParams::new(7, 3).unwrap(),
            &s,
            &SearchOptions::default(),
        )
        .unwrap();
        assert_eq!((r.size, r.optimal), (35, true));
    }

    #[test]
    fn incumbent_is_kept_or_beaten() {
        let p = GroundParams::new(7, 3).unwrap();
        let s = spec(1, 3, Variant::Eq4);
        let inc = construct_thm6(7, 3, 1, 3).unwrap();
        assert_eq!(inc.len(), 25);
        let r = max_family(
            p,
            &s,
            &SearchOptions {
                incumbent: Some(inc),
                ..Default::default()
            },
        )
        .unwrap();
        // three pairwise disjoint triples need 9 points, so nothing is excluded
        assert_eq!((r.size, r.optimal), (35, true));
    }

    #[test]
    fn infeasible_incumbent_is_rejected() {
        let p = GroundParams::new(6, 3).unwrap();
        let all = Family::new(p, enumerate_ksets(p, 100).unwrap()).unwrap();
        let err = max_family(
            p,
            &ConditionSpec::pairwise(1).unwrap(),
            &SearchOptions {
                incumbent: Some(all),
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(err.to_string().contains("infeasible"));
    }

    #[test]
    fn exhaustive_mode_is_gated_and_agrees() {
        let p = GroundParams::new(6, 3).unwrap();
        let s = spec(1, 3, Variant::Eq3);
        let ex = max_family(
            p,
            &s,
            &SearchOptions {
                exhaustive: true,
                ..Default::default()
            },
        )
        .unwrap();
        let bb = max_family(p, &s, &SearchOptions::default()).unwrap();
        assert_eq!(ex.best, bb.best);
        let big = GroundParams::new(7, 3).unwrap();
        let err = max_family(
            big,
            &s,
            &SearchOptions {
                exhaustive: true,
                ..Default::default()
            },
        );
        assert!(matches!(err, Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn symmetry_cut_keeps_the_result() {
        for (n, k, s) in [
            (6, 3, spec(1, 3, Variant::Eq3)),
            (6, 2, spec(2, 3, Variant::Eq4)),
            (5, 2, ConditionSpec::pairwise(1).unwrap()),
        ] {
            let p = GroundParams::new(n, k).unwrap();
            let plain = max_family(p, &s, &SearchOptions::default()).unwrap();
            let cut = max_family(
                p,
                &s,
                &SearchOptions {
                    symmetry: Symmetry::ElementOrder,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(plain.best, cut.best);
        }
    }

    #[test]
    fn node_cap_reports_a_bound() {
        let p = GroundParams::new(8, 3).unwrap();
        let s = spec(1, 3, Variant::Eq3);
        let r = max_family(
            p,
            &s,
            &SearchOptions {
                node_cap: Some(50),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!r.optimal);
        assert!(r.bound >= r.size as u64);
        let exact = max_family(p, &s, &SearchOptions::default()).unwrap();
        assert!(exact.optimal);
        assert!(r.bound >= exact.size as u64);
    }

    #[test]
    fn incremental_feasibility_examples() {
        let s = spec(1, 3, Variant::Eq4);
        let mut state = SearchState::new(s);
        assert!(incremental_feasible(&state, KSet::from_elements(&[1, 2])));
        assert!(state.push(KSet::from_elements(&[1, 2])));
        assert!(state.push(KSet::from_elements(&[3, 4])));
        assert!(!incremental_feasible(&state, KSet::from_elements(&[5, 6])));
        assert!(incremental_feasible(&state, KSet::from_elements(&[1, 5])));

        let family = construct_thm6(8, 3, 1, 3).unwrap();
        let mut state = SearchState::new(s);
        for &m in family.members() {
            assert!(state.push(m));
        }
        assert_eq!(state.len(), family.len());
    }

    #[test]
    fn better_orders_like_families() {
        // {0,1} beats {0,2}; both beat any single
        assert!(better(0b011, 0b101));
        assert!(!better(0b101, 0b011));
        assert!(better(0b110, 0b001));
        assert!(!better(0b011, 0b011));
    }
}
