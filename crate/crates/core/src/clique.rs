//! Maximum clique by branch and bound with greedy-colouring bounds.
//!
//! Vertices are expanded in ascending index order, so among cliques of the
//! final size the lexicographically least one is reported.

use std::time::Instant;

/// Dense bitset over `0..len`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitset {
    words: Vec<u64>,
}

impl Bitset {
    pub fn new(len: usize) -> Self {
        Bitset {
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut b = Bitset::new(len);
        for i in 0..len {
            b.insert(i);
        }
        b
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn and_with(&self, other: &Bitset) -> Bitset {
        Bitset {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn and_not_assign(&mut self, other: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + tz)
            })
        })
    }
}

/// Undirected simple graph as adjacency bitsets.
#[derive(Clone, Debug)]
pub struct Graph {
    adj: Vec<Bitset>,
}

impl Graph {
    pub fn from_fn(n: usize, mut edge: impl FnMut(usize, usize) -> bool) -> Self {
        let mut adj = vec![Bitset::new(n); n];
        for i in 0..n {
            for j in i + 1..n {
                if edge(i, j) {
                    adj[i].insert(j);
                    adj[j].insert(i);
                }
            }
        }
        Graph { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbours(&self, v: usize) -> &Bitset {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(b)
    }

    /// Number of colour classes in a greedy colouring of `cand`; an upper
    /// bound on the clique number of the induced subgraph.
    pub fn colour_bound(&self, cand: &Bitset) -> usize {
        let mut uncoloured = cand.clone();
        let mut colours = 0;
        while !uncoloured.is_empty() {
            colours += 1;
            let mut q = uncoloured.clone();
            while let Some(v) = q.first() {
                q.remove(v);
                uncoloured.remove(v);
                q.and_not_assign(&self.adj[v]);
            }
        }
        colours
    }

    /// Greedy clique over ascending indices: a quick lower bound.
    pub fn greedy_clique(&self) -> Vec<usize> {
        let mut cand = Bitset::full(self.len());
        let mut clique = Vec::new();
        while let Some(v) = cand.first() {
            clique.push(v);
            cand = cand.and_with(&self.adj[v]);
        }
        clique
    }
}

/// Optional budget on a search.
#[derive(Clone, Copy, Debug, Default)]
pub struct Limits {
    pub deadline: Option<Instant>,
    pub node_cap: Option<u64>,
}

impl Limits {
    pub fn none() -> Self {
        Limits::default()
    }

    pub(crate) fn exceeded(&self, nodes: u64) -> bool {
        if self.node_cap.is_some_and(|cap| nodes > cap) {
            return true;
        }
        // the clock is only read every 1024 nodes
        nodes.is_multiple_of(1024) && self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

#[derive(Clone, Debug, Default)]
pub struct CliqueQuery {
    /// Only cliques of at least this size are reported.
    pub target: usize,
    /// Stop at the first clique reaching `target`.
    pub stop_at_target: bool,
    /// Vertices every reported clique must contain (must be a clique).
    pub forced: Vec<usize>,
    pub limits: Limits,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueOutcome {
    /// Best clique found with size >= the query target, if any.
    pub best: Option<Vec<usize>>,
    /// The search ran to completion.
    pub complete: bool,
    /// Upper bound over branches left unexplored when a limit hit.
    pub open_bound: usize,
    pub nodes: u64,
}

struct CliqueRun<'g> {
    graph: &'g Graph,
    target: usize,
    stop_at_target: bool,
    limits: Limits,
    clique: Vec<usize>,
    best: Option<Vec<usize>>,
    stop: bool,
    aborted: bool,
    open_bound: usize,
    nodes: u64,
}

impl CliqueRun<'_> {
    fn expand(&mut self, mut cand: Bitset) {
        self.nodes += 1;
        if self.limits.exceeded(self.nodes) {
            self.aborted = true;
            self.open_bound = self
                .open_bound
                .max(self.clique.len() + self.graph.colour_bound(&cand));
            return;
        }
        if self.clique.len() >= self.target {
            self.best = Some(self.clique.clone());
            self.target = self.clique.len() + 1;
            if self.stop_at_target {
                self.stop = true;
                return;
            }
        }
        if cand.is_empty() || self.clique.len() + self.graph.colour_bound(&cand) < self.target {
            return;
        }
        while let Some(v) = cand.first() {
            if self.clique.len() + cand.count() < self.target {
                return;
            }
            cand.remove(v);
            let next = cand.and_with(self.graph.neighbours(v));
            self.clique.push(v);
            self.expand(next);
            self.clique.pop();
            if self.stop {
                return;
            }
            if self.aborted {
                // `v` is done; the rest of `cand` was never explored
                self.open_bound = self.open_bound.max(self.clique.len() + cand.count());
                return;
            }
        }
    }
}

/// Runs the clique search described by `query`.
pub fn max_clique(graph: &Graph, query: &CliqueQuery) -> CliqueOutcome {
    let mut cand = Bitset::full(graph.len());
    for &f in &query.forced {
        cand = cand.and_with(graph.neighbours(f));
    }
    let mut run = CliqueRun {
        graph,
        target: query.target,
        stop_at_target: query.stop_at_target,
        limits: query.limits,
        clique: query.forced.clone(),
        best: None,
        stop: false,
        aborted: false,
        open_bound: 0,
        nodes: 0,
    };
    run.expand(cand);
    CliqueOutcome {
        best: run.best.map(|mut b| {
            b.sort_unstable();
            b
        }),
        complete: !run.aborted,
        open_bound: run.open_bound,
        nodes: run.nodes,
    }
}
