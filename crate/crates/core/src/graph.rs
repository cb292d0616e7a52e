//! Weighted co-authorship network.
//!
//! Nodes are authors; an undirected edge joins every pair of authors that
//! share a manuscript. Each manuscript with `A` authors adds `1 / (A - 1)` to
//! the weight of every pair on its byline, so prolific pairs grow strong ties
//! and large collaborations spread thin ones. Per-node outgoing probabilities
//! are the raw weights divided by the node's total weight.
//!
//! Storage is compressed sparse rows; every undirected edge appears once in
//! each endpoint's adjacency, sorted by neighbor id.

mod io;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorKey, Corpus};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

pub use io::{load_graph, save_graph, FORMAT_VERSION, MAGIC};

/// Dense node index, assigned at build time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// One outgoing adjacency entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub target: NodeId,
    pub raw_weight: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoauthorGraph {
    keys: Vec<AuthorKey>,
    index: HashMap<AuthorKey, NodeId>,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    raw: Vec<f64>,
    prob: Vec<f64>,
    cumulative: Vec<f64>,
}

/// Builds the co-authorship network of `corpus`.
///
/// Node ids follow ascending [`AuthorKey`] order and each pair weight is the
/// nearest `f64` to its exact fractional value, so the result does not depend
/// on manuscript order. Single-author manuscripts contribute a node and no edges. Authors
/// who are only ever referenced do not become nodes.
pub fn build_graph(corpus: &Corpus) -> CoauthorGraph {
    // provisional ids in first-seen order, one hash lookup per byline entry
    let mut provisional: HashMap<&AuthorKey, u32> = HashMap::new();
    let mut seen: Vec<&AuthorKey> = Vec::new();
    let mut flat: Vec<u32> = Vec::new();
    let mut bounds = vec![0usize];
    for m in corpus.manuscripts() {
        for k in &m.authors {
            let id = *provisional.entry(k).or_insert_with(|| {
                seen.push(k);
                (seen.len() - 1) as u32
            });
            flat.push(id);
        }
        bounds.push(flat.len());
    }
    drop(provisional);

    let mut order: Vec<u32> = (0..seen.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| seen[a as usize].cmp(seen[b as usize]));
    let mut rank = vec![0u32; order.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old as usize] = new as u32;
    }
    let keys: Vec<AuthorKey> = order.iter().map(|&o| seen[o as usize].clone()).collect();
    let index: HashMap<AuthorKey, NodeId> = keys
        .iter()
        .enumerate()
        .map(|(i, k)| (k.clone(), NodeId(i as u32)))
        .collect();

    // (low, high, A(m) - 1) per co-appearing pair per manuscript
    let mut incidences: Vec<(u32, u32, u32)> = Vec::new();
    for w in bounds.windows(2) {
        let ids = &flat[w[0]..w[1]];
        if ids.len() < 2 {
            continue;
        }
        let share = (ids.len() - 1) as u32;
        for (i, &x) in ids.iter().enumerate() {
            for &y in &ids[i + 1..] {
                let (x, y) = (rank[x as usize], rank[y as usize]);
                incidences.push((x.min(y), x.max(y), share));
            }
        }
    }
    incidences.sort_unstable();

    let mut edges: Vec<(u32, u32, f64)> = Vec::new();
    let mut runs: Vec<(u32, u64)> = Vec::new();
    let mut i = 0;
    while i < incidences.len() {
        let (lo, hi, _) = incidences[i];
        runs.clear();
        while i < incidences.len() && incidences[i].0 == lo && incidences[i].1 == hi {
            let share = incidences[i].2;
            match runs.last_mut() {
                Some(last) if last.0 == share => last.1 += 1,
                _ => runs.push((share, 1)),
            }
            i += 1;
        }
        edges.push((lo, hi, pair_weight(&runs)));
    }
    CoauthorGraph::from_sorted_edges(keys, index, &edges)
}

const EXACT_LIMIT: u128 = 1 << f64::MANTISSA_DIGITS;

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `sum(count / share)` over `(share, count)` runs, rounded once to the
/// nearest `f64` whenever the fraction's numerator and denominator fit in 53
/// bits (a single IEEE division of exact operands). Pairs whose byline sizes
/// make the denominator larger fall back to a compensated sum.
fn pair_weight(runs: &[(u32, u64)]) -> f64 {
    let mut den: u128 = 1;
    for &(share, _) in runs {
        let s = u128::from(share);
        den = den / gcd(den, s) * s;
        if den >= EXACT_LIMIT {
            return runs
                .iter()
                .map(|&(s, c)| c as f64 / f64::from(s))
                .collect::<CompensatedSum>()
                .value();
        }
    }
    let num: u128 = runs
        .iter()
        .map(|&(s, c)| u128::from(c) * (den / u128::from(s)))
        .sum();
    if num >= EXACT_LIMIT {
        return runs
            .iter()
            .map(|&(s, c)| c as f64 / f64::from(s))
            .collect::<CompensatedSum>()
            .value();
    }
    num as f64 / den as f64
}

impl CoauthorGraph {
    /// Builds a graph from explicit undirected weighted edges over `keys`
    /// (node `i` is `keys[i]`). Repeated pairs have their weights summed.
    pub fn from_edges(
        keys: Vec<AuthorKey>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let n = keys.len();
        let mut index = HashMap::with_capacity(n);
        for (i, k) in keys.iter().enumerate() {
            if index.insert(k.clone(), NodeId(i as u32)).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate author key {k}")));
            }
        }
        let mut list: Vec<(u32, u32, f64)> = Vec::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::UnknownNode(NodeId(a.max(b) as u32)));
            }
            if a == b {
                return Err(Error::InvalidConfig(format!("self-loop on node {a}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "edge weight {w} must be positive and finite"
                )));
            }
            list.push((a.min(b) as u32, a.max(b) as u32, w));
        }
        list.sort_by_key(|&(a, b, _)| (a, b));
        let mut merged: Vec<(u32, u32, f64)> = Vec::with_capacity(list.len());
        for e in list {
            match merged.last_mut() {
                Some(last) if last.0 == e.0 && last.1 == e.1 => last.2 += e.2,
                _ => merged.push(e),
            }
        }
        Ok(Self::from_sorted_edges(keys, index, &merged))
    }

    /// `edges` must be sorted by `(low, high)` with `low < high` and unique.
    fn from_sorted_edges(
        keys: Vec<AuthorKey>,
        index: HashMap<AuthorKey, NodeId>,
        edges: &[(u32, u32, f64)],
    ) -> Self {
        let n = keys.len();
        let mut degree = vec![0usize; n];
        for &(a, b, _) in edges {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let m = offsets[n];
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![NodeId(0); m];
        let mut raw = vec![0.0; m];
        // Sorted (low, high) input leaves every row sorted by target.
        for &(a, b, w) in edges {
            for (from, to) in [(a, b), (b, a)] {
                let slot = fill[from as usize];
                targets[slot] = NodeId(to);
                raw[slot] = w;
                fill[from as usize] += 1;
            }
        }
        let mut graph = Self {
            keys,
            index,
            offsets,
            targets,
            raw,
            prob: vec![0.0; m],
            cumulative: vec![0.0; m],
        };
        graph.normalize();
        graph
    }

    /// Assembles a graph from already-validated parts (used by the loader).
    pub(crate) fn from_parts(
        keys: Vec<AuthorKey>,
        offsets: Vec<usize>,
        targets: Vec<NodeId>,
        raw: Vec<f64>,
        prob: Vec<f64>,
    ) -> Self {
        let index = keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), NodeId(i as u32)))
            .collect();
        let mut graph = Self {
            keys,
            index,
            offsets,
            targets,
            raw,
            prob,
            cumulative: Vec::new(),
        };
        graph.rebuild_cumulative();
        graph
    }

    /// Recomputes every outgoing probability from the raw weights. Isolated
    /// nodes keep an empty distribution.
    pub fn normalize(&mut self) {
        for node in 0..self.node_count() {
            let range = self.offsets[node]..self.offsets[node + 1];
            let total: f64 = self.raw[range.clone()].iter().sum();
            for i in range {
                self.prob[i] = self.raw[i] / total;
            }
        }
        self.rebuild_cumulative();
    }

    fn rebuild_cumulative(&mut self) {
        self.cumulative = vec![0.0; self.prob.len()];
        for node in 0..self.node_count() {
            let mut acc = 0.0;
            for i in self.offsets[node]..self.offsets[node + 1] {
                acc += self.prob[i];
                self.cumulative[i] = acc;
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    /// Undirected edges, each pair counted once.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Adjacency entries, each undirected edge counted in both directions.
    pub fn directed_edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn keys(&self) -> &[AuthorKey] {
        &self.keys
    }

    pub fn key(&self, node: NodeId) -> &AuthorKey {
        &self.keys[node.index()]
    }

    pub fn node(&self, key: &AuthorKey) -> Option<NodeId> {
        self.index.get(key).copied()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.index() < self.node_count()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count() as u32).map(NodeId)
    }

    pub fn out_degree(&self, node: NodeId) -> usize {
        self.offsets[node.index() + 1] - self.offsets[node.index()]
    }

    pub fn neighbors(&self, node: NodeId) -> impl ExactSizeIterator<Item = Edge> + '_ {
        let range = self.offsets[node.index()]..self.offsets[node.index() + 1];
        range.map(move |i| Edge {
            target: self.targets[i],
            raw_weight: self.raw[i],
            probability: self.prob[i],
        })
    }

    pub(crate) fn row(&self, node: NodeId) -> (&[NodeId], &[f64]) {
        let range = self.offsets[node.index()]..self.offsets[node.index() + 1];
        (&self.targets[range.clone()], &self.prob[range])
    }

    /// Picks the neighbor whose cumulative-probability interval contains `u`,
    /// for `u` uniform in `[0, 1)`. `None` at sinks.
    #[inline]
    pub fn sample_neighbor(&self, node: NodeId, u: f64) -> Option<NodeId> {
        let range = self.offsets[node.index()]..self.offsets[node.index() + 1];
        if range.is_empty() {
            return None;
        }
        let cumulative = &self.cumulative[range.clone()];
        let pos = cumulative
            .partition_point(|&c| c <= u)
            .min(cumulative.len() - 1);
        Some(self.targets[range.start + pos])
    }

    /// Sum of raw weights over undirected edges.
    pub fn total_raw_weight(&self) -> f64 {
        let mut total = 0.0;
        for node in self.nodes() {
            for e in self.neighbors(node) {
                if e.target > node {
                    total += e.raw_weight;
                }
            }
        }
        total
    }

    pub fn raw_weight(&self, a: NodeId, b: NodeId) -> Option<f64> {
        let (targets, _) = self.row(a);
        targets
            .binary_search(&b)
            .ok()
            .map(|pos| self.raw[self.offsets[a.index()] + pos])
    }

    pub fn probability(&self, a: NodeId, b: NodeId) -> Option<f64> {
        let (targets, prob) = self.row(a);
        targets.binary_search(&b).ok().map(|pos| prob[pos])
    }

    pub(crate) fn csr(&self) -> (&[usize], &[NodeId], &[f64], &[f64]) {
        (&self.offsets, &self.targets, &self.raw, &self.prob)
    }

    /// Every node within `radius` hops of some seed.
    pub fn neighborhood(
        &self,
        seeds: impl IntoIterator<Item = NodeId>,
        radius: usize,
    ) -> Result<BTreeSet<NodeId>> {
        let mut dist = vec![usize::MAX; self.node_count()];
        let mut queue = VecDeque::new();
        for s in seeds {
            if !self.contains(s) {
                return Err(Error::UnknownNode(s));
            }
            if dist[s.index()] != 0 {
                dist[s.index()] = 0;
                queue.push_back(s);
            }
        }
        let mut out = BTreeSet::new();
        while let Some(v) = queue.pop_front() {
            out.insert(v);
            let d = dist[v.index()];
            if d == radius {
                continue;
            }
            for &t in self.row(v).0 {
                if dist[t.index()] == usize::MAX {
                    dist[t.index()] = d + 1;
                    queue.push_back(t);
                }
            }
        }
        Ok(out)
    }
}
