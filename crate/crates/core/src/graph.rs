//! Directed acyclic graphs over dense vertex ids `0..n`.
//!
//! [`Dag`] keeps sorted parent and child lists plus a bit matrix for O(1)
//! edge membership. Reachability is computed by bitset propagation in
//! reverse topological order, which also drives the transitive reduction.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Square boolean matrix stored as packed `u64` rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        BitMatrix {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let w = &mut self.bits[i * self.words + j / 64];
        if value {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// `row(dst) |= row(src)`.
    fn or_row_into(&mut self, src: usize, dst: usize) {
        if src == dst {
            return;
        }
        let w = self.words;
        let (a, b) = (src * w, dst * w);
        for k in 0..w {
            let v = self.bits[a + k];
            self.bits[b + k] |= v;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Iterates set entries in row-major order.
    pub fn iter_ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.row(i).iter().enumerate().flat_map(move |(k, &word)| {
                let mut w = word;
                std::iter::from_fn(move || {
                    if w == 0 {
                        return None;
                    }
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some((i, k * 64 + bit))
                })
            })
        })
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter_ones()).finish()
    }
}

/// A directed acyclic graph with vertices `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Dag {
    n: usize,
    adjacency: BitMatrix,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl fmt::Debug for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dag(n={}, edges={:?})", self.n, self.edges())
    }
}

#[derive(Serialize, Deserialize)]
struct DagRepr {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Serialize for Dag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DagRepr {
            n: self.n,
            edges: self.edges(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = DagRepr::deserialize(d)?;
        Dag::new(repr.n, repr.edges).map_err(serde::de::Error::custom)
    }
}

impl Dag {
    /// Builds a DAG, rejecting out-of-range vertices, self-loops, duplicate
    /// edges and cycles.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adjacency = BitMatrix::new(n);
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u},{v}) out of range for n={n}")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            if adjacency.get(u, v) {
                return Err(Error::invalid(format!("duplicate edge ({u},{v})")));
            }
            adjacency.set(u, v, true);
            children[u].push(v);
            parents[v].push(u);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        let dag = Dag {
            n,
            adjacency,
            parents,
            children,
        };
        dag.topological_order()?;
        Ok(dag)
    }

    pub fn empty(n: usize) -> Self {
        Dag::new(n, std::iter::empty()).expect("empty graph is acyclic")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency.get(u, v)
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(u, cs)| cs.iter().map(move |&v| (u, v)))
            .collect()
    }

    pub fn max_in_degree(&self) -> usize {
        self.parents.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Kahn's algorithm, smallest available vertex first.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<usize>> = indegree
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(v, _)| Reverse(v))
            .collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v);
            for &c in &self.children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
        if order.len() != self.n {
            let stuck = (0..self.n).find(|&v| indegree[v] > 0).unwrap_or(0);
            return Err(Error::Cycle(stuck));
        }
        Ok(order)
    }

    pub(crate) fn topo(&self) -> Vec<usize> {
        self.topological_order().expect("Dag invariant: acyclic")
    }

    /// Returns a copy with every edge entering `targets` removed.
    pub fn mutilate(&self, targets: &[usize]) -> Dag {
        let mut cut = vec![false; self.n];
        for &t in targets {
            cut[t] = true;
        }
        let edges = self.edges().into_iter().filter(|&(_, v)| !cut[v]);
        Dag::new(self.n, edges).expect("subgraph of a DAG is a DAG")
    }

    /// Ancestors of `targets` (inclusive) ignoring edges that enter `cut`
    /// vertices, returned in topological order.
    pub fn ancestral_set(&self, targets: &[usize], cut: &[usize]) -> Vec<usize> {
        let mut is_cut = vec![false; self.n];
        for &c in cut {
            is_cut[c] = true;
        }
        let mut keep = vec![false; self.n];
        let mut stack: Vec<usize> = Vec::new();
        for &t in targets {
            if !keep[t] {
                keep[t] = true;
                stack.push(t);
            }
        }
        while let Some(v) = stack.pop() {
            if is_cut[v] {
                continue;
            }
            for &p in &self.parents[v] {
                if !keep[p] {
                    keep[p] = true;
                    stack.push(p);
                }
            }
        }
        self.topo().into_iter().filter(|&v| keep[v]).collect()
    }

    pub fn transitive_closure(&self) -> ReachabilityMatrix {
        let mut bits = BitMatrix::new(self.n);
        for &u in self.topo().iter().rev() {
            for &c in &self.children[u] {
                bits.set(u, c, true);
                bits.or_row_into(c, u);
            }
        }
        ReachabilityMatrix { bits }
    }

    /// Drops every edge `(u,v)` for which a longer `u -> v` path exists.
    pub fn transitive_reduction(&self) -> Dag {
        let reach = self.transitive_closure();
        let mut beyond = BitMatrix::new(self.n);
        for u in 0..self.n {
            for &c in &self.children[u] {
                beyond.or_row_into_from(&reach.bits, c, u);
            }
        }
        let edges = self
            .edges()
            .into_iter()
            .filter(|&(u, v)| !beyond.get(u, v));
        Dag::new(self.n, edges).expect("subgraph of a DAG is a DAG")
    }

    pub fn is_transitively_reduced(&self) -> bool {
        self.count_transitive_edges() == 0
    }

    pub fn count_transitive_edges(&self) -> usize {
        self.edge_count() - self.transitive_reduction().edge_count()
    }
}

impl BitMatrix {
    /// `row(dst) |= other.row(src)`.
    fn or_row_into_from(&mut self, other: &BitMatrix, src: usize, dst: usize) {
        let w = self.words;
        for k in 0..w {
            self.bits[dst * w + k] |= other.bits[src * w + k];
        }
    }
}

/// Entry `(i,j)` is set iff a directed path of length at least one runs from
/// `i` to `j`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ReachabilityMatrix {
    bits: BitMatrix,
}

impl ReachabilityMatrix {
    pub fn n(&self) -> usize {
        self.bits.size()
    }

    #[inline]
    pub fn reaches(&self, i: usize, j: usize) -> bool {
        self.bits.get(i, j)
    }

    pub fn pair_count(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits.iter_ones()
    }
}

/// Noiseless path query: whether `j` is reachable from `i`.
pub fn exact_path_query(reach: &ReachabilityMatrix, i: usize, j: usize) -> Result<bool> {
    let n = reach.n();
    if i >= n || j >= n {
        return Err(Error::invalid(format!("pair ({i},{j}) out of range for n={n}")));
    }
    if i == j {
        return Err(Error::invalid(format!("path query Q({i},{i}) is undefined")));
    }
    Ok(reach.reaches(i, j))
}

/// Random DAG equal to its own transitive reduction: each forward pair of a
/// random permutation gets an edge with probability `edge_density`, then the
/// transitive edges are removed.
pub fn random_tr_dag(n: usize, edge_density: f64, seed: u64) -> Result<Dag> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(edge_density > 0.0 && edge_density <= 1.0) {
        return Err(Error::invalid(format!(
            "edge density {edge_density} outside (0,1]"
        )));
    }
    let mut rng = seed::rng(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < edge_density {
                edges.push((order[a], order[b]));
            }
        }
    }
    Ok(Dag::new(n, edges)?.transitive_reduction())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dag(n: usize, edges: &[(usize, usize)]) -> Dag {
        Dag::new(n, edges.iter().copied()).unwrap()
    }

    /// Figure-1-style network, shifted to 0-based ids.
    fn six_node() -> Dag {
        dag(6, &[(0, 2), (0, 3), (1, 3), (1, 4), (2, 5), (3, 5), (4, 5)])
    }

    fn dfs_reaches(g: &Dag, i: usize, j: usize) -> bool {
        let mut seen = vec![false; g.n()];
        let mut stack = g.children(i).to_vec();
        while let Some(v) = stack.pop() {
            if v == j {
                return true;
            }
            if !seen[v] {
                seen[v] = true;
                stack.extend_from_slice(g.children(v));
            }
        }
        false
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(Dag::new(2, [(0, 0)]), Err(Error::InvalidArgument(_))));
        assert!(matches!(Dag::new(2, [(0, 1), (0, 1)]), Err(Error::InvalidArgument(_))));
        assert!(matches!(Dag::new(2, [(0, 2)]), Err(Error::InvalidArgument(_))));
        assert!(matches!(Dag::new(3, [(0, 1), (1, 2), (2, 0)]), Err(Error::Cycle(_))));
    }

    #[test]
    fn closure_of_chain() {
        let reach = dag(3, &[(0, 1), (1, 2)]).transitive_closure();
        let pairs: Vec<_> = reach.pairs().collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2)]);
        assert!(!reach.reaches(0, 0));
    }

    #[test]
    fn triangle_and_chain_share_closure() {
        let triangle = dag(3, &[(0, 1), (0, 2), (1, 2)]);
        let chain = dag(3, &[(0, 1), (1, 2)]);
        assert_eq!(triangle.transitive_closure(), chain.transitive_closure());
        assert_eq!(triangle.transitive_reduction(), chain);
        assert_eq!(triangle.count_transitive_edges(), 1);
    }

    #[test]
    fn closure_matches_dfs_on_random_graphs() {
        for seed in 0..50 {
            let g = random_dense(8, 0.4, seed);
            let reach = g.transitive_closure();
            for i in 0..8 {
                for j in 0..8 {
                    assert_eq!(reach.reaches(i, j), i != j && dfs_reaches(&g, i, j));
                }
            }
        }
    }

    fn random_dense(n: usize, p: f64, seed: u64) -> Dag {
        let mut rng = seed::rng(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        Dag::new(n, edges).unwrap()
    }

    #[test]
    fn reduction_is_idempotent_on_chain() {
        let chain = dag(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(chain.transitive_reduction(), chain);
    }

    #[test]
    fn topological_order_examples() {
        assert_eq!(dag(3, &[(0, 1), (1, 2)]).topological_order().unwrap(), vec![0, 1, 2]);
        assert_eq!(Dag::empty(4).topological_order().unwrap(), vec![0, 1, 2, 3]);
        let order = six_node().topological_order().unwrap();
        let pos = |v: usize| order.iter().position(|&x| x == v).unwrap();
        for (u, v) in six_node().edges() {
            assert!(pos(u) < pos(v));
        }
        assert!(pos(0) < pos(2) && pos(1) < pos(4) && pos(4) < pos(5));
    }

    #[test]
    fn exact_query_examples() {
        let g = six_node();
        let reach = g.transitive_closure();
        assert!(exact_path_query(&reach, 0, 5).unwrap());
        assert!(!exact_path_query(&reach, 2, 4).unwrap());
        assert!(exact_path_query(&reach, 3, 3).is_err());

        // Intervening vertex 3 removes its incoming edges.
        let cut = g.mutilate(&[3]).transitive_closure();
        assert!(!exact_path_query(&cut, 1, 3).unwrap());
        assert!(!exact_path_query(&cut, 0, 3).unwrap());
        assert!(exact_path_query(&cut, 0, 5).unwrap());
    }

    #[test]
    fn random_tr_dag_is_reduced_and_deterministic() {
        for seed in 0..20 {
            let g = random_tr_dag(12, 0.3, seed).unwrap();
            assert!(g.is_transitively_reduced());
            assert_eq!(g, random_tr_dag(12, 0.3, seed).unwrap());
        }
        assert!(random_tr_dag(0, 0.5, 1).is_err());
        assert!(random_tr_dag(3, 0.0, 1).is_err());
    }

    #[test]
    fn ancestral_set_respects_cuts() {
        let g = six_node();
        assert_eq!(g.ancestral_set(&[5], &[]), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(g.ancestral_set(&[5], &[3, 2]), vec![1, 2, 3, 4, 5]);
        assert_eq!(g.ancestral_set(&[3], &[3]), vec![3]);
    }
}
