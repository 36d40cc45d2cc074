//! Fixtures shared by the benchmarks.

use cbnlearn::asgn::{random_asgn, AsgnNetwork};
use cbnlearn::discrete::{random_discrete_cbn, DiscreteCbn};
use cbnlearn::{random_tr_dag, Dag};

/// Sparse random DAG with about two parents per node.
pub fn sparse_dag(n: usize, seed: u64) -> Dag {
    random_tr_dag(n, (2.0 / (n as f64 - 1.0)).min(1.0), seed).expect("generator")
}

/// Dense DAG: every forward pair is an edge, so reduction removes most of it.
pub fn complete_dag(n: usize) -> Dag {
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
    Dag::new(n, edges).expect("acyclic")
}

pub fn discrete_net(n: usize, seed: u64) -> DiscreteCbn {
    random_discrete_cbn(&sparse_dag(n, seed), 3, 0.01, seed).expect("generator")
}

pub fn continuous_net(n: usize, seed: u64) -> AsgnNetwork {
    random_asgn(&sparse_dag(n, seed), seed).expect("generator")
}
