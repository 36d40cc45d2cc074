//! Linear networks with additive sub-Gaussian noise: `X = W X + N`.
//!
//! `W` is stored densely, row = child, column = parent, so `W[i][j] != 0`
//! exactly when `(j, i)` is an edge. Clamping a set `S` zeroes the rows of
//! `S`; the total-effect matrix of the clamped model is
//! `B_S = (I - W_S)^{-1}`, computed row by row in topological order.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::seed;

/// `E.1` generator bound on the squared row norm of `(I - W)^{-1}`.
pub const ROW_NORM_BOUND: f64 = 20.0;

/// Rejection attempts for [`random_asgn`].
pub const ASGN_RETRY_CAP: usize = 1000;

/// Total effects below this magnitude count as cancelled.
pub const EFFECT_TOL: f64 = 1e-12;

const MAX_SUBSET_IN_DEGREE: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian,
    /// Centered uniform with the same variance.
    Uniform,
}

impl NoiseKind {
    #[inline]
    fn draw<R: Rng>(self, rng: &mut R, variance: f64) -> f64 {
        match self {
            NoiseKind::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                z * variance.sqrt()
            }
            NoiseKind::Uniform => {
                let half_width = (3.0 * variance).sqrt();
                (2.0 * rng.random::<f64>() - 1.0) * half_width
            }
        }
    }
}

/// Clamps `(node, value)`; under imperfection the clamped node is
/// `value + noise` with the network's intervention variance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContinuousIntervention {
    pub assignments: Vec<(usize, f64)>,
}

impl ContinuousIntervention {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn single(node: usize, value: f64) -> Self {
        ContinuousIntervention {
            assignments: vec![(node, value)],
        }
    }

    pub fn new(assignments: Vec<(usize, f64)>) -> Self {
        ContinuousIntervention { assignments }
    }

    pub fn targets(&self) -> Vec<usize> {
        self.assignments.iter().map(|&(v, _)| v).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsgnNetwork {
    dag: Dag,
    weights: Vec<f64>,
    noise_variances: Vec<f64>,
    noise_kind: NoiseKind,
    intervention_variances: Option<Vec<f64>>,
}

/// Constants that set the intervention magnitude and the variance bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightConstants {
    pub w_min: f64,
    pub w_max: f64,
    /// `max_i sigma_i^2 * w_max`.
    pub sigma_ub: f64,
    /// `1 / w_min`, absent when `w_min` is zero (faithfulness violated).
    pub z: Option<f64>,
}

impl WeightConstants {
    pub fn is_faithful(&self) -> bool {
        self.z.is_some()
    }
}

impl AsgnNetwork {
    /// `weights` is dense `n x n`, row-major, row = child.
    pub fn new(dag: Dag, weights: Vec<f64>, noise_variances: Vec<f64>, noise_kind: NoiseKind) -> Result<Self> {
        let n = dag.n();
        if weights.len() != n * n || noise_variances.len() != n {
            return Err(Error::InvalidNetwork(format!(
                "expected {n}x{n} weights and {n} variances, got {} and {}",
                weights.len(),
                noise_variances.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let w = weights[i * n + j];
                if !w.is_finite() {
                    return Err(Error::InvalidNetwork(format!("W[{i}][{j}] is not finite")));
                }
                if (w != 0.0) != dag.has_edge(j, i) {
                    return Err(Error::InvalidNetwork(format!(
                        "W[{i}][{j}] = {w} disagrees with the edge set"
                    )));
                }
            }
        }
        if let Some((v, s)) = noise_variances
            .iter()
            .enumerate()
            .find(|(_, s)| !(s.is_finite() && **s > 0.0))
        {
            return Err(Error::InvalidNetwork(format!("noise variance of node {v} is {s}")));
        }
        Ok(AsgnNetwork {
            dag,
            weights,
            noise_variances,
            noise_kind,
            intervention_variances: None,
        })
    }

    /// Builds from an edge list with weights `(parent, child, w)`.
    pub fn from_weighted_edges(
        n: usize,
        edges: &[(usize, usize, f64)],
        noise_variances: Vec<f64>,
        noise_kind: NoiseKind,
    ) -> Result<Self> {
        let dag = Dag::new(n, edges.iter().map(|&(u, v, _)| (u, v)))?;
        let mut weights = vec![0.0; n * n];
        for &(u, v, w) in edges {
            weights[v * n + u] = w;
        }
        AsgnNetwork::new(dag, weights, noise_variances, noise_kind)
    }

    /// Makes every intervention imperfect with the given per-node variances.
    pub fn with_intervention_variances(mut self, nu2: Option<Vec<f64>>) -> Result<Self> {
        if let Some(v) = &nu2 {
            if v.len() != self.n() || v.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                return Err(Error::InvalidNetwork("intervention variances must be n finite non-negatives".into()));
            }
        }
        self.intervention_variances = nu2;
        Ok(self)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn n(&self) -> usize {
        self.dag.n()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight on edge `parent -> child`.
    pub fn weight(&self, child: usize, parent: usize) -> f64 {
        self.weights[child * self.n() + parent]
    }

    pub fn noise_variances(&self) -> &[f64] {
        &self.noise_variances
    }

    pub fn noise_kind(&self) -> NoiseKind {
        self.noise_kind
    }

    pub fn intervention_variances(&self) -> Option<&[f64]> {
        self.intervention_variances.as_deref()
    }

    fn validate_spec(&self, spec: &ContinuousIntervention) -> Result<()> {
        let mut seen = vec![false; self.n()];
        for &(v, x) in &spec.assignments {
            if v >= self.n() {
                return Err(Error::invalid(format!("intervened node {v} out of range")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::invalid(format!("node {v} intervened twice")));
            }
            if !x.is_finite() {
                return Err(Error::invalid(format!("intervention value {x} is not finite")));
            }
        }
        Ok(())
    }

    /// `W` with the rows of `targets` zeroed.
    pub fn mutilate_weights(&self, targets: &[usize]) -> Vec<f64> {
        let n = self.n();
        let mut w = self.weights.clone();
        for &t in targets {
            w[t * n..(t + 1) * n].fill(0.0);
        }
        w
    }

    /// Dense `(I - W_S)^{-1}` for the clamp set `targets`.
    pub fn total_effects(&self, targets: &[usize]) -> Vec<f64> {
        let n = self.n();
        let mut cut = vec![false; n];
        for &t in targets {
            cut[t] = true;
        }
        let mut b = vec![0.0; n * n];
        for j in self.dag.topo() {
            b[j * n + j] = 1.0;
            if cut[j] {
                continue;
            }
            for &k in self.dag.parents(j) {
                let w = self.weights[j * n + k];
                for p in 0..n {
                    b[j * n + p] += w * b[k * n + p];
                }
            }
        }
        b
    }

    /// Exact mean and variance of `X_j` under `spec`.
    pub fn analytic_moments(&self, j: usize, spec: &ContinuousIntervention) -> Result<(f64, f64)> {
        self.validate_spec(spec)?;
        if j >= self.n() {
            return Err(Error::invalid(format!("target {j} out of range")));
        }
        let n = self.n();
        let targets = spec.targets();
        let b = self.total_effects(&targets);
        let row = &b[j * n..(j + 1) * n];
        let mut clamped = vec![None; n];
        for &(v, x) in &spec.assignments {
            clamped[v] = Some(x);
        }
        let mut mean = 0.0;
        let mut var = 0.0;
        for p in 0..n {
            match clamped[p] {
                Some(x) => {
                    mean += row[p] * x;
                    if let Some(nu2) = &self.intervention_variances {
                        var += row[p] * row[p] * nu2[p];
                    }
                }
                None => var += row[p] * row[p] * self.noise_variances[p],
            }
        }
        Ok((mean, var))
    }

    /// Forward sampling of every node; one column per node.
    pub fn sample(&self, spec: &ContinuousIntervention, m: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let all: Vec<usize> = (0..self.n()).collect();
        self.sample_columns(spec, &all, m, seed)
    }

    /// Samples only the ancestors of `targets` in the clamped graph.
    pub fn sample_columns(
        &self,
        spec: &ContinuousIntervention,
        targets: &[usize],
        m: usize,
        seed: u64,
    ) -> Result<Vec<Vec<f64>>> {
        self.validate_spec(spec)?;
        if m == 0 {
            return Err(Error::invalid("sample size m must be at least 1"));
        }
        if let Some(&t) = targets.iter().find(|&&t| t >= self.n()) {
            return Err(Error::invalid(format!("target {t} out of range")));
        }
        let n = self.n();
        let mut clamp = vec![None; n];
        for &(v, x) in &spec.assignments {
            clamp[v] = Some(x);
        }
        struct Step {
            node: usize,
            clamp: Option<f64>,
            variance: f64,
            parents: Vec<(usize, f64)>,
        }
        let steps: Vec<Step> = self
            .dag
            .ancestral_set(targets, &spec.targets())
            .into_iter()
            .map(|v| match clamp[v] {
                Some(x) => Step {
                    node: v,
                    clamp: Some(x),
                    variance: self.intervention_variances.as_ref().map_or(0.0, |nu| nu[v]),
                    parents: Vec::new(),
                },
                None => Step {
                    node: v,
                    clamp: None,
                    variance: self.noise_variances[v],
                    parents: self
                        .dag
                        .parents(v)
                        .iter()
                        .map(|&p| (p, self.weights[v * n + p]))
                        .collect(),
                },
            })
            .collect();

        let mut rng = seed::rng(seed);
        let mut values = vec![0.0; n];
        let mut columns: Vec<Vec<f64>> = targets.iter().map(|_| Vec::with_capacity(m)).collect();
        for _ in 0..m {
            for s in &steps {
                let base = match s.clamp {
                    Some(x) => x,
                    None => s.parents.iter().map(|&(p, w)| w * values[p]).sum(),
                };
                let noise = if s.variance > 0.0 {
                    self.noise_kind.draw(&mut rng, s.variance)
                } else {
                    0.0
                };
                values[s.node] = base + noise;
            }
            for (col, &t) in columns.iter_mut().zip(targets) {
                col.push(values[t]);
            }
        }
        Ok(columns)
    }

    fn max_squared_row_norm(&self, b: &[f64]) -> f64 {
        let n = self.n();
        (0..n)
            .map(|j| b[j * n..(j + 1) * n].iter().map(|x| x * x).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn sigma_max(&self) -> f64 {
        self.noise_variances.iter().copied().fold(0.0, f64::max)
    }

    /// Path-query constants: `w_min` is the smallest total effect of a parent
    /// on its child with the parent clamped; `w_max` the largest squared row
    /// norm over `B` and every single-node clamp.
    pub fn compute_wmin_wmax(&self) -> WeightConstants {
        let n = self.n();
        let mut w_max = self.max_squared_row_norm(&self.total_effects(&[]));
        let mut w_min = f64::INFINITY;
        for i in 0..n {
            let b = self.total_effects(&[i]);
            w_max = w_max.max(self.max_squared_row_norm(&b));
            for &j in self.dag.children(i) {
                w_min = w_min.min(b[j * n + i].abs());
            }
        }
        self.constants(w_min, w_max)
    }

    /// Transitive-query constants: `w_min = min |W_ij|` over edges and
    /// `w_max` additionally maximized over clamps of every parent subset.
    pub fn compute_wmin_wmax_transitive(&self) -> Result<WeightConstants> {
        let n = self.n();
        if self.dag.max_in_degree() > MAX_SUBSET_IN_DEGREE {
            return Err(Error::Capacity {
                what: "parent subsets".into(),
                states: 1u128 << self.dag.max_in_degree(),
                cap: 1 << MAX_SUBSET_IN_DEGREE,
            });
        }
        let w_min = self
            .weights
            .iter()
            .filter(|w| **w != 0.0)
            .map(|w| w.abs())
            .fold(f64::INFINITY, f64::min);
        let mut w_max = self.max_squared_row_norm(&self.total_effects(&[]));
        for i in 0..n {
            w_max = w_max.max(self.max_squared_row_norm(&self.total_effects(&[i])));
        }
        for j in 0..n {
            let parents = self.dag.parents(j);
            for mask in 1usize..(1 << parents.len()) {
                let subset: Vec<usize> = parents
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &p)| p)
                    .collect();
                w_max = w_max.max(self.max_squared_row_norm(&self.total_effects(&subset)));
            }
        }
        Ok(self.constants(w_min, w_max))
    }

    fn constants(&self, w_min: f64, w_max: f64) -> WeightConstants {
        // No edges: nothing to detect, any magnitude works.
        let w_min = if w_min.is_infinite() { 1.0 } else { w_min };
        WeightConstants {
            w_min,
            w_max,
            sigma_ub: self.sigma_max() * w_max,
            z: (w_min > EFFECT_TOL).then(|| 1.0 / w_min),
        }
    }
}

/// Random weights on `dag`: `|W_ij|` uniform on `[0.01, 1.25]` with a random
/// sign, noise variances uniform on `[1, 5]`, Gaussian noise. Rejects until
/// the squared row norm of `(I - W)^{-1}` is at most 20 and `w_min > 0`.
pub fn random_asgn(dag: &Dag, seed: u64) -> Result<AsgnNetwork> {
    let n = dag.n();
    let mut rng = seed::rng(seed);
    for _ in 0..ASGN_RETRY_CAP {
        let mut weights = vec![0.0; n * n];
        for (u, v) in dag.edges() {
            let magnitude = rng.random_range(0.01..=1.25);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            weights[v * n + u] = sign * magnitude;
        }
        let variances: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..=5.0)).collect();
        let net = AsgnNetwork::new(dag.clone(), weights, variances, NoiseKind::Gaussian)?;
        if net.max_squared_row_norm(&net.total_effects(&[])) > ROW_NORM_BOUND {
            continue;
        }
        if net.compute_wmin_wmax().is_faithful() {
            return Ok(net);
        }
    }
    Err(Error::GenerationFailure {
        attempts: ASGN_RETRY_CAP,
        reason: format!("no weights with squared row norm <= {ROW_NORM_BOUND}"),
    })
}
