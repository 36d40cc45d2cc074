//! Noisy path and transitive queries.
//!
//! Queries see the data only through a sampler, so the same code runs
//! against the simulators, a batching cache, or recorded data. Every
//! interventional distribution a query estimates draws from its own stream,
//! `derive_seed(seed, [config, value])`, where `config` indexes the joint
//! assignment of the conditioning set `S` (always 0 for path queries) and
//! `value` the intervention on `X_i`. Path queries are the `S = {}` case of
//! the transitive sweep and agree with it bit for bit.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::asgn::{AsgnNetwork, ContinuousIntervention};
use crate::discrete::{Assignments, DiscreteCbn, InterventionSpec, ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Interventional sampling of discrete variables.
pub trait DiscreteSampler: Sync {
    fn n(&self) -> usize;

    fn domain_size(&self, v: usize) -> usize;

    /// `m` joint draws of `targets` under `spec`, one column per target.
    /// Identical arguments must give identical samples.
    fn sample_columns(&self, spec: &InterventionSpec, targets: &[usize], m: usize, seed: u64) -> Result<Vec<Vec<u16>>>;
}

/// Interventional sampling of continuous variables.
pub trait ContinuousSampler: Sync {
    fn n(&self) -> usize;

    fn sample_columns(
        &self,
        spec: &ContinuousIntervention,
        targets: &[usize],
        m: usize,
        seed: u64,
    ) -> Result<Vec<Vec<f64>>>;
}

impl DiscreteSampler for DiscreteCbn {
    fn n(&self) -> usize {
        DiscreteCbn::n(self)
    }

    fn domain_size(&self, v: usize) -> usize {
        DiscreteCbn::domain_size(self, v)
    }

    fn sample_columns(&self, spec: &InterventionSpec, targets: &[usize], m: usize, seed: u64) -> Result<Vec<Vec<u16>>> {
        DiscreteCbn::sample_columns(self, spec, targets, m, seed)
    }
}

impl ContinuousSampler for AsgnNetwork {
    fn n(&self) -> usize {
        AsgnNetwork::n(self)
    }

    fn sample_columns(
        &self,
        spec: &ContinuousIntervention,
        targets: &[usize],
        m: usize,
        seed: u64,
    ) -> Result<Vec<Vec<f64>>> {
        AsgnNetwork::sample_columns(self, spec, targets, m, seed)
    }
}

/// Makes every intervention on the wrapped network imperfect: node `v`
/// takes the requested value with probability `phi[v]`.
pub struct ImperfectSampler<'a> {
    cbn: &'a DiscreteCbn,
    phi: Vec<f64>,
}

impl<'a> ImperfectSampler<'a> {
    pub fn new(cbn: &'a DiscreteCbn, phi: Vec<f64>) -> Result<Self> {
        if phi.len() != cbn.n() || phi.iter().any(|p| !(0.5..=1.0).contains(p)) {
            return Err(Error::invalid("success probabilities must be n values in [1/2, 1]"));
        }
        Ok(ImperfectSampler { cbn, phi })
    }

    /// `alpha = min_i phi_i`.
    pub fn alpha(&self) -> f64 {
        self.phi.iter().copied().fold(1.0, f64::min)
    }
}

impl DiscreteSampler for ImperfectSampler<'_> {
    fn n(&self) -> usize {
        self.cbn.n()
    }

    fn domain_size(&self, v: usize) -> usize {
        self.cbn.domain_size(v)
    }

    fn sample_columns(&self, spec: &InterventionSpec, targets: &[usize], m: usize, seed: u64) -> Result<Vec<Vec<u16>>> {
        let spec = spec.clone().with_success_prob(Some(self.phi.clone()));
        self.cbn.sample_columns(&spec, targets, m, seed)
    }
}

/// Samples once per intervention and serves every target from that draw,
/// so `n(n-1)` path queries cost `n` single-node interventions. The caller's
/// seed is ignored; each intervention's stream is derived from `root` and
/// the intervention itself. Only interventions on the most recent target
/// set are kept, which matches the `i`-outer loop of the learner.
struct BatchCache<K, T> {
    root: u64,
    entries: Mutex<(Vec<usize>, HashMap<(K, usize), Arc<Vec<Vec<T>>>>)>,
}

impl<K: std::hash::Hash + Eq, T: Clone> BatchCache<K, T> {
    fn new(root: u64) -> Self {
        BatchCache {
            root,
            entries: Mutex::new((Vec::new(), HashMap::new())),
        }
    }

    fn get(
        &self,
        targets_of_spec: Vec<usize>,
        key: K,
        stream: &[u64],
        m: usize,
        wanted: &[usize],
        draw: impl FnOnce(u64) -> Result<Vec<Vec<T>>>,
    ) -> Result<Vec<Vec<T>>> {
        let key = (key, m);
        let all = {
            let mut guard = self.entries.lock().unwrap_or_else(|e| e.into_inner());
            if guard.0 != targets_of_spec {
                guard.0 = targets_of_spec;
                guard.1.clear();
            }
            match guard.1.get(&key) {
                Some(cols) => cols.clone(),
                None => {
                    let cols = Arc::new(draw(derive_seed(self.root, stream))?);
                    guard.1.insert(key, cols.clone());
                    cols
                }
            }
        };
        Ok(wanted.iter().map(|&t| all[t].clone()).collect())
    }
}

pub struct BatchedDiscrete<'a, S: DiscreteSampler> {
    inner: &'a S,
    cache: BatchCache<Vec<(usize, usize)>, u16>,
}

impl<'a, S: DiscreteSampler> BatchedDiscrete<'a, S> {
    pub fn new(inner: &'a S, root_seed: u64) -> Self {
        BatchedDiscrete {
            inner,
            cache: BatchCache::new(root_seed),
        }
    }
}

impl<S: DiscreteSampler> DiscreteSampler for BatchedDiscrete<'_, S> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn domain_size(&self, v: usize) -> usize {
        self.inner.domain_size(v)
    }

    fn sample_columns(&self, spec: &InterventionSpec, targets: &[usize], m: usize, _seed: u64) -> Result<Vec<Vec<u16>>> {
        if let Some(&t) = targets.iter().find(|&&t| t >= self.n()) {
            return Err(Error::invalid(format!("target {t} out of range")));
        }
        let stream: Vec<u64> = spec
            .assignments
            .iter()
            .flat_map(|&(v, x)| [v as u64, x as u64])
            .collect();
        let all: Vec<usize> = (0..self.n()).collect();
        self.cache.get(spec.targets(), spec.assignments.clone(), &stream, m, targets, |seed| {
            self.inner.sample_columns(spec, &all, m, seed)
        })
    }
}

pub struct BatchedContinuous<'a, S: ContinuousSampler> {
    inner: &'a S,
    cache: BatchCache<Vec<(usize, u64)>, f64>,
}

impl<'a, S: ContinuousSampler> BatchedContinuous<'a, S> {
    pub fn new(inner: &'a S, root_seed: u64) -> Self {
        BatchedContinuous {
            inner,
            cache: BatchCache::new(root_seed),
        }
    }
}

impl<S: ContinuousSampler> ContinuousSampler for BatchedContinuous<'_, S> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn sample_columns(
        &self,
        spec: &ContinuousIntervention,
        targets: &[usize],
        m: usize,
        _seed: u64,
    ) -> Result<Vec<Vec<f64>>> {
        if let Some(&t) = targets.iter().find(|&&t| t >= self.n()) {
            return Err(Error::invalid(format!("target {t} out of range")));
        }
        let key: Vec<(usize, u64)> = spec.assignments.iter().map(|&(v, x)| (v, x.to_bits())).collect();
        let stream: Vec<u64> = key.iter().flat_map(|&(v, x)| [v as u64, x]).collect();
        let all: Vec<usize> = (0..self.n()).collect();
        self.cache.get(spec.targets(), key, &stream, m, targets, |seed| {
            self.inner.sample_columns(spec, &all, m, seed)
        })
    }
}

/// Result of one noisy query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub answer: bool,
    pub samples_used: u64,
    /// Largest L-infinity gap between empirical PMFs (discrete) or
    /// `|empirical mean|` (continuous).
    pub max_gap: f64,
}

/// Decision threshold for discrete queries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Threshold {
    /// `gamma / 2`, paired with per-PMF accuracy `gamma / 8`.
    #[default]
    HalfGamma,
    /// `gamma`, as in the pseudocode.
    Printed,
}

impl Threshold {
    pub fn value(self, gamma: f64) -> f64 {
        match self {
            Threshold::HalfGamma => gamma / 2.0,
            Threshold::Printed => gamma,
        }
    }
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if i >= n || j >= n {
        return Err(Error::invalid(format!("query ({i}, {j}) out of range for n = {n}")));
    }
    if i == j {
        return Err(Error::invalid(format!("query ({i}, {i}) is undefined")));
    }
    Ok(())
}

fn check_set(n: usize, i: usize, j: usize, s: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &k in s {
        if k >= n {
            return Err(Error::invalid(format!("conditioning node {k} out of range")));
        }
        if k == i || k == j {
            return Err(Error::invalid(format!("conditioning set contains query endpoint {k}")));
        }
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::invalid(format!("conditioning node {k} repeated")));
        }
    }
    Ok(())
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("sample size m must be at least 1"));
    }
    Ok(())
}

/// Per-value range of a set of PMFs; the max over values equals the largest
/// pairwise L-infinity distance.
struct GapTracker {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl GapTracker {
    fn new(d: usize) -> Self {
        GapTracker {
            lo: vec![f64::INFINITY; d],
            hi: vec![f64::NEG_INFINITY; d],
        }
    }

    fn push(&mut self, pmf: &[f64]) {
        for (k, &p) in pmf.iter().enumerate() {
            self.lo[k] = self.lo[k].min(p);
            self.hi[k] = self.hi[k].max(p);
        }
    }

    fn gap(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l).max(0.0))
            .fold(0.0, f64::max)
    }
}

fn empirical_pmf(column: &[u16], d: usize) -> Vec<f64> {
    let mut counts = vec![0u64; d];
    for &x in column {
        counts[x as usize] += 1;
    }
    let m = column.len() as f64;
    counts.into_iter().map(|c| c as f64 / m).collect()
}

fn discrete_domains<S: DiscreteSampler + ?Sized>(sampler: &S) -> Result<Vec<usize>> {
    let sizes: Vec<usize> = (0..sampler.n()).map(|v| sampler.domain_size(v)).collect();
    if let Some(v) = sizes.iter().position(|&d| d < 2) {
        return Err(Error::InvalidNetwork(format!("node {v} has fewer than two values")));
    }
    Ok(sizes)
}

/// Noisy path query for discrete variables: estimates `p(X_j | do(X_i = x))`
/// for every `x` from `m` samples each and answers whether some pair differs
/// by more than `threshold` in L-infinity.
pub fn path_query_discrete<S: DiscreteSampler + ?Sized>(
    sampler: &S,
    i: usize,
    j: usize,
    m: usize,
    threshold: f64,
    seed: u64,
) -> Result<QueryOutcome> {
    transitive_query_discrete(sampler, i, j, &[], m, threshold, seed)
}

/// Noisy transitive query: for each joint assignment of `S`, clamps `S` and
/// sweeps `X_i` as in the path query; answers 1 at the first assignment
/// whose sweep exceeds `threshold`.
pub fn transitive_query_discrete<S: DiscreteSampler + ?Sized>(
    sampler: &S,
    i: usize,
    j: usize,
    s: &[usize],
    m: usize,
    threshold: f64,
    seed: u64,
) -> Result<QueryOutcome> {
    let n = sampler.n();
    check_pair(n, i, j)?;
    check_set(n, i, j, s)?;
    check_m(m)?;
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::invalid(format!("threshold must be positive, got {threshold}")));
    }
    let sizes = discrete_domains(sampler)?;
    let configs = s.iter().fold(1u128, |acc, &k| acc.saturating_mul(sizes[k] as u128));
    if configs > ENUMERATION_CAP {
        return Err(Error::Capacity {
            what: format!("assignments of conditioning set for node {j} (|S| = {})", s.len()),
            states: configs,
            cap: ENUMERATION_CAP,
        });
    }

    let mut samples_used = 0u64;
    let mut max_gap = 0.0f64;
    for (config, assignment) in Assignments::new(s, &sizes).enumerate() {
        let mut tracker = GapTracker::new(sizes[j]);
        for x in 0..sizes[i] {
            let mut assignments = assignment.clone();
            assignments.push((i, x));
            let spec = InterventionSpec::new(assignments);
            let cols = sampler.sample_columns(&spec, &[j], m, derive_seed(seed, &[config as u64, x as u64]))?;
            tracker.push(&empirical_pmf(&cols[0], sizes[j]));
            samples_used += m as u64;
        }
        let gap = tracker.gap();
        max_gap = max_gap.max(gap);
        if gap > threshold {
            return Ok(QueryOutcome {
                answer: true,
                samples_used,
                max_gap,
            });
        }
    }
    Ok(QueryOutcome {
        answer: false,
        samples_used,
        max_gap,
    })
}

/// Path query under imperfect interventions: draws `(X_i, X_j)` pairs under
/// `do(X_i = x)` and estimates `p(X_j | X_i = x)` from the draws where the
/// intervention took effect.
pub fn path_query_discrete_imperfect<S: DiscreteSampler + ?Sized>(
    sampler: &S,
    i: usize,
    j: usize,
    m: usize,
    threshold: f64,
    seed: u64,
) -> Result<QueryOutcome> {
    let n = sampler.n();
    check_pair(n, i, j)?;
    check_m(m)?;
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::invalid(format!("threshold must be positive, got {threshold}")));
    }
    let sizes = discrete_domains(sampler)?;
    let mut tracker = GapTracker::new(sizes[j]);
    for x in 0..sizes[i] {
        let spec = InterventionSpec::single(i, x);
        let cols = sampler.sample_columns(&spec, &[i, j], m, derive_seed(seed, &[0, x as u64]))?;
        let mut counts = vec![0u64; sizes[j]];
        let mut hits = 0u64;
        for (&xi, &xj) in cols[0].iter().zip(&cols[1]) {
            if xi as usize == x {
                hits += 1;
                counts[xj as usize] += 1;
            }
        }
        if hits == 0 {
            return Err(Error::DegenerateSample { node: i, value: x, m });
        }
        let pmf: Vec<f64> = counts.iter().map(|&c| c as f64 / hits as f64).collect();
        tracker.push(&pmf);
    }
    let max_gap = tracker.gap();
    Ok(QueryOutcome {
        answer: max_gap > threshold,
        samples_used: (sizes[i] * m) as u64,
        max_gap,
    })
}

/// Noisy path query for continuous variables: `|mean of X_j under
/// do(X_i = z)| > 1/2`.
pub fn path_query_continuous<S: ContinuousSampler + ?Sized>(
    sampler: &S,
    i: usize,
    j: usize,
    m: usize,
    z: f64,
    seed: u64,
) -> Result<QueryOutcome> {
    transitive_query_continuous(sampler, i, j, &[], m, 0.0, z, seed)
}

/// Noisy transitive query for continuous variables: clamps `S` at `z1` and
/// `X_i` at `z2`.
#[allow(clippy::too_many_arguments)]
pub fn transitive_query_continuous<S: ContinuousSampler + ?Sized>(
    sampler: &S,
    i: usize,
    j: usize,
    s: &[usize],
    m: usize,
    z1: f64,
    z2: f64,
    seed: u64,
) -> Result<QueryOutcome> {
    let n = sampler.n();
    check_pair(n, i, j)?;
    check_set(n, i, j, s)?;
    check_m(m)?;
    if !(z1.is_finite() && z2.is_finite()) {
        return Err(Error::invalid("intervention values must be finite"));
    }
    let mut assignments: Vec<(usize, f64)> = s.iter().map(|&k| (k, z1)).collect();
    assignments.push((i, z2));
    let spec = ContinuousIntervention::new(assignments);
    let cols = sampler.sample_columns(&spec, &[j], m, derive_seed(seed, &[0]))?;
    let mean = cols[0].iter().sum::<f64>() / m as f64;
    Ok(QueryOutcome {
        answer: mean.abs() > 0.5,
        samples_used: m as u64,
        max_gap: mean.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::Cpt;
    use crate::graph::Dag;
    use crate::asgn::NoiseKind;

    fn chain(p: f64) -> DiscreteCbn {
        let dag = Dag::new(2, [(0, 1)]).unwrap();
        DiscreteCbn::new(
            dag,
            vec![2, 2],
            vec![
                Cpt::new(2, vec![0.5, 0.5]).unwrap(),
                Cpt::new(2, vec![p, 1.0 - p, 1.0 - p, p]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn threshold_variants() {
        assert_eq!(Threshold::default().value(0.2), 0.1);
        assert_eq!(Threshold::Printed.value(0.2), 0.2);
    }

    #[test]
    fn rejects_bad_arguments() {
        let cbn = chain(0.9);
        assert!(path_query_discrete(&cbn, 0, 0, 10, 0.1, 1).is_err());
        assert!(path_query_discrete(&cbn, 0, 2, 10, 0.1, 1).is_err());
        assert!(path_query_discrete(&cbn, 0, 1, 0, 0.1, 1).is_err());
        assert!(path_query_discrete(&cbn, 0, 1, 10, 0.0, 1).is_err());
        assert!(transitive_query_discrete(&cbn, 0, 1, &[0], 10, 0.1, 1).is_err());
    }

    #[test]
    fn chain_edge_and_reverse() {
        let cbn = chain(0.9);
        let fwd = path_query_discrete(&cbn, 0, 1, 2000, 0.4, 3).unwrap();
        assert!(fwd.answer);
        assert_eq!(fwd.samples_used, 4000);
        let back = path_query_discrete(&cbn, 1, 0, 2000, 0.4, 3).unwrap();
        assert!(!back.answer);
        assert!(back.max_gap < 0.1);
    }

    #[test]
    fn empty_conditioning_set_matches_path_query() {
        let cbn = chain(0.7);
        for seed in 0..5 {
            let a = path_query_discrete(&cbn, 0, 1, 50, 0.3, seed).unwrap();
            let b = transitive_query_discrete(&cbn, 0, 1, &[], 50, 0.3, seed).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn exact_tie_answers_zero() {
        // A one-hot CPT makes the gap exactly 1.
        let cbn = chain(1.0);
        let q = path_query_discrete(&cbn, 0, 1, 10, 1.0, 0).unwrap();
        assert_eq!(q.max_gap, 1.0);
        assert!(!q.answer);
    }

    #[test]
    fn perfect_imperfect_query_matches_plain_query() {
        let cbn = chain(0.7);
        let wrapped = ImperfectSampler::new(&cbn, vec![1.0; 2]).unwrap();
        for seed in 0..5 {
            let a = path_query_discrete(&cbn, 0, 1, 40, 0.2, seed).unwrap();
            let b = path_query_discrete_imperfect(&wrapped, 0, 1, 40, 0.2, seed).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn degenerate_conditioning_is_an_error() {
        // phi = 1/2 with m = 1 misses with probability 1/2 per value.
        let cbn = chain(0.7);
        let wrapped = ImperfectSampler::new(&cbn, vec![0.5; 2]).unwrap();
        let hit = (0..64).any(|seed| {
            matches!(
                path_query_discrete_imperfect(&wrapped, 0, 1, 1, 0.2, seed),
                Err(Error::DegenerateSample { .. })
            )
        });
        assert!(hit);
    }

    #[test]
    fn batched_sampler_shares_draws_across_targets() {
        let dag = Dag::new(3, [(0, 1), (0, 2)]).unwrap();
        let cpt = Cpt::new(2, vec![0.8, 0.2, 0.3, 0.7]).unwrap();
        let cbn = DiscreteCbn::new(dag, vec![2; 3], vec![Cpt::uniform(2), cpt.clone(), cpt]).unwrap();
        let batched = BatchedDiscrete::new(&cbn, 9);
        let spec = InterventionSpec::single(0, 1);
        let a = batched.sample_columns(&spec, &[1], 100, 1).unwrap();
        let b = batched.sample_columns(&spec, &[1, 2], 100, 2).unwrap();
        assert_eq!(a[0], b[0]);
        let all = cbn.sample(&spec, 100, derive_seed(9, &[0, 1])).unwrap();
        assert_eq!(all[2], b[1]);
    }

    #[test]
    fn continuous_queries() {
        let net = AsgnNetwork::from_weighted_edges(
            3,
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 0.5)],
            vec![1.0; 3],
            NoiseKind::Gaussian,
        )
        .unwrap();
        let q = path_query_continuous(&net, 0, 1, 4000, 2.0, 5).unwrap();
        assert!(q.answer);
        assert_eq!(q.samples_used, 4000);
        assert!(!path_query_continuous(&net, 2, 0, 4000, 2.0, 5).unwrap().answer);
        // Mean of X_2 with X_1 clamped at 0 and X_0 at 2 is 0.5 * 2 = 1.
        let t = transitive_query_continuous(&net, 0, 2, &[1], 4000, 0.0, 2.0, 5).unwrap();
        assert!(t.answer);
        let a = path_query_continuous(&net, 0, 2, 100, 2.0, 8).unwrap();
        let b = transitive_query_continuous(&net, 0, 2, &[], 100, 0.0, 2.0, 8).unwrap();
        assert_eq!(a, b);
    }
}
