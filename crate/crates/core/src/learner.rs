//! Sample-size planning and the two learning drivers.
//!
//! [`learn_tr`] asks a path query for every ordered pair and transitively
//! reduces the answers. [`learn_transitive_edges`] walks a topological order
//! of the reduced graph and asks, for each earlier vertex, whether it still
//! moves the child once the child's current parent estimate is clamped.
//!
//! Planner constants are the exact ceilings from the concentration
//! arguments, not just their orders:
//!
//! | regime | per distribution |
//! |---|---|
//! | discrete | `32/tau^2 (2 ln n + ln(2r/delta))`, `tau = gamma/2` |
//! | continuous | `8 sigma_ub (2 ln n + ln(2/delta))` |
//! | discrete, imperfect | `4/(alpha t^2) (2 ln n + ln(4r/delta))`, `t = gamma/8` |
//!
//! The transitive regimes reuse these with their own `gamma` or `sigma_ub`.
//! Discrete queries use `r` distributions per query (per assignment of the
//! conditioning set for transitive ones); continuous queries use one.

use serde::{Deserialize, Serialize};

use crate::asgn::{AsgnNetwork, ContinuousIntervention, WeightConstants};
use crate::discrete::{Assignments, DiscreteCbn, InterventionSpec, PMF_EQUALITY_TOL};
use crate::error::{Error, Result};
use crate::graph::{Dag, ReachabilityMatrix};
use crate::queries::QueryOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Discrete,
    Continuous,
    DiscreteImperfect,
    TransitiveDiscrete,
    TransitiveContinuous,
}

/// Problem constants for [`plan_samples`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "kebab-case")]
pub enum PlanInputs {
    Discrete { gamma: f64, r: usize },
    Continuous { sigma_ub: f64 },
    DiscreteImperfect { gamma: f64, r: usize, alpha: f64 },
    TransitiveDiscrete { gamma: f64, r: usize },
    TransitiveContinuous { sigma_ub: f64 },
}

impl PlanInputs {
    pub fn regime(&self) -> Regime {
        match self {
            PlanInputs::Discrete { .. } => Regime::Discrete,
            PlanInputs::Continuous { .. } => Regime::Continuous,
            PlanInputs::DiscreteImperfect { .. } => Regime::DiscreteImperfect,
            PlanInputs::TransitiveDiscrete { .. } => Regime::TransitiveDiscrete,
            PlanInputs::TransitiveContinuous { .. } => Regime::TransitiveContinuous,
        }
    }

    /// Continuous inputs from network constants; fails when `w_min = 0`.
    pub fn continuous(constants: &WeightConstants, transitive: bool) -> Result<Self> {
        if !constants.is_faithful() {
            return Err(Error::Faithfulness("w_min is zero: some edge effect cancels".into()));
        }
        Ok(if transitive {
            PlanInputs::TransitiveContinuous {
                sigma_ub: constants.sigma_ub,
            }
        } else {
            PlanInputs::Continuous {
                sigma_ub: constants.sigma_ub,
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSizePlan {
    pub regime: Regime,
    pub n: usize,
    pub delta: f64,
    pub inputs: PlanInputs,
    pub m_per_distribution: u64,
    /// Discrete: `r * m`; for transitive queries this is per assignment of
    /// the conditioning set.
    pub m_per_query: u64,
}

fn ceil_count(x: f64) -> Result<u64> {
    if !x.is_finite() || x >= u64::MAX as f64 {
        return Err(Error::invalid(format!("sample size {x} is not representable")));
    }
    Ok((x.ceil() as u64).max(1))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::Faithfulness(format!("gamma must be positive, got {gamma}")));
    }
    if !gamma.is_finite() {
        return Err(Error::invalid("gamma must be finite"));
    }
    Ok(())
}

fn check_r(r: usize) -> Result<()> {
    if r < 2 {
        return Err(Error::invalid(format!("domain bound r must be at least 2, got {r}")));
    }
    Ok(())
}

fn check_sigma(sigma_ub: f64) -> Result<()> {
    if !(sigma_ub.is_finite() && sigma_ub > 0.0) {
        return Err(Error::invalid(format!("sigma_ub must be positive and finite, got {sigma_ub}")));
    }
    Ok(())
}

pub fn plan_samples(inputs: PlanInputs, n: usize, delta: f64) -> Result<SampleSizePlan> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    let ln_n2 = 2.0 * (n as f64).ln();
    let (m, per_query) = match inputs {
        PlanInputs::Discrete { gamma, r } | PlanInputs::TransitiveDiscrete { gamma, r } => {
            check_gamma(gamma)?;
            check_r(r)?;
            let tau = gamma / 2.0;
            let m = ceil_count(32.0 / (tau * tau) * (ln_n2 + (2.0 * r as f64 / delta).ln()))?;
            (m, r as u64)
        }
        PlanInputs::DiscreteImperfect { gamma, r, alpha } => {
            check_gamma(gamma)?;
            check_r(r)?;
            if !(0.5..=1.0).contains(&alpha) {
                return Err(Error::invalid(format!("alpha must lie in [1/2, 1], got {alpha}")));
            }
            let t = gamma / 8.0;
            let m = ceil_count(4.0 / (alpha * t * t) * (ln_n2 + (4.0 * r as f64 / delta).ln()))?;
            (m, r as u64)
        }
        PlanInputs::Continuous { sigma_ub } | PlanInputs::TransitiveContinuous { sigma_ub } => {
            check_sigma(sigma_ub)?;
            (ceil_count(8.0 * sigma_ub * (ln_n2 + (2.0 / delta).ln()))?, 1)
        }
    };
    Ok(SampleSizePlan {
        regime: inputs.regime(),
        n,
        delta,
        inputs,
        m_per_distribution: m,
        m_per_query: m.checked_mul(per_query).ok_or_else(|| Error::invalid("sample size overflows"))?,
    })
}

/// Edge-set comparison against a ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub learned_edges: usize,
    pub true_edges: usize,
}

impl EdgeMetrics {
    pub fn is_perfect(&self) -> bool {
        self.true_positives == self.learned_edges && self.true_positives == self.true_edges
    }
}

/// Precision, recall and F1 over directed edges. An empty learned set has
/// precision 1 and an empty truth has recall 1.
pub fn evaluate(truth: &Dag, learned: &Dag) -> Result<EdgeMetrics> {
    if truth.n() != learned.n() {
        return Err(Error::invalid(format!(
            "graphs differ in size: {} vs {}",
            truth.n(),
            learned.n()
        )));
    }
    let tp = learned.edges().into_iter().filter(|&(u, v)| truth.has_edge(u, v)).count();
    let (nl, nt) = (learned.edge_count(), truth.edge_count());
    let precision = if nl == 0 { 1.0 } else { tp as f64 / nl as f64 };
    let recall = if nt == 0 { 1.0 } else { tp as f64 / nt as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(EdgeMetrics {
        precision,
        recall,
        f1,
        true_positives: tp,
        learned_edges: nl,
        true_edges: nt,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub n: usize,
    pub learned_edges: Vec<(usize, usize)>,
    pub path_queries_issued: u64,
    pub transitive_queries_issued: u64,
    pub total_samples: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vs_truth: Option<EdgeMetrics>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RecoveryReport {
    pub fn with_truth(mut self, truth: &Dag) -> Result<Self> {
        let learned = Dag::new(self.n, self.learned_edges.iter().copied())?;
        self.vs_truth = Some(evaluate(truth, &learned)?);
        Ok(self)
    }
}

/// Asks `query(i, j)` for all `n(n-1)` ordered pairs, `i` outermost, and
/// returns the transitive reduction of the positive answers.
pub fn learn_tr<F>(n: usize, mut query: F) -> Result<(Dag, RecoveryReport)>
where
    F: FnMut(usize, usize) -> Result<QueryOutcome>,
{
    let mut edges = Vec::new();
    let mut issued = 0u64;
    let mut samples = 0u64;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let q = query(i, j)?;
            issued += 1;
            samples += q.samples_used;
            if q.answer {
                edges.push((i, j));
            }
        }
    }
    let estimate = match Dag::new(n, edges.iter().copied()) {
        Ok(g) => g,
        Err(Error::Cycle(_)) => return Err(Error::CyclicEstimate { edges: edges.len() }),
        Err(e) => return Err(e),
    };
    let tr = estimate.transitive_reduction();
    let report = RecoveryReport {
        n,
        learned_edges: tr.edges(),
        path_queries_issued: issued,
        total_samples: samples,
        ..RecoveryReport::default()
    };
    Ok((tr, report))
}

/// Adds transitive edges to a transitively reduced graph. For each vertex
/// `j` in topological order and each earlier vertex `i` (latest first) that
/// is not yet a parent, asks `tquery(i, j, parents)` with the current parent
/// estimate of `j`, which grows as edges are accepted.
pub fn learn_transitive_edges<F>(tr: &Dag, mut tquery: F) -> Result<(Dag, RecoveryReport)>
where
    F: FnMut(usize, usize, &[usize]) -> Result<QueryOutcome>,
{
    if !tr.is_transitively_reduced() {
        return Err(Error::invalid("input graph is not transitively reduced"));
    }
    let order = tr.topological_order()?;
    let mut parents: Vec<Vec<usize>> = (0..tr.n()).map(|v| tr.parents(v).to_vec()).collect();
    let mut issued = 0u64;
    let mut samples = 0u64;
    for b in 1..order.len() {
        let j = order[b];
        for &i in order[..b].iter().rev() {
            if parents[j].contains(&i) {
                continue;
            }
            let q = tquery(i, j, &parents[j])?;
            issued += 1;
            samples += q.samples_used;
            if q.answer {
                parents[j].push(i);
                parents[j].sort_unstable();
            }
        }
    }
    let g = Dag::new(
        tr.n(),
        parents.iter().enumerate().flat_map(|(j, ps)| ps.iter().map(move |&i| (i, j))),
    )?;
    let report = RecoveryReport {
        n: tr.n(),
        learned_edges: g.edges(),
        transitive_queries_issued: issued,
        total_samples: samples,
        ..RecoveryReport::default()
    };
    Ok((g, report))
}

fn noiseless(answer: bool) -> QueryOutcome {
    QueryOutcome {
        answer,
        samples_used: 0,
        max_gap: if answer { 1.0 } else { 0.0 },
    }
}

/// Exact path query from the closure.
pub fn oracle_path(reach: &ReachabilityMatrix, i: usize, j: usize) -> Result<QueryOutcome> {
    crate::graph::exact_path_query(reach, i, j).map(noiseless)
}

/// Exact transitive query from the structure: does a directed path from `i`
/// to `j` survive cutting every edge into `S`?
pub fn oracle_transitive(g: &Dag, i: usize, j: usize, s: &[usize]) -> Result<QueryOutcome> {
    let n = g.n();
    if i >= n || j >= n || i == j || s.iter().any(|&k| k >= n || k == i || k == j) {
        return Err(Error::invalid(format!("invalid transitive query ({i}, {j}, {s:?})")));
    }
    let mut blocked = vec![false; n];
    for &k in s {
        blocked[k] = true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![i];
    seen[i] = true;
    while let Some(u) = stack.pop() {
        for &c in g.children(u) {
            if c == j {
                return Ok(noiseless(true));
            }
            if !seen[c] && !blocked[c] {
                seen[c] = true;
                stack.push(c);
            }
        }
    }
    Ok(noiseless(false))
}

/// Exact discrete transitive query: does some assignment of `S` leave two
/// values of `X_i` with different exact marginals of `X_j`?
pub fn oracle_transitive_discrete(cbn: &DiscreteCbn, i: usize, j: usize, s: &[usize]) -> Result<QueryOutcome> {
    let sizes = cbn.domain_sizes();
    let mut best = 0.0f64;
    for assignment in Assignments::new(s, sizes) {
        let pmfs = (0..sizes[i])
            .map(|x| {
                let mut a = assignment.clone();
                a.push((i, x));
                cbn.exact_interventional_marginal(j, &InterventionSpec::new(a))
            })
            .collect::<Result<Vec<_>>>()?;
        for a in 0..pmfs.len() {
            for b in a + 1..pmfs.len() {
                best = best.max(pmfs[a].linf(&pmfs[b]));
            }
        }
    }
    Ok(QueryOutcome {
        answer: best >= PMF_EQUALITY_TOL,
        samples_used: 0,
        max_gap: best,
    })
}

/// Exact continuous transitive query from the analytic mean of `X_j` with
/// `S` clamped at `z1` and `X_i` at `z2`.
pub fn oracle_transitive_asgn(
    net: &AsgnNetwork,
    i: usize,
    j: usize,
    s: &[usize],
    z1: f64,
    z2: f64,
) -> Result<QueryOutcome> {
    if i == j || s.contains(&i) || s.contains(&j) {
        return Err(Error::invalid(format!("invalid transitive query ({i}, {j}, {s:?})")));
    }
    let mut a: Vec<(usize, f64)> = s.iter().map(|&k| (k, z1)).collect();
    a.push((i, z2));
    let (mean, _) = net.analytic_moments(j, &ContinuousIntervention::new(a))?;
    Ok(QueryOutcome {
        answer: mean.abs() > 0.5,
        samples_used: 0,
        max_gap: mean.abs(),
    })
}
