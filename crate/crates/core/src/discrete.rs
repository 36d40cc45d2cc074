//! Discrete causal Bayesian networks.
//!
//! CPT rows are indexed by parent configuration with the lowest-indexed
//! parent varying fastest: for parents `p_0 < p_1 < ...` the row of
//! configuration `(v_0, v_1, ...)` is `v_0 + d_0 * (v_1 + d_1 * (...))`.
//!
//! Interventions follow the manipulation theorem: intervened nodes lose their
//! incoming edges and are clamped. An imperfect intervention on node `i`
//! succeeds with probability `phi_i`; on failure the node takes a value drawn
//! uniformly from the rest of its domain, with its parents still cut.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::seed;

/// Largest joint state space the exact enumeration oracles will walk.
pub const ENUMERATION_CAP: u128 = 10_000_000;

/// Two PMFs closer than this in L-infinity are treated as equal.
pub const PMF_EQUALITY_TOL: f64 = 1e-12;

const CPT_ROW_TOL: f64 = 1e-9;

/// Resampling attempts per node when enforcing a gamma floor.
pub const GAMMA_RETRY_CAP: usize = 1000;

/// Probability mass function over `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_row(&probs, CPT_ROW_TOL).map_err(Error::Validation)?;
        Ok(Pmf { probs })
    }

    /// Builds an empirical PMF from counts; `total` must be positive.
    pub fn from_counts(counts: &[u64], total: u64) -> Self {
        let t = total as f64;
        Pmf {
            probs: counts.iter().map(|&c| c as f64 / t).collect(),
        }
    }

    pub fn point_mass(len: usize, at: usize) -> Self {
        let mut probs = vec![0.0; len];
        probs[at] = 1.0;
        Pmf { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn linf(&self, other: &Pmf) -> f64 {
        linf(&self.probs, &other.probs)
    }
}

pub(crate) fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn check_row(row: &[f64], tol: f64) -> std::result::Result<(), String> {
    if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(format!("row {row:?} has a negative or non-finite entry"));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(format!("row sums to {sum}, not 1"));
    }
    Ok(())
}

/// A set of `(node, value)` clamps, optionally imperfect.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InterventionSpec {
    pub assignments: Vec<(usize, usize)>,
    /// Per-node success probability, indexed by node id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success_prob: Option<Vec<f64>>,
}

impl InterventionSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn single(node: usize, value: usize) -> Self {
        InterventionSpec {
            assignments: vec![(node, value)],
            success_prob: None,
        }
    }

    pub fn new(assignments: Vec<(usize, usize)>) -> Self {
        InterventionSpec {
            assignments,
            success_prob: None,
        }
    }

    pub fn with_success_prob(mut self, phi: Option<Vec<f64>>) -> Self {
        self.success_prob = phi;
        self
    }

    pub fn targets(&self) -> Vec<usize> {
        self.assignments.iter().map(|&(v, _)| v).collect()
    }

    fn phi(&self, node: usize) -> f64 {
        self.success_prob.as_ref().map_or(1.0, |p| p[node])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    card: usize,
    /// Row-major: one row of length `card` per parent configuration.
    rows: Vec<f64>,
}

impl Cpt {
    pub fn new(card: usize, rows: Vec<f64>) -> Result<Self> {
        if card < 2 {
            return Err(Error::InvalidNetwork(format!("domain size {card} < 2")));
        }
        if rows.is_empty() || rows.len() % card != 0 {
            return Err(Error::InvalidNetwork(format!(
                "CPT with {} entries is not a whole number of rows of length {card}",
                rows.len()
            )));
        }
        for (k, row) in rows.chunks(card).enumerate() {
            check_row(row, CPT_ROW_TOL)
                .map_err(|e| Error::Validation(format!("CPT row {k}: {e}")))?;
        }
        Ok(Cpt { card, rows })
    }

    pub fn card(&self) -> usize {
        self.card
    }

    pub fn row_count(&self) -> usize {
        self.rows.len() / self.card
    }

    pub fn row(&self, config: usize) -> &[f64] {
        &self.rows[config * self.card..(config + 1) * self.card]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks(self.card)
    }

    pub fn uniform(card: usize) -> Self {
        Cpt {
            card,
            rows: vec![1.0 / card as f64; card],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCbn {
    dag: Dag,
    domain_sizes: Vec<usize>,
    cpts: Vec<Cpt>,
}

/// Minimum separation of interventional child PMFs over the network's edges.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaReport {
    /// `None` when no edge has a pair of distinct PMFs (including no edges).
    pub gamma: Option<f64>,
    /// Edges (or `(j, parent subset)` witnesses) where every PMF coincides.
    pub violations: Vec<(usize, usize)>,
}

impl GammaReport {
    pub fn is_faithful(&self) -> bool {
        self.violations.is_empty()
    }

    /// Gamma when the network is faithful and has at least one edge.
    pub fn value(&self) -> Option<f64> {
        if self.is_faithful() {
            self.gamma
        } else {
            None
        }
    }
}

impl DiscreteCbn {
    pub fn new(dag: Dag, domain_sizes: Vec<usize>, cpts: Vec<Cpt>) -> Result<Self> {
        let n = dag.n();
        if domain_sizes.len() != n || cpts.len() != n {
            return Err(Error::InvalidNetwork(format!(
                "{n} nodes but {} domain sizes and {} CPTs",
                domain_sizes.len(),
                cpts.len()
            )));
        }
        if domain_sizes.iter().any(|&d| !(2..=u16::MAX as usize).contains(&d)) {
            return Err(Error::InvalidNetwork("domain sizes must lie in 2..=65535".into()));
        }
        for (v, cpt) in cpts.iter().enumerate() {
            let configs: usize = dag.parents(v).iter().map(|&p| domain_sizes[p]).product();
            if cpt.card != domain_sizes[v] || cpt.row_count() != configs {
                return Err(Error::InvalidNetwork(format!(
                    "node {v}: CPT is {}x{}, expected {configs}x{}",
                    cpt.row_count(),
                    cpt.card,
                    domain_sizes[v]
                )));
            }
        }
        Ok(DiscreteCbn {
            dag,
            domain_sizes,
            cpts,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn n(&self) -> usize {
        self.dag.n()
    }

    pub fn domain_sizes(&self) -> &[usize] {
        &self.domain_sizes
    }

    pub fn domain_size(&self, v: usize) -> usize {
        self.domain_sizes[v]
    }

    pub fn max_domain_size(&self) -> usize {
        self.domain_sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn cpt(&self, v: usize) -> &Cpt {
        &self.cpts[v]
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    /// Row index of node `v`'s CPT for a full assignment `values`.
    #[inline]
    pub fn config_index(&self, v: usize, values: &[u16]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for &p in self.dag.parents(v) {
            idx += values[p] as usize * stride;
            stride *= self.domain_sizes[p];
        }
        idx
    }

    pub fn validate_spec(&self, spec: &InterventionSpec) -> Result<()> {
        let n = self.n();
        let mut seen = vec![false; n];
        for &(v, x) in &spec.assignments {
            if v >= n {
                return Err(Error::invalid(format!("intervened node {v} out of range")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::invalid(format!("node {v} intervened twice")));
            }
            if x >= self.domain_sizes[v] {
                return Err(Error::invalid(format!(
                    "value {x} outside the domain of node {v} (size {})",
                    self.domain_sizes[v]
                )));
            }
        }
        if let Some(phi) = &spec.success_prob {
            if phi.len() != n {
                return Err(Error::invalid("success probabilities must cover every node"));
            }
            if let Some(bad) = phi.iter().find(|p| !(0.5..=1.0).contains(*p)) {
                return Err(Error::invalid(format!("success probability {bad} outside [1/2, 1]")));
            }
        }
        Ok(())
    }

    /// Cuts every edge into `targets` and replaces their CPTs with a uniform
    /// single-row placeholder; the clamp value is supplied at sampling time.
    pub fn mutilate(&self, targets: &[usize]) -> DiscreteCbn {
        let dag = self.dag.mutilate(targets);
        let mut cpts = self.cpts.clone();
        for &t in targets {
            cpts[t] = Cpt::uniform(self.domain_sizes[t]);
        }
        DiscreteCbn {
            dag,
            domain_sizes: self.domain_sizes.clone(),
            cpts,
        }
    }

    /// Ancestral sampling of all `n` variables; returns one column per node.
    pub fn sample(&self, spec: &InterventionSpec, m: usize, seed: u64) -> Result<Vec<Vec<u16>>> {
        let all: Vec<usize> = (0..self.n()).collect();
        self.sample_columns(spec, &all, m, seed)
    }

    /// Samples only the variables needed for `targets` (their ancestors in
    /// the mutilated graph) and returns one column per target.
    pub fn sample_columns(
        &self,
        spec: &InterventionSpec,
        targets: &[usize],
        m: usize,
        seed: u64,
    ) -> Result<Vec<Vec<u16>>> {
        self.validate_spec(spec)?;
        if m == 0 {
            return Err(Error::invalid("sample size m must be at least 1"));
        }
        if let Some(&t) = targets.iter().find(|&&t| t >= self.n()) {
            return Err(Error::invalid(format!("target {t} out of range")));
        }
        let sim = SamplingPlan::new(self, spec, targets);
        let mut rng = seed::rng(seed);
        let mut values = vec![0u16; self.n()];
        let mut columns: Vec<Vec<u16>> = targets.iter().map(|_| Vec::with_capacity(m)).collect();
        for _ in 0..m {
            sim.draw(&mut rng, &mut values);
            for (col, &t) in columns.iter_mut().zip(targets) {
                col.push(values[t]);
            }
        }
        Ok(columns)
    }

    /// Exact joint distribution of `targets` under `spec`, indexed with the
    /// first target varying fastest.
    ///
    /// Walks the ancestral set of the targets in the mutilated graph in
    /// topological order, multiplying each node's CPT into a joint over the
    /// live frontier and summing a node out once all its children in the set
    /// are placed. The frontier's state count is capped at
    /// [`ENUMERATION_CAP`].
    pub fn exact_joint(&self, targets: &[usize], spec: &InterventionSpec) -> Result<Vec<f64>> {
        self.validate_spec(spec)?;
        let n = self.n();
        let mut is_target = vec![false; n];
        for &t in targets {
            if t >= n {
                return Err(Error::invalid(format!("target {t} out of range")));
            }
            if std::mem::replace(&mut is_target[t], true) {
                return Err(Error::invalid(format!("target {t} repeated")));
            }
        }
        let mut fixed: Vec<Option<u16>> = vec![None; n];
        let mut soft: Vec<Option<Vec<f64>>> = vec![None; n];
        for &(v, x) in &spec.assignments {
            let phi = spec.phi(v);
            if phi >= 1.0 {
                fixed[v] = Some(x as u16);
            } else {
                soft[v] = Some(clamp_pmf(self.domain_sizes[v], x, phi));
            }
        }
        let clamped = |v: usize| fixed[v].is_some() || soft[v].is_some();
        let order = self.dag.ancestral_set(targets, &spec.targets());
        let mut pending = vec![0usize; n];
        for &v in &order {
            if !clamped(v) {
                for &p in self.dag.parents(v) {
                    pending[p] += 1;
                }
            }
        }

        let mut values = vec![0u16; n];
        for v in 0..n {
            if let Some(x) = fixed[v] {
                values[v] = x;
            }
        }
        let mut factor = Factor::unit();
        for &v in &order {
            if fixed[v].is_none() {
                let d = self.domain_sizes[v];
                let states = factor.table.len() as u128 * d as u128;
                if states > ENUMERATION_CAP {
                    return Err(Error::Capacity {
                        what: format!("exact marginal of {targets:?} (frontier {:?} + node {v})", factor.nodes),
                        states,
                        cap: ENUMERATION_CAP,
                    });
                }
                let len = factor.table.len();
                let mut table = vec![0.0; len * d];
                for idx in 0..len {
                    let w = factor.table[idx];
                    if w == 0.0 {
                        continue;
                    }
                    factor.decode(idx, &mut values);
                    let row: &[f64] = match &soft[v] {
                        Some(pmf) => pmf,
                        None => self.cpts[v].row(self.config_index(v, &values)),
                    };
                    for (x, &p) in row.iter().enumerate() {
                        table[idx + len * x] = w * p;
                    }
                }
                factor.nodes.push(v);
                factor.sizes.push(d);
                factor.table = table;
            }
            if !clamped(v) {
                for &p in self.dag.parents(v) {
                    pending[p] -= 1;
                    if pending[p] == 0 && !is_target[p] {
                        factor.sum_out(p);
                    }
                }
            }
        }

        let out_len: usize = targets.iter().map(|&t| self.domain_sizes[t]).product();
        let mut out = vec![0.0; out_len];
        for idx in 0..factor.table.len() {
            factor.decode(idx, &mut values);
            let mut o = 0;
            let mut stride = 1;
            for &t in targets {
                o += values[t] as usize * stride;
                stride *= self.domain_sizes[t];
            }
            out[o] += factor.table[idx];
        }
        Ok(out)
    }

    /// Exact `p(X_j | do(spec))`.
    pub fn exact_interventional_marginal(&self, j: usize, spec: &InterventionSpec) -> Result<Pmf> {
        if j >= self.n() {
            return Err(Error::invalid(format!("target {j} out of range")));
        }
        Ok(Pmf {
            probs: self.exact_joint(&[j], spec)?,
        })
    }

    /// `p(X_j | do(spec))` for a non-intervened `j`, from the joint of its
    /// parents and a CPT for `j`.
    fn child_marginal(&self, cpt: &Cpt, parent_joint: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; cpt.card];
        for (config, &w) in parent_joint.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(cpt.row(config)) {
                *o += w * p;
            }
        }
        out
    }

    /// Joint of `parents(j)` under `do(i = x)` for every `x`, in parent-config
    /// order. Used for both gamma and gamma-constrained generation.
    fn parent_joints_under(&self, i: usize, j: usize) -> Result<Vec<Vec<f64>>> {
        let parents = self.dag.parents(j);
        (0..self.domain_sizes[i])
            .map(|x| self.exact_joint(parents, &InterventionSpec::single(i, x)))
            .collect()
    }

    /// Gamma over the network's edges: for each edge `(i,j)`, the smallest
    /// L-infinity gap between distinct `p(X_j | do(X_i = x))`; then the
    /// minimum over edges.
    pub fn compute_gamma(&self) -> Result<GammaReport> {
        let mut gamma: Option<f64> = None;
        let mut violations = Vec::new();
        for (i, j) in self.dag.edges() {
            let pmfs: Vec<Vec<f64>> = self
                .parent_joints_under(i, j)?
                .iter()
                .map(|joint| self.child_marginal(&self.cpts[j], joint))
                .collect();
            match min_distinct_gap(&pmfs) {
                Some(g) => gamma = Some(gamma.map_or(g, |cur| cur.min(g))),
                None => violations.push((i, j)),
            }
        }
        Ok(GammaReport { gamma, violations })
    }

    /// Gamma for transitive queries: minimum over `j` and non-empty parent
    /// subsets `S` of the smallest gap between distinct `p(X_j | do(X_S))`.
    /// A violation entry `(j, mask)` names the child and the subset bitmask.
    pub fn compute_gamma_transitive(&self) -> Result<GammaReport> {
        let mut gamma: Option<f64> = None;
        let mut violations = Vec::new();
        for j in 0..self.n() {
            let parents = self.dag.parents(j);
            if parents.len() > 20 {
                return Err(Error::Capacity {
                    what: format!("parent subsets of node {j}"),
                    states: 1u128 << parents.len(),
                    cap: 1 << 20,
                });
            }
            for mask in 1usize..(1 << parents.len()) {
                let subset: Vec<usize> = parents
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &p)| p)
                    .collect();
                let configs: u128 = subset
                    .iter()
                    .map(|&p| self.domain_sizes[p] as u128)
                    .product();
                if configs > ENUMERATION_CAP {
                    return Err(Error::Capacity {
                        what: format!("assignments of parent subset {subset:?} of node {j}"),
                        states: configs,
                        cap: ENUMERATION_CAP,
                    });
                }
                let mut pmfs = Vec::with_capacity(configs as usize);
                for assignment in Assignments::new(&subset, &self.domain_sizes) {
                    let spec = InterventionSpec::new(assignment);
                    pmfs.push(self.exact_joint(&[j], &spec)?);
                }
                match min_distinct_gap(&pmfs) {
                    Some(g) => gamma = Some(gamma.map_or(g, |cur| cur.min(g))),
                    None => violations.push((j, mask)),
                }
            }
        }
        Ok(GammaReport { gamma, violations })
    }

    /// Observational marginals of every node, exact.
    pub fn observational_marginals(&self) -> Result<Vec<Pmf>> {
        (0..self.n())
            .map(|j| self.exact_interventional_marginal(j, &InterventionSpec::none()))
            .collect()
    }
}

/// Smallest L-infinity gap among pairs that differ by more than
/// [`PMF_EQUALITY_TOL`], or `None` if all coincide.
pub(crate) fn min_distinct_gap(pmfs: &[Vec<f64>]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for a in 0..pmfs.len() {
        for b in a + 1..pmfs.len() {
            let g = linf(&pmfs[a], &pmfs[b]);
            if g >= PMF_EQUALITY_TOL {
                best = Some(best.map_or(g, |cur| cur.min(g)));
            }
        }
    }
    best
}

fn clamp_pmf(d: usize, x: usize, phi: f64) -> Vec<f64> {
    let miss = if d > 1 { (1.0 - phi) / (d - 1) as f64 } else { 0.0 };
    (0..d).map(|k| if k == x { phi } else { miss }).collect()
}

/// Dense table over `nodes`, first node varying fastest.
struct Factor {
    nodes: Vec<usize>,
    sizes: Vec<usize>,
    table: Vec<f64>,
}

impl Factor {
    fn unit() -> Self {
        Factor {
            nodes: Vec::new(),
            sizes: Vec::new(),
            table: vec![1.0],
        }
    }

    fn decode(&self, mut idx: usize, values: &mut [u16]) {
        for (&v, &d) in self.nodes.iter().zip(&self.sizes) {
            values[v] = (idx % d) as u16;
            idx /= d;
        }
    }

    /// No-op when `v` is not in the factor (clamped nodes).
    fn sum_out(&mut self, v: usize) {
        let Some(k) = self.nodes.iter().position(|&u| u == v) else {
            return;
        };
        let inner: usize = self.sizes[..k].iter().product();
        let d = self.sizes[k];
        let mut table = vec![0.0; self.table.len() / d];
        for (idx, &w) in self.table.iter().enumerate() {
            let lo = idx % inner;
            let hi = idx / (inner * d);
            table[lo + hi * inner] += w;
        }
        self.nodes.remove(k);
        self.sizes.remove(k);
        self.table = table;
    }
}

/// Iterates joint assignments of `nodes` in lexicographic order with the
/// first node varying fastest.
pub struct Assignments<'a> {
    nodes: &'a [usize],
    sizes: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl<'a> Assignments<'a> {
    pub fn new(nodes: &'a [usize], domain_sizes: &[usize]) -> Self {
        Assignments {
            nodes,
            sizes: nodes.iter().map(|&v| domain_sizes[v]).collect(),
            current: vec![0; nodes.len()],
            done: false,
        }
    }
}

impl Iterator for Assignments<'_> {
    type Item = Vec<(usize, usize)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.nodes.iter().copied().zip(self.current.iter().copied()).collect();
        self.done = true;
        for k in 0..self.current.len() {
            self.current[k] += 1;
            if self.current[k] < self.sizes[k] {
                self.done = false;
                break;
            }
            self.current[k] = 0;
        }
        Some(item)
    }
}

enum Step {
    Cpt {
        node: usize,
        parents: Vec<(usize, usize)>,
        card: usize,
        cumulative: Vec<f64>,
    },
    Clamp {
        node: usize,
        value: u16,
        phi: f64,
        card: usize,
    },
}

/// Precomputed ancestral sampling schedule for one intervention.
struct SamplingPlan {
    steps: Vec<Step>,
}

impl SamplingPlan {
    fn new(cbn: &DiscreteCbn, spec: &InterventionSpec, targets: &[usize]) -> Self {
        let mut clamp: Vec<Option<usize>> = vec![None; cbn.n()];
        for &(v, x) in &spec.assignments {
            clamp[v] = Some(x);
        }
        let order = cbn.dag.ancestral_set(targets, &spec.targets());
        let steps = order
            .into_iter()
            .map(|v| {
                let card = cbn.domain_sizes[v];
                match clamp[v] {
                    Some(x) => Step::Clamp {
                        node: v,
                        value: x as u16,
                        phi: spec.phi(v),
                        card,
                    },
                    None => {
                        let mut stride = 1;
                        let parents = cbn
                            .dag
                            .parents(v)
                            .iter()
                            .map(|&p| {
                                let s = stride;
                                stride *= cbn.domain_sizes[p];
                                (p, s)
                            })
                            .collect();
                        let cumulative = cbn.cpts[v]
                            .rows()
                            .flat_map(|row| {
                                let mut acc = 0.0;
                                row.iter()
                                    .map(move |&p| {
                                        acc += p;
                                        acc
                                    })
                                    .collect::<Vec<_>>()
                            })
                            .collect();
                        Step::Cpt {
                            node: v,
                            parents,
                            card,
                            cumulative,
                        }
                    }
                }
            })
            .collect();
        SamplingPlan { steps }
    }

    #[inline]
    fn draw<R: Rng>(&self, rng: &mut R, values: &mut [u16]) {
        for step in &self.steps {
            match step {
                Step::Cpt {
                    node,
                    parents,
                    card,
                    cumulative,
                } => {
                    let mut config = 0;
                    for &(p, stride) in parents {
                        config += values[p] as usize * stride;
                    }
                    let row = &cumulative[config * card..(config + 1) * card];
                    let u: f64 = rng.random();
                    // Branch-free inverse CDF: the count of cumulative
                    // entries at or below `u`.
                    let x = row[..card - 1].iter().map(|&c| usize::from(c <= u)).sum::<usize>();
                    values[*node] = x as u16;
                }
                Step::Clamp {
                    node,
                    value,
                    phi,
                    card,
                } => {
                    values[*node] = if *phi >= 1.0 || rng.random::<f64>() < *phi {
                        *value
                    } else {
                        let k = rng.random_range(0..*card as u16 - 1);
                        if k >= *value {
                            k + 1
                        } else {
                            k
                        }
                    };
                }
            }
        }
    }
}

/// Uniform draw from the probability simplex of dimension `d`.
fn simplex_row<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..d).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let sum: f64 = row.iter().sum();
    for p in &mut row {
        *p /= sum;
    }
    row
}

/// Random CPTs on `dag`: domain sizes uniform on `2..=r_max`, rows uniform on
/// the simplex. With `gamma_floor > 0`, each node's CPT is resampled (in
/// topological order, ancestors fixed) until every edge into it separates
/// its interventional PMFs by at least the floor.
pub fn random_discrete_cbn(dag: &Dag, r_max: usize, gamma_floor: f64, seed: u64) -> Result<DiscreteCbn> {
    if r_max < 2 {
        return Err(Error::invalid(format!("r_max {r_max} < 2")));
    }
    let n = dag.n();
    let mut rng = seed::rng(seed);
    let domain_sizes: Vec<usize> = (0..n).map(|_| rng.random_range(2..=r_max)).collect();
    let mut cbn = DiscreteCbn {
        dag: dag.clone(),
        cpts: domain_sizes.iter().map(|&d| Cpt::uniform(d)).collect(),
        domain_sizes,
    };
    for j in dag.topo() {
        let d = cbn.domain_sizes[j];
        let configs: usize = dag.parents(j).iter().map(|&p| cbn.domain_sizes[p]).product();
        let joints: Vec<Vec<Vec<f64>>> = if gamma_floor > 0.0 {
            dag.parents(j)
                .iter()
                .map(|&i| cbn.parent_joints_under(i, j))
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        let mut attempts = 0;
        loop {
            attempts += 1;
            let rows: Vec<f64> = (0..configs).flat_map(|_| simplex_row(&mut rng, d)).collect();
            let candidate = Cpt { card: d, rows };
            let ok = joints.iter().all(|per_value| {
                let pmfs: Vec<Vec<f64>> = per_value
                    .iter()
                    .map(|joint| cbn.child_marginal(&candidate, joint))
                    .collect();
                min_distinct_gap(&pmfs).is_some_and(|g| g >= gamma_floor)
            });
            if ok {
                cbn.cpts[j] = candidate;
                break;
            }
            if attempts >= GAMMA_RETRY_CAP {
                return Err(Error::GenerationFailure {
                    attempts,
                    reason: format!("node {j} never reached gamma >= {gamma_floor}"),
                });
            }
        }
    }
    Ok(cbn)
}
