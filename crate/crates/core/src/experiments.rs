//! Experiment harness: phase transitions on random networks, the
//! transitive-edge census of benchmark networks, and full recovery runs.
//!
//! All randomness derives from the configured root seed:
//!
//! ```text
//! network for (n, trial)      derive_seed(seed, [n, trial, 0])
//! queries for (n, trial, C_k) derive_seed(seed, [n, trial, 1, k])
//! ```
//!
//! so every `C` of a curve sees the same networks, and any single trial can
//! be replayed alone.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::asgn::{random_asgn, AsgnNetwork};
use crate::discrete::{random_discrete_cbn, DiscreteCbn};
use crate::error::{Error, Result};
use crate::graph::{random_tr_dag, Dag};
use crate::learner::{
    learn_tr, learn_transitive_edges, oracle_path, oracle_transitive, plan_samples, PlanInputs, RecoveryReport,
};
use crate::model_io::{load_network, CurveRow, NamedNetwork, NetworkPayload};
use crate::queries::{
    path_query_continuous, path_query_discrete, path_query_discrete_imperfect, transitive_query_continuous,
    transitive_query_discrete, BatchedContinuous, BatchedDiscrete, ContinuousSampler, DiscreteSampler,
    ImperfectSampler, Threshold,
};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PhaseTransition,
    Census,
    BenchmarkRecovery,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[default]
    Discrete,
    Continuous,
}

/// Intervention variance for imperfect continuous interventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Nu2 {
    /// `nu_i^2 = sigma_i^2`.
    MatchNoise,
    Fixed(f64),
}

fn default_trials() -> usize {
    20
}
fn default_delta() -> f64 {
    0.01
}
fn default_seed() -> u64 {
    1
}
fn default_density() -> f64 {
    0.1
}
fn default_r_max() -> usize {
    5
}
fn default_gamma_floor() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub family: Family,
    #[serde(default)]
    pub n_values: Vec<usize>,
    #[serde(default)]
    pub c_grid: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Edge probability of the random DAG before reduction.
    #[serde(default = "default_density")]
    pub edge_density: f64,
    #[serde(default = "default_r_max")]
    pub r_max: usize,
    /// Generator floor on gamma; also the gamma the discrete queries assume.
    #[serde(default = "default_gamma_floor")]
    pub gamma_floor: f64,
    /// Imperfect discrete interventions with `phi_i = alpha` for all `i`.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Imperfect continuous interventions.
    #[serde(default)]
    pub nu2: Option<Nu2>,
    #[serde(default)]
    pub threshold: Threshold,
    #[serde(default)]
    pub batched: bool,
    /// Census and benchmark inputs.
    #[serde(default)]
    pub networks: Vec<PathBuf>,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default)]
    pub m_override: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Validation(format!("bad experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Validation("trials must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Validation(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if let Some(c) = self.c_grid.iter().find(|c| !c.is_finite()) {
            return Err(Error::Validation(format!("C value {c} is not finite")));
        }
        if !(self.edge_density > 0.0 && self.edge_density <= 1.0) {
            return Err(Error::Validation("edge_density must lie in (0, 1]".into()));
        }
        if let Some(a) = self.alpha {
            if !(0.5..=1.0).contains(&a) {
                return Err(Error::Validation(format!("alpha must lie in [1/2, 1], got {a}")));
            }
        }
        if let Some(Nu2::Fixed(v)) = self.nu2 {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Validation(format!("nu2 must be non-negative, got {v}")));
            }
        }
        if self.kind == ExperimentKind::PhaseTransition {
            if self.n_values.is_empty() || self.c_grid.is_empty() {
                return Err(Error::Validation("phase transitions need n_values and c_grid".into()));
            }
            if let Some(&n) = self.n_values.iter().find(|&&n| n < 2) {
                return Err(Error::Validation(format!("n = {n} is too small")));
            }
        }
        Ok(())
    }
}

/// Samples per query at control parameter `C`: `e^C ln(n r)` for discrete
/// networks and `e^C ln n` for continuous ones.
pub fn samples_for_c(family: Family, n: usize, r: usize, c: f64) -> u64 {
    let scale = match family {
        Family::Discrete => ((n * r) as f64).ln(),
        Family::Continuous => (n as f64).ln(),
    };
    ((c.exp() * scale).ceil() as u64).max(1)
}

/// One simulated network ready for queries.
#[derive(Debug, Clone)]
pub enum Simulated {
    Discrete { cbn: DiscreteCbn, alpha: Option<f64> },
    Continuous { net: AsgnNetwork },
}

impl Simulated {
    pub fn dag(&self) -> &Dag {
        match self {
            Simulated::Discrete { cbn, .. } => cbn.dag(),
            Simulated::Continuous { net } => net.dag(),
        }
    }
}

/// Network for one phase-transition trial.
pub fn generate_trial_network(cfg: &ExperimentConfig, n: usize, trial: usize) -> Result<Simulated> {
    let seed = derive_seed(cfg.seed, &[n as u64, trial as u64, 0]);
    let context = |e: Error| match e {
        Error::GenerationFailure { attempts, reason } => Error::GenerationFailure {
            attempts,
            reason: format!("n = {n}, trial = {trial}: {reason}"),
        },
        other => other,
    };
    let dag = random_tr_dag(n, cfg.edge_density, derive_seed(seed, &[0])).map_err(context)?;
    match cfg.family {
        Family::Discrete => {
            let cbn = random_discrete_cbn(&dag, cfg.r_max, cfg.gamma_floor, derive_seed(seed, &[1])).map_err(context)?;
            Ok(Simulated::Discrete { cbn, alpha: cfg.alpha })
        }
        Family::Continuous => {
            let net = random_asgn(&dag, derive_seed(seed, &[1])).map_err(context)?;
            let net = match cfg.nu2 {
                None => net,
                Some(Nu2::MatchNoise) => {
                    let v = net.noise_variances().to_vec();
                    net.with_intervention_variances(Some(v))?
                }
                Some(Nu2::Fixed(v)) => {
                    let n = net.n();
                    net.with_intervention_variances(Some(vec![v; n]))?
                }
            };
            Ok(Simulated::Continuous { net })
        }
    }
}

/// Path-query settings shared by every pair of one learning run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathQuerySettings {
    pub m: u64,
    /// Discrete: the gamma the threshold derives from.
    pub gamma: f64,
    pub threshold: Threshold,
    /// Continuous: intervention value `1 / w_min`.
    pub z: f64,
    pub batched: bool,
    pub seed: u64,
}

fn as_usize(m: u64) -> Result<usize> {
    usize::try_from(m).map_err(|_| Error::invalid(format!("sample size {m} too large")))
}

/// Runs the path-query phase on a simulated network.
pub fn learn_tr_simulated(sim: &Simulated, s: &PathQuerySettings) -> Result<(Dag, RecoveryReport)> {
    let m = as_usize(s.m)?;
    let n = sim.dag().n();
    let qseed = |i: usize, j: usize| derive_seed(s.seed, &[i as u64, j as u64]);
    match sim {
        Simulated::Discrete { cbn, alpha } => {
            let thr = s.threshold.value(s.gamma);
            let run = |sampler: &dyn DiscreteSampler, imperfect: bool| {
                learn_tr(n, |i, j| {
                    if imperfect {
                        path_query_discrete_imperfect(sampler, i, j, m, thr, qseed(i, j))
                    } else {
                        path_query_discrete(sampler, i, j, m, thr, qseed(i, j))
                    }
                })
            };
            match alpha {
                None if s.batched => run(&BatchedDiscrete::new(cbn, s.seed), false),
                None => run(cbn, false),
                Some(a) => {
                    let imp = ImperfectSampler::new(cbn, vec![*a; n])?;
                    if s.batched {
                        run(&BatchedDiscrete::new(&imp, s.seed), true)
                    } else {
                        run(&imp, true)
                    }
                }
            }
        }
        Simulated::Continuous { net } => {
            let run = |sampler: &dyn ContinuousSampler| {
                learn_tr(n, |i, j| path_query_continuous(sampler, i, j, m, s.z, qseed(i, j)))
            };
            if s.batched {
                run(&BatchedContinuous::new(net, s.seed))
            } else {
                run(net)
            }
        }
    }
}

fn trial_settings(cfg: &ExperimentConfig, sim: &Simulated, m: u64, seed: u64) -> Result<PathQuerySettings> {
    let z = match sim {
        Simulated::Continuous { net } => {
            let c = net.compute_wmin_wmax();
            c.z.ok_or_else(|| Error::Faithfulness("w_min is zero".into()))?
        }
        Simulated::Discrete { .. } => 0.0,
    };
    Ok(PathQuerySettings {
        m,
        gamma: cfg.gamma_floor,
        threshold: cfg.threshold,
        z,
        batched: cfg.batched,
        seed,
    })
}

/// Exact-recovery frequency of the transitive reduction at each `(n, C)`.
pub fn run_phase_transition(cfg: &ExperimentConfig) -> Result<Vec<CurveRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &n in &cfg.n_values {
        let ms: Vec<u64> = cfg
            .c_grid
            .iter()
            .map(|&c| cfg.m_override.unwrap_or_else(|| samples_for_c(cfg.family, n, cfg.r_max, c)))
            .collect();
        let mut successes = vec![0usize; cfg.c_grid.len()];
        for trial in 0..cfg.trials {
            let sim = generate_trial_network(cfg, n, trial)?;
            for (k, &m) in ms.iter().enumerate() {
                let seed = derive_seed(cfg.seed, &[n as u64, trial as u64, 1, k as u64]);
                let settings = trial_settings(cfg, &sim, m, seed)?;
                match learn_tr_simulated(&sim, &settings) {
                    Ok((learned, _)) if learned == *sim.dag() => successes[k] += 1,
                    Ok(_) => {}
                    Err(e @ (Error::CyclicEstimate { .. } | Error::DegenerateSample { .. })) => {
                        info!("n = {n}, trial = {trial}, C = {}: counted as failure: {e}", cfg.c_grid[k]);
                    }
                    Err(e) => return Err(e),
                }
            }
            info!("n = {n}: trial {}/{} done", trial + 1, cfg.trials);
        }
        for (k, &c) in cfg.c_grid.iter().enumerate() {
            rows.push(CurveRow {
                n,
                c,
                m: ms[k],
                trials: cfg.trials,
                successes: successes[k],
            });
        }
    }
    Ok(rows)
}

/// Polyline chart of frequency against `C`, one series per `n`.
pub fn curve_svg(rows: &[CurveRow]) -> String {
    const W: f64 = 480.0;
    const H: f64 = 320.0;
    const PAD: f64 = 40.0;
    let cmin = rows.iter().map(|r| r.c).fold(f64::INFINITY, f64::min);
    let cmax = rows.iter().map(|r| r.c).fold(f64::NEG_INFINITY, f64::max);
    let span = if cmax > cmin { cmax - cmin } else { 1.0 };
    let x = |c: f64| PAD + (c - cmin) / span * (W - 2.0 * PAD);
    let y = |f: f64| H - PAD - f * (H - 2.0 * PAD);
    let colors = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.dedup();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n<line x1=\"{PAD}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{b}\" stroke=\"black\"/>",
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\">C</text>", W / 2.0, H - 8.0);
    let _ = writeln!(out, "<text x=\"4\" y=\"{}\">P(exact)</text>", PAD - 12.0);
    for f in [0.0, 0.5, 1.0] {
        let _ = writeln!(out, "<text x=\"12\" y=\"{:.1}\">{f}</text>", y(f) + 4.0);
    }
    for (k, n) in ns.iter().enumerate() {
        let color = colors[k % colors.len()];
        let pts: Vec<String> = rows
            .iter()
            .filter(|r| r.n == *n)
            .map(|r| format!("{:.1},{:.1}", x(r.c), y(r.frequency())))
            .collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">n = {n}</text>",
            W - PAD - 50.0,
            PAD + 14.0 * k as f64
        );
    }
    out.push_str("</svg>\n");
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub name: String,
    pub nodes: usize,
    pub edges: usize,
    pub transitive_edges: usize,
    /// `transitive_edges / edges`, 0 for an empty graph.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub rows: Vec<CensusRow>,
    pub failures: Vec<(String, String)>,
    pub mean_ratio: Option<f64>,
    pub median_ratio: Option<f64>,
}

impl CensusReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("network,nodes,edges,transitive_edges,ratio_percent\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.2}",
                r.name, r.nodes, r.edges, r.transitive_edges, 100.0 * r.ratio
            );
        }
        if let (Some(mean), Some(median)) = (self.mean_ratio, self.median_ratio) {
            let _ = writeln!(out, "mean,,,,{:.2}\nmedian,,,,{:.2}", 100.0 * mean, 100.0 * median);
        }
        out
    }
}

pub fn census_row(net: &NamedNetwork) -> CensusRow {
    let g = net.dag();
    let edges = g.edge_count();
    let transitive_edges = g.count_transitive_edges();
    CensusRow {
        name: net.name.clone(),
        nodes: g.n(),
        edges,
        transitive_edges,
        ratio: if edges == 0 { 0.0 } else { transitive_edges as f64 / edges as f64 },
    }
}

/// Census over network files; files that fail to load are listed in
/// `failures` and skipped.
pub fn run_census(paths: &[PathBuf]) -> CensusReport {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for p in paths {
        match load_network(p) {
            Ok(net) => rows.push(census_row(&net)),
            Err(e) => {
                warn!("{}: {e}", p.display());
                failures.push((p.display().to_string(), e.to_string()));
            }
        }
    }
    let mut ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let mean_ratio = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
    let median_ratio = (!ratios.is_empty()).then(|| {
        let k = ratios.len();
        if k % 2 == 1 {
            ratios[k / 2]
        } else {
            (ratios[k / 2 - 1] + ratios[k / 2]) / 2.0
        }
    });
    CensusReport {
        rows,
        failures,
        mean_ratio,
        median_ratio,
    }
}

/// Settings for a full learning run on a given network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    pub delta: f64,
    pub threshold: Threshold,
    /// Discrete path-query gamma; measured exactly when absent.
    pub gamma: Option<f64>,
    /// Discrete transitive-query gamma; measured exactly when absent.
    pub gamma_transitive: Option<f64>,
    /// Continuous variance bound; measured when absent.
    pub sigma_ub: Option<f64>,
    /// Imperfect discrete interventions with `phi_i = alpha`.
    pub alpha: Option<f64>,
    pub nu2: Option<Nu2>,
    /// Samples per distribution for both phases, replacing the planner.
    pub m_override: Option<u64>,
    pub seed: u64,
    pub batched: bool,
    /// Noiseless structural queries instead of samples.
    pub oracle: bool,
    /// Run the transitive-edge phase after the path-query phase.
    pub transitive: bool,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions {
            delta: 0.01,
            threshold: Threshold::default(),
            gamma: None,
            gamma_transitive: None,
            sigma_ub: None,
            alpha: None,
            nu2: None,
            m_override: None,
            seed: 1,
            batched: false,
            oracle: false,
            transitive: true,
        }
    }
}

/// Learns `net` from simulated interventions and scores it against the
/// network's own graph. With `transitive`, `delta` is split evenly between
/// the two phases.
pub fn run_recovery(net: &NamedNetwork, opts: &RecoveryOptions) -> Result<(Dag, RecoveryReport)> {
    let truth = net.dag().clone();
    let n = truth.n();
    let mut notes = Vec::new();
    let (learned, mut report) = if opts.oracle {
        notes.push("noiseless oracle queries".to_string());
        let reach = truth.transitive_closure();
        let (tr, mut rep) = learn_tr(n, |i, j| oracle_path(&reach, i, j))?;
        if opts.transitive {
            let (g, trep) = learn_transitive_edges(&tr, |i, j, s| oracle_transitive(&truth, i, j, s))?;
            rep.transitive_queries_issued = trep.transitive_queries_issued;
            rep.learned_edges = trep.learned_edges;
            (g, rep)
        } else {
            (tr, rep)
        }
    } else {
        let delta = if opts.transitive { opts.delta / 2.0 } else { opts.delta };
        match &net.payload {
            NetworkPayload::Discrete(cbn) => recover_discrete(cbn, opts, delta, &mut notes)?,
            NetworkPayload::Asgn(a) => recover_continuous(a, opts, delta, &mut notes)?,
        }
    };
    report.n = n;
    report.notes.extend(notes);
    let report = report.with_truth(&truth)?;
    Ok((learned, report))
}

fn merge(mut path: RecoveryReport, trans: RecoveryReport) -> RecoveryReport {
    path.transitive_queries_issued = trans.transitive_queries_issued;
    path.total_samples += trans.total_samples;
    path.learned_edges = trans.learned_edges;
    path
}

fn recover_discrete(
    cbn: &DiscreteCbn,
    opts: &RecoveryOptions,
    delta: f64,
    notes: &mut Vec<String>,
) -> Result<(Dag, RecoveryReport)> {
    let n = cbn.n();
    let r = cbn.max_domain_size();
    let gamma = match opts.gamma {
        Some(g) => g,
        None => cbn
            .compute_gamma()?
            .value()
            .ok_or_else(|| Error::Faithfulness("some edge has identical interventional marginals".into()))?,
    };
    let inputs = match opts.alpha {
        Some(alpha) => PlanInputs::DiscreteImperfect { gamma, r, alpha },
        None => PlanInputs::Discrete { gamma, r },
    };
    let plan = plan_samples(inputs, n, delta)?;
    let m = opts.m_override.unwrap_or(plan.m_per_distribution);
    notes.push(format!(
        "path phase: gamma = {gamma}, r = {r}, delta = {delta}, planner m = {}, used m = {m}",
        plan.m_per_distribution
    ));
    let sim = Simulated::Discrete {
        cbn: cbn.clone(),
        alpha: opts.alpha,
    };
    let settings = PathQuerySettings {
        m,
        gamma,
        threshold: opts.threshold,
        z: 0.0,
        batched: opts.batched,
        seed: derive_seed(opts.seed, &[1]),
    };
    let (tr, report) = learn_tr_simulated(&sim, &settings)?;
    if !opts.transitive {
        return Ok((tr, report));
    }
    if opts.alpha.is_some() {
        return Err(Error::Unsupported(
            "transitive queries under imperfect interventions are not defined".into(),
        ));
    }
    let gamma_t = match opts.gamma_transitive {
        Some(g) => g,
        None => cbn
            .compute_gamma_transitive()?
            .value()
            .ok_or_else(|| Error::Faithfulness("some parent subset has identical interventional marginals".into()))?,
    };
    let plan_t = plan_samples(PlanInputs::TransitiveDiscrete { gamma: gamma_t, r }, n, delta)?;
    let m_t = as_usize(opts.m_override.unwrap_or(plan_t.m_per_distribution))?;
    notes.push(format!(
        "transitive phase: gamma = {gamma_t}, planner m = {}, used m = {m_t}",
        plan_t.m_per_distribution
    ));
    let thr = opts.threshold.value(gamma_t);
    let tseed = derive_seed(opts.seed, &[2]);
    let run = |sampler: &dyn DiscreteSampler| {
        learn_transitive_edges(&tr, |i, j, s| {
            transitive_query_discrete(sampler, i, j, s, m_t, thr, derive_seed(tseed, &[i as u64, j as u64]))
        })
    };
    let (g, trep) = if opts.batched {
        run(&BatchedDiscrete::new(cbn, tseed))?
    } else {
        run(cbn)?
    };
    Ok((g, merge(report, trep)))
}

fn recover_continuous(
    net: &AsgnNetwork,
    opts: &RecoveryOptions,
    delta: f64,
    notes: &mut Vec<String>,
) -> Result<(Dag, RecoveryReport)> {
    let n = net.n();
    let net = match opts.nu2 {
        None => net.clone(),
        Some(Nu2::MatchNoise) => net
            .clone()
            .with_intervention_variances(Some(net.noise_variances().to_vec()))?,
        Some(Nu2::Fixed(v)) => net.clone().with_intervention_variances(Some(vec![v; n]))?,
    };
    // Intervention noise above the largest noise variance raises the bound.
    let nu_scale = {
        let s_max = net.noise_variances().iter().copied().fold(0.0, f64::max);
        let nu_max = net.intervention_variances().map_or(0.0, |v| v.iter().copied().fold(0.0, f64::max));
        (nu_max / s_max).max(1.0)
    };
    let c = net.compute_wmin_wmax();
    let z = c.z.ok_or_else(|| Error::Faithfulness("w_min is zero: some edge effect cancels".into()))?;
    let sigma_ub = opts.sigma_ub.unwrap_or(c.sigma_ub * nu_scale);
    let plan = plan_samples(PlanInputs::Continuous { sigma_ub }, n, delta)?;
    let m = opts.m_override.unwrap_or(plan.m_per_distribution);
    notes.push(format!(
        "path phase: w_min = {}, z = {z}, sigma_ub = {sigma_ub}, delta = {delta}, planner m = {}, used m = {m}",
        c.w_min, plan.m_per_distribution
    ));
    let sim = Simulated::Continuous { net: net.clone() };
    let settings = PathQuerySettings {
        m,
        gamma: 0.0,
        threshold: opts.threshold,
        z,
        batched: opts.batched,
        seed: derive_seed(opts.seed, &[1]),
    };
    let (tr, report) = learn_tr_simulated(&sim, &settings)?;
    if !opts.transitive {
        return Ok((tr, report));
    }
    let ct = net.compute_wmin_wmax_transitive()?;
    let z2 = ct.z.ok_or_else(|| Error::Faithfulness("zero edge weight".into()))?;
    let sigma_t = opts.sigma_ub.unwrap_or(ct.sigma_ub * nu_scale);
    let plan_t = plan_samples(PlanInputs::TransitiveContinuous { sigma_ub: sigma_t }, n, delta)?;
    let m_t = as_usize(opts.m_override.unwrap_or(plan_t.m_per_distribution))?;
    notes.push(format!(
        "transitive phase: z1 = 0, z2 = {z2}, sigma_ub = {sigma_t}, planner m = {}, used m = {m_t}",
        plan_t.m_per_distribution
    ));
    let tseed = derive_seed(opts.seed, &[2]);
    let run = |sampler: &dyn ContinuousSampler| {
        learn_transitive_edges(&tr, |i, j, s| {
            transitive_query_continuous(sampler, i, j, s, m_t, 0.0, z2, derive_seed(tseed, &[i as u64, j as u64]))
        })
    };
    let (g, trep) = if opts.batched {
        run(&BatchedContinuous::new(&net, tseed))?
    } else {
        run(&net)?
    };
    Ok((g, merge(report, trep)))
}

/// Full pipeline on one benchmark file.
pub fn run_benchmark_recovery(path: &Path, opts: &RecoveryOptions) -> Result<RecoveryReport> {
    let net = load_network(path)?;
    let (_, mut report) = run_recovery(&net, opts)?;
    report.notes.insert(0, format!("network {} ({})", net.name, path.display()));
    Ok(report)
}
