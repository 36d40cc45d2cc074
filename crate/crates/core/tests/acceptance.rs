//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with its own `main` so the lines reach the test log uncaptured.
//! Pass criterion numbers as arguments to run a subset:
//! `cargo test -p cbnlearn-core --test acceptance -- 4 9`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};

use cbnlearn::asgn::{AsgnNetwork, ContinuousIntervention, NoiseKind};
use cbnlearn::discrete::{random_discrete_cbn, InterventionSpec, Pmf};
use cbnlearn::experiments::{
    census_row, generate_trial_network, run_phase_transition, run_recovery, ExperimentConfig, ExperimentKind,
    Family, Nu2, RecoveryOptions, Simulated,
};
use cbnlearn::learner::{learn_tr, learn_transitive_edges, oracle_path, oracle_transitive};
use cbnlearn::model_io::load_network;
use cbnlearn::queries::Threshold;
use cbnlearn::seed::derive_seed;
use cbnlearn::{Dag, NamedNetwork, NetworkPayload};

const ROOT_SEED: u64 = 20_240_601;

const C1_GRAPHS: usize = 1000;
const C1_TIME: Duration = Duration::from_secs(10);
const C2_GRAPHS: usize = 200;
const C4_MIN_SUCCESS: usize = 19;
const C4_TIME: Duration = Duration::from_secs(15 * 60);
const C5_MIN_SUCCESS: usize = 39;
const C5_TIME: Duration = Duration::from_secs(15 * 60);
const C6_LOW_MAX: f64 = 0.1;
const C6_HIGH_MIN: f64 = 0.9;
const C6_DROP_TOL: f64 = 0.1;
const C8_MIN_SUCCESS: usize = 19;
const C8_TIME: Duration = Duration::from_secs(10 * 60);
const C9_T: f64 = 0.05;
const C9_DELTA: f64 = 0.05;
const C9_REPS: usize = 1000;
const C9_MAX_FREQ: f64 = 1.5 * C9_DELTA;
const C10_MIN_SUCCESS: usize = 19;
const C12_TOL: f64 = 1e-9;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn random_dag(n: usize, p: f64, seed: u64) -> Dag {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for k in (1..n).rev() {
        order.swap(k, rng.random_range(0..=k));
    }
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < p {
                edges.push((order[a], order[b]));
            }
        }
    }
    Dag::new(n, edges).unwrap()
}

/// Random `(n, p)` in the given range, same stream for every criterion.
fn random_graph_case(k: usize, max_n: usize, salt: u64) -> Dag {
    let seed = derive_seed(ROOT_SEED, &[salt, k as u64]);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_n);
    let p = rng.random::<f64>();
    random_dag(n, p, seed)
}

/// Per-edge check: `(u, v)` is kept iff no other child of `u` reaches `v`,
/// found by depth-first search.
fn brute_force_reduction(g: &Dag) -> Vec<(usize, usize)> {
    let reaches = |from: usize, to: usize| {
        let mut stack = vec![from];
        let mut seen = vec![false; g.n()];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if !std::mem::replace(&mut seen[v], true) {
                stack.extend_from_slice(g.children(v));
            }
        }
        false
    };
    g.edges()
        .into_iter()
        .filter(|&(u, v)| !g.children(u).iter().any(|&w| w != v && reaches(w, v)))
        .collect()
}

fn c1() -> Verdict {
    let start = Instant::now();
    let mismatches = (0..C1_GRAPHS)
        .filter(|&k| {
            let g = random_graph_case(k, 8, 1);
            g.transitive_reduction().edges() != brute_force_reduction(&g)
        })
        .count();
    let t = start.elapsed();
    verdict(
        mismatches == 0 && t < C1_TIME,
        format!("{mismatches} mismatches over {C1_GRAPHS} DAGs (n <= 8) in {t:.2?}"),
    )
}

fn c2() -> Verdict {
    let mut tr_fail = 0;
    let mut full_fail = 0;
    for k in 0..C2_GRAPHS {
        let g = random_graph_case(k, 10, 2);
        let reach = g.transitive_closure();
        let (tr, _) = learn_tr(g.n(), |i, j| oracle_path(&reach, i, j)).unwrap();
        if tr != g.transitive_reduction() {
            tr_fail += 1;
        }
        let (full, _) = learn_transitive_edges(&tr, |i, j, s| oracle_transitive(&g, i, j, s)).unwrap();
        if full != g {
            full_fail += 1;
        }
    }
    verdict(
        tr_fail == 0 && full_fail == 0,
        format!("{C2_GRAPHS} DAGs (n <= 10): {tr_fail} TR failures, {full_fail} full-graph failures"),
    )
}

fn c3() -> Verdict {
    let sizes: Vec<usize> = (1..=30).chain([45, 60]).collect();
    let mut bad = Vec::new();
    for &n in &sizes {
        let g = random_dag(n, 0.2, derive_seed(ROOT_SEED, &[3, n as u64]));
        let reach = g.transitive_closure();
        let mut calls = 0u64;
        let (_, report) = learn_tr(n, |i, j| {
            calls += 1;
            oracle_path(&reach, i, j)
        })
        .unwrap();
        let expected = (n * (n - 1)) as u64;
        if calls != expected || report.path_queries_issued != expected {
            bad.push(n);
        }
    }
    verdict(
        bad.is_empty(),
        format!("n = 1..=30, 45, 60: query count != n(n-1) for {bad:?}"),
    )
}

fn phase_config(family: Family, n: usize, r_max: usize, gamma_floor: f64, salt: u64) -> ExperimentConfig {
    ExperimentConfig {
        kind: ExperimentKind::PhaseTransition,
        family,
        n_values: vec![n],
        c_grid: vec![0.0],
        trials: 1,
        delta: 0.01,
        seed: derive_seed(ROOT_SEED, &[salt]),
        edge_density: 2.0 / (n as f64 - 1.0),
        r_max,
        gamma_floor,
        alpha: None,
        nu2: None,
        threshold: Threshold::HalfGamma,
        batched: true,
        networks: Vec::new(),
        oracle: false,
        m_override: None,
    }
}

/// Counts trials whose learned transitive reduction is exact.
fn tr_trials(cfg: &ExperimentConfig, trials: usize, opts: &RecoveryOptions) -> (usize, Vec<String>) {
    let n = cfg.n_values[0];
    let mut ok = 0;
    let mut notes = Vec::new();
    for trial in 0..trials {
        let sim = generate_trial_network(cfg, n, trial).unwrap();
        let payload = match sim {
            Simulated::Discrete { cbn, .. } => NetworkPayload::Discrete(cbn),
            Simulated::Continuous { net } => NetworkPayload::Asgn(net),
        };
        let net = NamedNetwork::new(format!("trial{trial}"), payload);
        let opts = RecoveryOptions {
            seed: derive_seed(cfg.seed, &[trial as u64, 1]),
            ..opts.clone()
        };
        match run_recovery(&net, &opts) {
            Ok((learned, _)) if learned == *net.dag() => ok += 1,
            Ok((learned, _)) => notes.push(format!("trial {trial}: {} edges vs {}", learned.edge_count(), net.dag().edge_count())),
            Err(e) => notes.push(format!("trial {trial}: {e}")),
        }
    }
    (ok, notes)
}

fn discrete_opts(gamma: f64, delta: f64, alpha: Option<f64>) -> RecoveryOptions {
    RecoveryOptions {
        delta,
        gamma: Some(gamma),
        alpha,
        batched: true,
        transitive: false,
        ..RecoveryOptions::default()
    }
}

fn c4() -> Verdict {
    let start = Instant::now();
    let cfg = phase_config(Family::Discrete, 15, 3, 0.05, 4);
    let (ok, notes) = tr_trials(&cfg, 20, &discrete_opts(0.05, 0.05, None));
    let t = start.elapsed();
    verdict(
        ok >= C4_MIN_SUCCESS && t <= C4_TIME,
        format!("{ok}/20 exact (n = 15, r <= 3, gamma >= 0.05, delta = 0.05) in {t:.0?} {notes:?}"),
    )
}

fn continuous_trials(trials: usize, nu2: Option<Nu2>, salt: u64) -> (usize, Vec<String>) {
    let mut cfg = phase_config(Family::Continuous, 20, 5, 0.01, salt);
    cfg.nu2 = nu2;
    let opts = RecoveryOptions {
        delta: 0.01,
        transitive: false,
        ..RecoveryOptions::default()
    };
    tr_trials(&cfg, trials, &opts)
}

fn c5() -> Verdict {
    let start = Instant::now();
    let (ok, notes) = continuous_trials(40, None, 5);
    let t = start.elapsed();
    verdict(
        ok >= C5_MIN_SUCCESS && t <= C5_TIME,
        format!("{ok}/40 exact (n = 20, delta = 0.01, z = 1/w_min) in {t:.1?} {notes:?}"),
    )
}

fn c6() -> Verdict {
    let start = Instant::now();
    let mut cfg = phase_config(Family::Discrete, 20, 5, 0.01, 6);
    cfg.c_grid = (0..=8).map(|k| 1.5 * k as f64).collect();
    cfg.trials = 20;
    let rows = run_phase_transition(&cfg).unwrap();
    let freq: Vec<f64> = rows.iter().map(|r| r.frequency()).collect();
    let low = freq[0];
    let high = *freq.last().unwrap();
    let worst_drop = freq.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    let curve: Vec<String> = rows.iter().map(|r| format!("C={}:{}", r.c, r.frequency())).collect();
    verdict(
        low <= C6_LOW_MAX && high >= C6_HIGH_MIN && worst_drop <= C6_DROP_TOL,
        format!(
            "n = 20, 20 trials: [{}], largest drop {worst_drop}, {:.0?}",
            curve.join(" "),
            start.elapsed()
        ),
    )
}

fn networks_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/networks")
}

fn c7() -> Verdict {
    let table = [
        ("asia", 8, 8, 0, 0.0),
        ("cancer", 5, 4, 0, 0.0),
        ("earthquake", 5, 4, 0, 0.0),
        ("child", 20, 25, 1, 4.00),
        ("insurance", 27, 52, 12, 23.08),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, v, e, re, pct) in table {
        let net = match load_network(&networks_dir().join(format!("{name}.bif"))) {
            Ok(net) => net,
            Err(err) => {
                pass = false;
                parts.push(format!("{name}: {err}"));
                continue;
            }
        };
        let row = census_row(&net);
        let got_pct = (10_000.0 * row.ratio).round() / 100.0;
        if (row.nodes, row.edges) != (v, e) {
            // Different file version: report, do not fail.
            parts.push(format!(
                "{name}: version drift, file has ({}, {}, {}) vs table ({v}, {e}, {re})",
                row.nodes, row.edges, row.transitive_edges
            ));
            continue;
        }
        let same = row.transitive_edges == re && (got_pct - pct).abs() < 1e-9;
        pass &= same;
        parts.push(format!("{name} ({}, {}, {}, {got_pct:.2}%)", row.nodes, row.edges, row.transitive_edges));
    }
    verdict(pass, parts.join(", "))
}

fn c8() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["asia", "cancer"] {
        let net = load_network(&networks_dir().join(format!("{name}.bif"))).unwrap();
        let start = Instant::now();
        let mut perfect = 0;
        let mut m_note = String::new();
        for trial in 0..20u64 {
            let opts = RecoveryOptions {
                delta: 0.05,
                seed: derive_seed(ROOT_SEED, &[8, trial]),
                ..RecoveryOptions::default()
            };
            match run_recovery(&net, &opts) {
                Ok((_, report)) => {
                    let m = report.vs_truth.unwrap();
                    if m.precision == 1.0 && m.recall == 1.0 && m.f1 == 1.0 {
                        perfect += 1;
                    }
                    if trial == 0 {
                        m_note = report.notes.join("; ");
                    }
                }
                Err(e) => parts.push(format!("{name} trial {trial}: {e}")),
            }
        }
        let t = start.elapsed();
        pass &= perfect >= C8_MIN_SUCCESS && t <= C8_TIME;
        parts.push(format!("{name} {perfect}/20 perfect in {t:.0?} ({m_note})"));
    }
    let child = load_network(&networks_dir().join("child.bif")).unwrap();
    let oracle = RecoveryOptions {
        oracle: true,
        ..RecoveryOptions::default()
    };
    let (_, report) = run_recovery(&child, &oracle).unwrap();
    let f1 = report.vs_truth.unwrap().f1;
    pass &= f1 == 1.0;
    parts.push(format!("child oracle F1 = {f1}"));
    verdict(pass, parts.join("; "))
}

fn c9() -> Verdict {
    let m = ((2.0 / (C9_T * C9_T)) * (2.0 / C9_DELTA).ln()).ceil() as usize;
    let net = load_network(&networks_dir().join("child.bif")).unwrap();
    let cbn = net.discrete().unwrap();
    // A five-valued child of an intervened parent.
    let j = net.node_names.iter().position(|s| s == "ChestXray").unwrap();
    let i = cbn.dag().parents(j)[0];
    let spec = InterventionSpec::single(i, 0);
    let exact = cbn.exact_interventional_marginal(j, &spec).unwrap();
    let d = cbn.domain_size(j);
    let exceed = (0..C9_REPS)
        .filter(|&rep| {
            let cols = cbn
                .sample_columns(&spec, &[j], m, derive_seed(ROOT_SEED, &[9, rep as u64]))
                .unwrap();
            let mut counts = vec![0u64; d];
            for &x in &cols[0] {
                counts[x as usize] += 1;
            }
            Pmf::from_counts(&counts, m as u64).linf(&exact) > C9_T
        })
        .count();
    let freq = exceed as f64 / C9_REPS as f64;
    verdict(
        freq <= C9_MAX_FREQ,
        format!("m = {m}: P(L-inf error > {C9_T}) = {freq} over {C9_REPS} reps (bound {C9_MAX_FREQ})"),
    )
}

fn c10() -> Verdict {
    let start = Instant::now();
    let cfg = phase_config(Family::Discrete, 15, 3, 0.05, 10);
    let (disc, dnotes) = tr_trials(&cfg, 20, &discrete_opts(0.05, 0.05, Some(0.9)));
    let (cont, cnotes) = continuous_trials(20, Some(Nu2::MatchNoise), 11);
    verdict(
        disc >= C10_MIN_SUCCESS && cont >= C10_MIN_SUCCESS,
        format!(
            "discrete phi = alpha = 0.9: {disc}/20 {dnotes:?}; continuous nu2 = sigma2: {cont}/20 {cnotes:?}; {:.0?}",
            start.elapsed()
        ),
    )
}

fn c11() -> Verdict {
    let net = AsgnNetwork::from_weighted_edges(
        3,
        &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, -1.0)],
        vec![1.0; 3],
        NoiseKind::Gaussian,
    )
    .unwrap();
    let c = net.compute_wmin_wmax();
    let means: Vec<f64> = [-5.0, 1.0, 7.0]
        .iter()
        .map(|&z| net.analytic_moments(2, &ContinuousIntervention::single(0, z)).unwrap().0)
        .collect();
    verdict(
        !c.is_faithful() && means.iter().all(|&m| m == 0.0),
        format!("faithful = {}, w_min = {}, means {means:?}", c.is_faithful(), c.w_min),
    )
}

fn c12() -> Verdict {
    let mut worst = 0.0f64;
    let mut checks = 0usize;
    for k in 0..50u64 {
        let seed = derive_seed(ROOT_SEED, &[12, k]);
        let dag = random_dag(5, 0.5, seed);
        let cbn = random_discrete_cbn(&dag, 4, 0.0, seed).unwrap();
        let observational = cbn.observational_marginals().unwrap();
        let reach = dag.transitive_closure();
        for i in 0..5 {
            for j in (0..5).filter(|&j| j != i && !reach.reaches(i, j)) {
                for x in 0..cbn.domain_size(i) {
                    let p = cbn.exact_interventional_marginal(j, &InterventionSpec::single(i, x)).unwrap();
                    worst = worst.max(p.linf(&observational[j]));
                    checks += 1;
                }
            }
        }
    }
    verdict(
        worst <= C12_TOL,
        format!("{checks} (pair, value) checks on 50 networks, largest deviation {worst:e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(u8, &str, fn() -> Verdict); 12] = [
        (1, "transitive reduction equals brute force", c1),
        (2, "noiseless end-to-end identity", c2),
        (3, "path query count is n(n-1)", c3),
        (4, "discrete recovery at planned m", c4),
        (5, "continuous recovery at planned m", c5),
        (6, "phase transition shape", c6),
        (7, "transitive edge census", c7),
        (8, "benchmark recovery", c8),
        (9, "PMF concentration", c9),
        (10, "imperfect interventions", c10),
        (11, "cancelling paths", c11),
        (12, "non-descendant invariance", c12),
    ];
    let wanted: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, title, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let v = run();
        println!("{} [{id:>2}] {title}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
