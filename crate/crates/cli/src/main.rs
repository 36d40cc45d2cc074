use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use cbnlearn::asgn::random_asgn;
use cbnlearn::discrete::random_discrete_cbn;
use cbnlearn::experiments::{
    curve_svg, run_benchmark_recovery, run_census, run_phase_transition, run_recovery, ExperimentConfig,
    ExperimentKind, Nu2, RecoveryOptions,
};
use cbnlearn::learner::{plan_samples, PlanInputs};
use cbnlearn::model_io::{
    cpt_csv, export_dot, load_network, parse_edge_list, serialize_network, write_bif, write_curve_csv,
    write_edge_list,
};
use cbnlearn::queries::{
    path_query_continuous, path_query_discrete, path_query_discrete_imperfect, transitive_query_continuous,
    transitive_query_discrete, ImperfectSampler,
};
use cbnlearn::{random_tr_dag, Dag, Error, NamedNetwork, NetworkPayload, Result, Threshold};

/// Exact causal structure learning from simulated interventions.
#[derive(Parser)]
#[command(name = "cbnlearn", version)]
struct Cli {
    /// More log output (repeatable); RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random network as JSON.
    Gen(GenArgs),
    /// Learn a network's structure from simulated interventions.
    Learn(LearnArgs),
    /// Answer a single path or transitive query.
    Query(QueryArgs),
    /// Count transitive edges of network files.
    Census(CensusArgs),
    /// Run an experiment config (TOML or JSON).
    Phase(PhaseArgs),
    /// Convert between network and graph formats.
    Convert(ConvertArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Discrete,
    Continuous,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LearnRegime {
    Discrete,
    DiscreteImperfect,
    Continuous,
    ContinuousImperfect,
}

#[derive(Clone, Copy, ValueEnum)]
enum ThresholdArg {
    HalfGamma,
    Printed,
}

impl From<ThresholdArg> for Threshold {
    fn from(t: ThresholdArg) -> Self {
        match t {
            ThresholdArg::HalfGamma => Threshold::HalfGamma,
            ThresholdArg::Printed => Threshold::Printed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Bif,
    Dot,
    Edges,
    CptCsv,
}

#[derive(Args)]
struct SeedArg {
    /// Root seed.
    #[arg(long, env = "CBNLEARN_SEED", default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "discrete")]
    family: Family,
    #[arg(short, long)]
    n: usize,
    /// Edge probability before reduction; defaults to 2/(n-1).
    #[arg(long)]
    edge_density: Option<f64>,
    #[arg(long, default_value_t = 5)]
    r_max: usize,
    #[arg(long, default_value_t = 0.01)]
    gamma_floor: f64,
    /// Intervention variance for continuous networks: `match-noise` or a number.
    #[arg(long, value_parser = parse_nu2)]
    nu2: Option<Nu2>,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LearnArgs {
    /// Network file (.bif or .json).
    network: PathBuf,
    /// Defaults to the network's family with perfect interventions.
    #[arg(long, value_enum)]
    regime: Option<LearnRegime>,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Discrete gamma; measured exactly when omitted.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    gamma_transitive: Option<f64>,
    #[arg(long)]
    sigma_ub: Option<f64>,
    /// Success probability of every discrete intervention.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_parser = parse_nu2)]
    nu2: Option<Nu2>,
    #[arg(long)]
    m_override: Option<u64>,
    #[arg(long, value_enum, default_value = "half-gamma")]
    threshold: ThresholdArg,
    #[command(flatten)]
    seed: SeedArg,
    /// Reuse one sample set per intervention across queries.
    #[arg(long)]
    batched: bool,
    /// Noiseless queries from the true graph.
    #[arg(long)]
    oracle: bool,
    /// Stop after the transitive reduction.
    #[arg(long)]
    skip_transitive: bool,
    /// Learned graph as DOT; stdout when omitted.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    network: PathBuf,
    /// Intervened node (id or name).
    #[arg(long)]
    from: String,
    /// Observed node (id or name).
    #[arg(long)]
    to: String,
    /// Conditioning set for a transitive query, comma separated.
    #[arg(long, value_delimiter = ',')]
    given: Vec<String>,
    /// Samples per distribution; planned from `delta` when omitted.
    #[arg(short, long)]
    m: Option<u64>,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "half-gamma")]
    threshold: ThresholdArg,
    /// Intervention value for continuous networks; 1/w_min when omitted.
    #[arg(long)]
    z: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct CensusArgs {
    #[arg(required = true)]
    networks: Vec<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PhaseArgs {
    config: PathBuf,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// SVG chart of a phase-transition curve.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Replaces the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ConvertArgs {
    /// Network (.bif, .json) or edge list (.edges, .txt).
    input: PathBuf,
    #[arg(long, value_enum)]
    to: Format,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn parse_nu2(s: &str) -> std::result::Result<Nu2, String> {
    if s == "match-noise" {
        return Ok(Nu2::MatchNoise);
    }
    s.parse::<f64>()
        .map(Nu2::Fixed)
        .map_err(|_| format!("expected `match-noise` or a number, got {s:?}"))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn resolve(net: &NamedNetwork, s: &str) -> Result<usize> {
    if let Some(v) = net.node_names.iter().position(|name| name == s) {
        return Ok(v);
    }
    match s.parse::<usize>() {
        Ok(v) if v < net.n() => Ok(v),
        _ => Err(Error::Validation(format!("no node {s:?} in {}", net.name))),
    }
}

fn gen(a: GenArgs) -> Result<()> {
    if a.n < 2 {
        return Err(Error::Validation("n must be at least 2".into()));
    }
    let density = a.edge_density.unwrap_or(2.0 / (a.n as f64 - 1.0)).min(1.0);
    let seed = a.seed.seed;
    let dag = random_tr_dag(a.n, density, cbnlearn::seed::derive_seed(seed, &[0]))?;
    let payload = match a.family {
        Family::Discrete => NetworkPayload::Discrete(random_discrete_cbn(
            &dag,
            a.r_max,
            a.gamma_floor,
            cbnlearn::seed::derive_seed(seed, &[1]),
        )?),
        Family::Continuous => {
            let net = random_asgn(&dag, cbnlearn::seed::derive_seed(seed, &[1]))?;
            let nu2 = match a.nu2 {
                None => None,
                Some(Nu2::MatchNoise) => Some(net.noise_variances().to_vec()),
                Some(Nu2::Fixed(v)) => Some(vec![v; a.n]),
            };
            NetworkPayload::Asgn(net.with_intervention_variances(nu2)?)
        }
    };
    let net = NamedNetwork::new(format!("random-{}-{seed}", payload.kind()), payload);
    emit(a.out.as_deref(), &serialize_network(&net)?)
}

fn learn(a: LearnArgs) -> Result<()> {
    let net = load_network(&a.network)?;
    let continuous = net.asgn().is_some();
    let regime = a.regime.unwrap_or(if continuous {
        LearnRegime::Continuous
    } else {
        LearnRegime::Discrete
    });
    let regime_continuous = matches!(regime, LearnRegime::Continuous | LearnRegime::ContinuousImperfect);
    if regime_continuous != continuous {
        return Err(Error::Validation(format!(
            "regime does not match the {} network {}",
            net.payload.kind(),
            net.name
        )));
    }
    let alpha = match regime {
        LearnRegime::DiscreteImperfect => Some(
            a.alpha
                .ok_or_else(|| Error::Validation("discrete-imperfect needs --alpha".into()))?,
        ),
        _ if a.alpha.is_some() => return Err(Error::Validation("--alpha needs --regime discrete-imperfect".into())),
        _ => None,
    };
    let nu2 = match regime {
        LearnRegime::ContinuousImperfect => Some(a.nu2.unwrap_or(Nu2::MatchNoise)),
        _ if a.nu2.is_some() => return Err(Error::Validation("--nu2 needs --regime continuous-imperfect".into())),
        _ => None,
    };
    let opts = RecoveryOptions {
        delta: a.delta,
        threshold: a.threshold.into(),
        gamma: a.gamma,
        gamma_transitive: a.gamma_transitive,
        sigma_ub: a.sigma_ub,
        alpha,
        nu2,
        m_override: a.m_override,
        seed: a.seed.seed,
        batched: a.batched,
        oracle: a.oracle,
        transitive: !a.skip_transitive,
    };
    let (learned, report) = run_recovery(&net, &opts)?;
    if let Some(m) = &report.vs_truth {
        eprintln!(
            "{}: {} edges learned, precision {:.3}, recall {:.3}, F1 {:.3}, {} samples",
            net.name,
            learned.edge_count(),
            m.precision,
            m.recall,
            m.f1,
            report.total_samples
        );
    }
    emit(a.dot.as_deref(), &export_dot(&learned, Some(&net.node_names))?)?;
    if let Some(p) = &a.report {
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        fs::write(p, text)?;
    }
    Ok(())
}

fn query(a: QueryArgs) -> Result<()> {
    let net = load_network(&a.network)?;
    let i = resolve(&net, &a.from)?;
    let j = resolve(&net, &a.to)?;
    let s = a.given.iter().map(|g| resolve(&net, g)).collect::<Result<Vec<_>>>()?;
    let n = net.n();
    let seed = a.seed.seed;
    let to_usize = |m: u64| usize::try_from(m).map_err(|_| Error::Validation(format!("m = {m} too large")));
    let outcome = match &net.payload {
        NetworkPayload::Discrete(cbn) => {
            let transitive = !s.is_empty();
            let gamma = match a.gamma {
                Some(g) => g,
                None => {
                    let report = if transitive {
                        cbn.compute_gamma_transitive()?
                    } else {
                        cbn.compute_gamma()?
                    };
                    report
                        .value()
                        .ok_or_else(|| Error::Faithfulness("identical interventional marginals".into()))?
                }
            };
            let r = cbn.max_domain_size();
            let inputs = match (transitive, a.alpha) {
                (true, Some(_)) => {
                    return Err(Error::Unsupported("transitive queries under imperfect interventions".into()))
                }
                (true, None) => PlanInputs::TransitiveDiscrete { gamma, r },
                (false, Some(alpha)) => PlanInputs::DiscreteImperfect { gamma, r, alpha },
                (false, None) => PlanInputs::Discrete { gamma, r },
            };
            let m = to_usize(match a.m {
                Some(m) => m,
                None => plan_samples(inputs, n, a.delta)?.m_per_distribution,
            })?;
            let thr = Threshold::from(a.threshold).value(gamma);
            match (transitive, a.alpha) {
                (true, _) => transitive_query_discrete(cbn, i, j, &s, m, thr, seed)?,
                (false, Some(alpha)) => {
                    let imp = ImperfectSampler::new(cbn, vec![alpha; n])?;
                    path_query_discrete_imperfect(&imp, i, j, m, thr, seed)?
                }
                (false, None) => path_query_discrete(cbn, i, j, m, thr, seed)?,
            }
        }
        NetworkPayload::Asgn(asgn) => {
            let transitive = !s.is_empty();
            let constants = if transitive {
                asgn.compute_wmin_wmax_transitive()?
            } else {
                asgn.compute_wmin_wmax()
            };
            let z = match a.z {
                Some(z) => z,
                None => constants.z.ok_or_else(|| Error::Faithfulness("w_min is zero".into()))?,
            };
            let m = to_usize(match a.m {
                Some(m) => m,
                None => plan_samples(PlanInputs::continuous(&constants, transitive)?, n, a.delta)?.m_per_distribution,
            })?;
            if transitive {
                transitive_query_continuous(asgn, i, j, &s, m, 0.0, z, seed)?
            } else {
                path_query_continuous(asgn, i, j, m, z, seed)?
            }
        }
    };
    let out = serde_json::json!({
        "from": i,
        "to": j,
        "given": s,
        "answer": outcome.answer,
        "samples_used": outcome.samples_used,
        "max_gap": outcome.max_gap,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn census(a: CensusArgs) -> Result<()> {
    let report = run_census(&a.networks);
    for (file, err) in &report.failures {
        eprintln!("{file}: {err}");
    }
    emit(a.out.as_deref(), &report.to_csv())?;
    if report.rows.is_empty() {
        return Err(Error::Validation("no network could be read".into()));
    }
    Ok(())
}

fn phase(a: PhaseArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    match cfg.kind {
        ExperimentKind::PhaseTransition => {
            let rows = run_phase_transition(&cfg)?;
            emit(a.csv.as_deref(), &write_curve_csv(&rows)?)?;
            if let Some(p) = &a.svg {
                fs::write(p, curve_svg(&rows))?;
            }
        }
        ExperimentKind::Census => {
            let report = run_census(&cfg.networks);
            for (file, err) in &report.failures {
                eprintln!("{file}: {err}");
            }
            emit(a.csv.as_deref(), &report.to_csv())?;
        }
        ExperimentKind::BenchmarkRecovery => {
            let opts = RecoveryOptions {
                delta: cfg.delta,
                threshold: cfg.threshold,
                alpha: cfg.alpha,
                nu2: cfg.nu2,
                m_override: cfg.m_override,
                seed: cfg.seed,
                batched: cfg.batched,
                oracle: cfg.oracle,
                ..RecoveryOptions::default()
            };
            let mut csv = String::from("network,precision,recall,f1,path_queries,transitive_queries,total_samples\n");
            for path in &cfg.networks {
                let report = run_benchmark_recovery(path, &opts)?;
                let Some(m) = report.vs_truth.clone() else {
                    return Err(Error::Validation(format!("{}: no ground truth", path.display())));
                };
                info!("{}: {:?}", path.display(), report.notes);
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    path.file_stem().and_then(|s| s.to_str()).unwrap_or("?"),
                    m.precision,
                    m.recall,
                    m.f1,
                    report.path_queries_issued,
                    report.transitive_queries_issued,
                    report.total_samples
                ));
            }
            emit(a.csv.as_deref(), &csv)?;
        }
    }
    Ok(())
}

fn convert(a: ConvertArgs) -> Result<()> {
    let ext = a.input.extension().and_then(|e| e.to_str()).unwrap_or("");
    if matches!(ext, "edges" | "txt") {
        let g: Dag = parse_edge_list(&fs::read_to_string(&a.input)?)?;
        let text = match a.to {
            Format::Dot => export_dot(&g, None)?,
            Format::Edges => write_edge_list(&g),
            _ => return Err(Error::Validation("an edge list converts only to dot or edges".into())),
        };
        return emit(a.out.as_deref(), &text);
    }
    let net = load_network(&a.input)?;
    let text = match a.to {
        Format::Json => serialize_network(&net)?,
        Format::Bif => write_bif(&net)?,
        Format::Dot => export_dot(net.dag(), Some(&net.node_names))?,
        Format::Edges => write_edge_list(net.dag()),
        Format::CptCsv => cpt_csv(
            net.discrete()
                .ok_or_else(|| Error::Validation("CPT export needs a discrete network".into()))?,
        ),
    };
    emit(a.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are validation failures; exit 2 means capacity.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Learn(a) => learn(a),
        Command::Query(a) => query(a),
        Command::Census(a) => census(a),
        Command::Phase(a) => phase(a),
        Command::Convert(a) => convert(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}
