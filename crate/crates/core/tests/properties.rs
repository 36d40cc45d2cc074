use proptest::prelude::*;
use rand::{Rng, SeedableRng};

use cbnlearn::asgn::{random_asgn, ContinuousIntervention};
use cbnlearn::discrete::{random_discrete_cbn, InterventionSpec};
use cbnlearn::learner::{evaluate, learn_tr, learn_transitive_edges, oracle_path, oracle_transitive};
use cbnlearn::model_io::{parse_bif, parse_edge_list, parse_network, serialize_network, write_bif, write_edge_list};
use cbnlearn::{plan_samples, random_tr_dag, Dag, NamedNetwork, NetworkPayload, PlanInputs};

/// Random DAG on a shuffled order with independent forward edges.
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

fn dag_strategy(max_n: usize) -> impl Strategy<Value = Dag> {
    (1..=max_n, 0.0..1.0f64, any::<u64>()).prop_map(|(n, p, seed)| random_dag(n, p, seed))
}

/// Edge `(u, v)` is transitive when some other child of `u` reaches `v`.
fn brute_force_reduction(g: &Dag) -> Vec<(usize, usize)> {
    let reach = g.transitive_closure();
    g.edges()
        .into_iter()
        .filter(|&(u, v)| !g.children(u).iter().any(|&w| w != v && reach.reaches(w, v)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduction_matches_brute_force(g in dag_strategy(12)) {
        let tr = g.transitive_reduction();
        prop_assert_eq!(tr.edges(), brute_force_reduction(&g));
        prop_assert!(tr.is_transitively_reduced());
        prop_assert_eq!(tr.transitive_reduction(), tr.clone());
        prop_assert_eq!(g.count_transitive_edges(), g.edge_count() - tr.edge_count());
        let (a, b) = (g.transitive_closure(), tr.transitive_closure());
        prop_assert!(a.pairs().eq(b.pairs()));
    }

    #[test]
    fn topological_order_respects_edges(g in dag_strategy(15)) {
        let order = g.topological_order().unwrap();
        let mut pos = vec![0; g.n()];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        for (u, v) in g.edges() {
            prop_assert!(pos[u] < pos[v]);
        }
    }

    #[test]
    fn noiseless_learning_recovers_graph(g in dag_strategy(9)) {
        let n = g.n();
        let reach = g.transitive_closure();
        let (tr, report) = learn_tr(n, |i, j| oracle_path(&reach, i, j)).unwrap();
        prop_assert_eq!(&tr, &g.transitive_reduction());
        prop_assert_eq!(report.path_queries_issued, (n * n.saturating_sub(1)) as u64);
        let (full, _) = learn_transitive_edges(&tr, |i, j, s| oracle_transitive(&g, i, j, s)).unwrap();
        prop_assert_eq!(full, g);
    }

    #[test]
    fn evaluation_is_bounded(a in dag_strategy(8), seed in any::<u64>()) {
        let b = random_dag(a.n(), 0.3, seed);
        let m = evaluate(&a, &b).unwrap();
        for x in [m.precision, m.recall, m.f1] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        prop_assert!(evaluate(&a, &a).unwrap().is_perfect());
    }

    #[test]
    fn edge_list_round_trip(g in dag_strategy(12)) {
        prop_assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn network_files_round_trip(n in 2usize..8, seed in any::<u64>()) {
        let dag = random_tr_dag(n, 0.4, seed).unwrap();
        let cbn = random_discrete_cbn(&dag, 4, 0.0, seed ^ 1).unwrap();
        let net = NamedNetwork::new("p", NetworkPayload::Discrete(cbn));
        prop_assert_eq!(parse_network(&serialize_network(&net).unwrap()).unwrap(), net.clone());
        let back = parse_bif(&write_bif(&net).unwrap()).unwrap();
        prop_assert_eq!(back.dag(), net.dag());
        let (x, y) = (back.discrete().unwrap(), net.discrete().unwrap());
        for v in 0..n {
            for (r, s) in x.cpt(v).rows().zip(y.cpt(v).rows()) {
                for (p, q) in r.iter().zip(s) {
                    prop_assert!((p - q).abs() < 1e-12);
                }
            }
        }
        let asgn = random_asgn(&dag, seed).unwrap();
        let net = NamedNetwork::new("q", NetworkPayload::Asgn(asgn));
        prop_assert_eq!(parse_network(&serialize_network(&net).unwrap()).unwrap(), net);
    }

    /// Intervening on `i` leaves the marginal of every non-descendant alone.
    #[test]
    fn non_descendants_ignore_interventions(n in 2usize..7, seed in any::<u64>()) {
        let dag = random_dag(n, 0.5, seed);
        let cbn = random_discrete_cbn(&dag, 3, 0.0, seed).unwrap();
        let observational = cbn.observational_marginals().unwrap();
        let reach = dag.transitive_closure();
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i && !reach.reaches(i, j)) {
                for x in 0..cbn.domain_size(i) {
                    let p = cbn.exact_interventional_marginal(j, &InterventionSpec::single(i, x)).unwrap();
                    prop_assert!(p.linf(&observational[j]) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn exact_marginals_are_distributions(n in 2usize..8, seed in any::<u64>()) {
        let dag = random_dag(n, 0.4, seed);
        let cbn = random_discrete_cbn(&dag, 4, 0.0, seed).unwrap();
        let spec = InterventionSpec::single(0, 1);
        for j in 1..n {
            let p = cbn.exact_interventional_marginal(j, &spec).unwrap();
            prop_assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(p.probs().iter().all(|&q| q >= 0.0));
        }
    }

    /// The mean under `do(X_i = z)` is linear in `z` with slope equal to the
    /// total effect, and the variance does not depend on `z`.
    #[test]
    fn asgn_moments_are_linear_in_z(n in 2usize..8, seed in any::<u64>(), z in -10.0..10.0f64) {
        let dag = random_tr_dag(n, 0.5, seed).unwrap();
        let net = random_asgn(&dag, seed).unwrap();
        let b = net.total_effects(&[0]);
        for j in 1..n {
            let (m1, v1) = net.analytic_moments(j, &ContinuousIntervention::single(0, z)).unwrap();
            let (m0, v0) = net.analytic_moments(j, &ContinuousIntervention::single(0, 0.0)).unwrap();
            prop_assert!((m1 - z * b[j * n]).abs() < 1e-9 * (1.0 + z.abs()));
            prop_assert_eq!(m0, 0.0);
            prop_assert!((v1 - v0).abs() < 1e-9 * v0.max(1.0));
        }
    }

    #[test]
    fn sampling_is_seeded(n in 2usize..8, seed in any::<u64>()) {
        let dag = random_tr_dag(n, 0.5, seed).unwrap();
        let cbn = random_discrete_cbn(&dag, 3, 0.0, seed).unwrap();
        let spec = InterventionSpec::single(0, 0);
        prop_assert_eq!(cbn.sample(&spec, 50, seed).unwrap(), cbn.sample(&spec, 50, seed).unwrap());
        let net = random_asgn(&dag, seed).unwrap();
        let spec = ContinuousIntervention::single(0, 1.0);
        prop_assert_eq!(net.sample(&spec, 50, seed).unwrap(), net.sample(&spec, 50, seed).unwrap());
    }
}

proptest! {
    #[test]
    fn planner_is_monotone(
        gamma in 0.001..0.5f64,
        scale in 1.01..4.0f64,
        n in 2usize..200,
        r in 2usize..8,
        delta in 0.001..0.5f64,
        alpha in 0.5..1.0f64,
    ) {
        let m = |inputs, n, delta| plan_samples(inputs, n, delta).unwrap().m_per_distribution;
        let d = |gamma, r| PlanInputs::Discrete { gamma, r };
        let cont = |sigma_ub| PlanInputs::Continuous { sigma_ub };
        let base = m(d(gamma, r), n, delta);
        prop_assert!(m(d(gamma * scale, r), n, delta) <= base);
        prop_assert!(m(d(gamma, r), n + 1, delta) >= base);
        prop_assert!(m(d(gamma, r + 1), n, delta) >= base);
        prop_assert!(m(d(gamma, r), n, delta / scale) >= base);
        let imperfect = PlanInputs::DiscreteImperfect { gamma, r, alpha };
        prop_assert!(m(imperfect, n, delta) >= base);
        let sigma_ub = gamma * 100.0;
        let c = m(cont(sigma_ub), n, delta);
        prop_assert!(m(cont(sigma_ub * scale), n, delta) >= c);
        prop_assert!(m(cont(sigma_ub), n + 1, delta) >= c);
        let plan = plan_samples(d(gamma, r), n, delta).unwrap();
        prop_assert_eq!(plan.m_per_query, plan.m_per_distribution * r as u64);
    }
}
