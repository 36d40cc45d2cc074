use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use cbnlearn::asgn::ContinuousIntervention;
use cbnlearn::discrete::InterventionSpec;
use cbnlearn::learner::{learn_tr, oracle_path};
use cbnlearn::queries::{path_query_continuous, path_query_discrete, BatchedDiscrete};
use cbnlearn_bench::{continuous_net, discrete_net, sparse_dag};

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("ancestral_sampling");
    let m = 10_000;
    let cbn = discrete_net(20, 1);
    let net = continuous_net(20, 1);
    group.throughput(Throughput::Elements((m * 20) as u64));
    group.bench_function("discrete_n20", |b| {
        b.iter(|| cbn.sample(&InterventionSpec::single(0, 1), m, black_box(7)).unwrap())
    });
    group.bench_function("continuous_n20", |b| {
        b.iter(|| net.sample(&ContinuousIntervention::single(0, 1.0), m, black_box(7)).unwrap())
    });
    group.finish();
}

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact");
    for n in [10, 20] {
        let cbn = discrete_net(n, 2);
        group.bench_with_input(BenchmarkId::new("gamma", n), &cbn, |b, cbn| b.iter(|| cbn.compute_gamma().unwrap()));
    }
    group.finish();
}

fn queries(c: &mut Criterion) {
    let mut group = c.benchmark_group("path_query");
    let cbn = discrete_net(20, 3);
    let net = continuous_net(20, 3);
    let order = cbn.dag().topological_order().unwrap();
    let (i, j) = (order[0], order[19]);
    group.bench_function("discrete_m5000", |b| {
        b.iter(|| path_query_discrete(&cbn, i, j, 5000, 0.005, black_box(1)).unwrap())
    });
    group.bench_function("continuous_m5000", |b| {
        b.iter(|| path_query_continuous(&net, i, j, 5000, 10.0, black_box(1)).unwrap())
    });
    group.finish();
}

fn learning(c: &mut Criterion) {
    let mut group = c.benchmark_group("learn_tr");
    group.sample_size(10);
    for n in [20, 60] {
        let reach = sparse_dag(n, 4).transitive_closure();
        group.bench_with_input(BenchmarkId::new("oracle", n), &reach, |b, reach| {
            b.iter(|| learn_tr(n, |i, j| oracle_path(reach, i, j)).unwrap())
        });
    }
    let cbn = discrete_net(15, 5);
    group.bench_function("discrete_batched_n15_m2000", |b| {
        b.iter(|| {
            let sampler = BatchedDiscrete::new(&cbn, black_box(9));
            // Far below the planned budget the estimate may be cyclic; only
            // the cost matters here.
            learn_tr(15, |i, j| path_query_discrete(&sampler, i, j, 2000, 0.005, 0)).ok()
        })
    });
    group.finish();
}

criterion_group!(benches, sampling, exact, queries, learning);
criterion_main!(benches);
