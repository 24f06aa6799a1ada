use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use kneser_bench::{group, interval, stride};
use kneser_core::{
    exhaustive_scan, kappa1, menger_fan, min_cut, proof_trace, sampled_scan, sumset, Digraph, GroupSubset,
    Kappa1Engine, MengerEngine,
};

fn bench_sumset(c: &mut Criterion) {
    let mut grp = c.benchmark_group("sumset");
    for n in [64usize, 512, 4096] {
        let g = group(&[n]);
        let a = stride(&g, 3);
        let b = interval(&g, n / 5);
        grp.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| {
            bch.iter(|| sumset(&g, black_box(&a), black_box(&b)).unwrap())
        });
    }
    grp.finish();
}

fn bench_kappa1(c: &mut Criterion) {
    let mut grp = c.benchmark_group("kappa1");
    let g = group(&[2, 8]);
    let s = GroupSubset::from_indices(&g, [0, 1, 2, 5]).unwrap();
    for (name, engine) in [("exhaustive", Kappa1Engine::Exhaustive), ("flow", Kappa1Engine::Flow)] {
        grp.bench_function(name, |bch| bch.iter(|| kappa1(&g, black_box(&s), engine).unwrap()));
    }
    let big = group(&[60]);
    let s = GroupSubset::from_indices(&big, [0, 1, 7, 20, 30]).unwrap();
    grp.bench_function("flow_z60", |bch| bch.iter(|| kappa1(&big, black_box(&s), Kappa1Engine::Flow).unwrap()));
    grp.finish();
}

fn bench_menger(c: &mut Criterion) {
    let mut grp = c.benchmark_group("menger");
    let g = group(&[31]);
    let s = GroupSubset::from_indices(&g, [0, 1, 5, 11, 17]).unwrap();
    let d = Digraph::cayley(&g, &s).unwrap();
    let (k, _) = min_cut(&d, 0, 3).unwrap().expect("no arc 0 -> 3");
    for (name, engine) in [("contraction", MengerEngine::Contraction), ("flow", MengerEngine::Flow)] {
        grp.bench_function(name, |bch| bch.iter(|| menger_fan(black_box(&d), 0, 3, k, engine).unwrap()));
    }
    grp.finish();
}

fn bench_scan(c: &mut Criterion) {
    let mut grp = c.benchmark_group("scan");
    grp.sample_size(10);
    let g = group(&[2, 4]);
    grp.bench_function("exhaustive_z2xz4", |bch| bch.iter(|| exhaustive_scan(&g, u128::MAX).unwrap()));
    let g = group(&[64]);
    grp.bench_function("sampled_z64_10k", |bch| bch.iter(|| sampled_scan(&g, 10_000, 1).unwrap()));
    grp.finish();
}

fn bench_trace(c: &mut Criterion) {
    let g = group(&[16]);
    let s = GroupSubset::from_indices(&g, [0, 1, 2, 8, 9, 10]).unwrap();
    c.bench_function("trace_z16_main", |bch| bch.iter(|| proof_trace(&g, black_box(&s), black_box(&s)).unwrap()));
}

criterion_group!(benches, bench_sumset, bench_kappa1, bench_menger, bench_scan, bench_trace);
criterion_main!(benches);
