use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use blab_core::operators::{berezin_of_operator, word_matrix};
use blab_core::par;
use blab_core::quadrature::{build_graded_grid, Resolution};
use blab_core::{Complex64, DomainSpec, KernelModel, OperatorWord};

fn berezin_points(c: &mut Criterion) {
    let d = DomainSpec::unit_disc();
    let m = KernelModel::analytic(d, 48);
    let word: OperatorWord = "green:0.3+0i".parse().unwrap();
    let t = word_matrix(&word, &m, Resolution::default(), 48).unwrap();
    let g = build_graded_grid(d, Resolution { panel_order: 16, n_panels: 2, n_angular: 64 }).unwrap();
    let pts: Vec<Complex64> = g.nodes.iter().copied().filter(|z| z.norm() < 0.8).collect();
    let eval = |i: usize| berezin_of_operator(&t, &m, pts[i]).unwrap();

    let mut group = c.benchmark_group("berezin_field");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("map", if par::is_parallel() { "rayon" } else { "sequential" }), |b| {
        b.iter(|| par::map(pts.len(), eval))
    });
    group.bench_function(BenchmarkId::new("map_seq", "sequential"), |b| b.iter(|| par::map_seq(pts.len(), eval)));
    group.finish();
}

fn toeplitz_gram(c: &mut Criterion) {
    let d = DomainSpec::unit_disc();
    let m = KernelModel::analytic(d, 32);
    let word: OperatorWord = "green:0.3+0.2i".parse().unwrap();
    let mut group = c.benchmark_group("toeplitz_gram");
    group.sample_size(10);
    group.bench_function(if par::is_parallel() { "rayon" } else { "sequential" }, |b| {
        b.iter(|| word_matrix(&word, &m, Resolution::default(), 32).unwrap())
    });
    group.finish();
}

criterion_group!(benches, berezin_points, toeplitz_gram);
criterion_main!(benches);
