use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lipwidth_core::relu::{
    default_grid_per_axis, forward, lip_bound, verify_lipschitz, ReLUNetConfig, Sampling,
};

fn relu(c: &mut Criterion) {
    let mut g = c.benchmark_group("relu");
    for (d, w, n) in [(1usize, 2usize, 2usize), (2, 3, 3), (3, 3, 5)] {
        let net = ReLUNetConfig::new(d, w, n).unwrap();
        let id = format!("d{d}_w{w}_n{n}");
        let y: Vec<f64> = (0..net.param_count())
            .map(|i| ((i * 37 % 101) as f64 / 50.0) - 1.0)
            .collect();
        let x = vec![0.5; d];
        g.bench_with_input(BenchmarkId::new("forward", &id), &net, |b, net| {
            b.iter(|| forward(net, black_box(&y), black_box(&x)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("lip_bound", &id), &net, |b, net| {
            b.iter(|| lip_bound(black_box(net)))
        });
        g.bench_with_input(BenchmarkId::new("verify_200_pairs", &id), &net, |b, net| {
            b.iter(|| {
                verify_lipschitz(net, 1, 200, default_grid_per_axis(d), Sampling::Full).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, relu);
criterion_main!(benches);
