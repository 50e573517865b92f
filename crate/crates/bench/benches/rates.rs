use criterion::{criterion_group, criterion_main, Criterion};
use mdrepair::closed_form::two_node_optimal;
use mdrepair::explorer::{three_node_optimal, OptimizerConfig};
use mdrepair::{theorem3_rates, theorem4_rates, ChannelParams, LayerParams};
use mdrepair_bench::spec;
use std::hint::black_box;

fn entropy(c: &mut Criterion) {
    let three = ChannelParams::new(3, vec![LayerParams::new(0.8, 0.5, 0.2)], 0.9);
    let four = ChannelParams::new(4, vec![LayerParams::new(0.8, 0.5, 0.2); 3], 0.9);
    c.bench_function("theorem3 n=3", |b| b.iter(|| theorem3_rates(black_box(&three)).unwrap()));
    c.bench_function("theorem4 n=4", |b| b.iter(|| theorem4_rates(black_box(&four)).unwrap()));
}

fn optimizers(c: &mut Criterion) {
    let s = spec(0.3, 0.15);
    let cfg = OptimizerConfig::default();
    c.bench_function("two-node optimum", |b| b.iter(|| two_node_optimal(black_box(&s)).unwrap()));
    c.bench_function("three-node optimum", |b| b.iter(|| three_node_optimal(black_box(&s), &cfg).unwrap()));
}

criterion_group!(benches, entropy, optimizers);
criterion_main!(benches);
