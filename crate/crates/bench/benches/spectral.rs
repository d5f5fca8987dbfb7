use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use kmsgraph::graph::RaySpec;
use kmsgraph::martin::{summability, SummabilityOptions};
use kmsgraph::spectral::{classify_beta_set, green_column, green_function, Controls};
use kmsgraph::VertexId;
use kmsgraph_bench::{car, golden, pascal};

fn green(c: &mut Criterion) {
    let g = pascal(12);
    let v0 = VertexId(0);
    let w = g.vertex("(5,6)").unwrap();
    let controls = Controls::default();
    c.bench_function("green pascal(12) single entry", |b| {
        b.iter(|| green_function(black_box(&g), 1.0, v0, w, &controls))
    });
    c.bench_function("green pascal(12) column", |b| b.iter(|| green_column(black_box(&g), 1.0, w, &controls)));
}

fn temperature(c: &mut Criterion) {
    let g = golden();
    c.bench_function("beta set golden", |b| b.iter(|| classify_beta_set(black_box(&g))));
}

fn rays(c: &mut Criterion) {
    let g = car(40);
    let ray: RaySpec = "car-left".parse().unwrap();
    let opts = SummabilityOptions { ray_len: 32, ..SummabilityOptions::default() };
    let controls = Controls::default();
    c.bench_function("summability car(40) beta=2", |b| {
        b.iter(|| summability(black_box(&g), 2.0, VertexId(0), &ray, &opts, &controls))
    });
}

criterion_group!(benches, green, temperature, rays);
criterion_main!(benches);
