use criterion::{black_box, criterion_group, criterion_main, Criterion};

use binembed::qubo::build_qubo_penalty;
use binembed::similarity::SimilarityKind;
use binembed_bench::{graph, params, scores};

fn criterion_benchmark(c: &mut Criterion) {
    let g = graph(100, 4.0);
    c.bench_function("similarity adjcy n=100", |b| {
        b.iter(|| scores(black_box(&g), SimilarityKind::Adjcy));
    });
    c.bench_function("similarity jac0 n=100", |b| {
        b.iter(|| scores(black_box(&g), SimilarityKind::Jac0));
    });
    let sim = scores(&g, SimilarityKind::Adjcy);
    let p = params(2);
    c.bench_function("build penalty n=100 k=2 adjcy", |b| {
        b.iter(|| build_qubo_penalty(black_box(&sim), 2, &p).unwrap());
    });
}

criterion_group!(benches, criterion_benchmark);
criterion_main!(benches);
