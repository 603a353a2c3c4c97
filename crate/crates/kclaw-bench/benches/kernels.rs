//! Benchmarks for the exact-arithmetic kernels on the hot path of a
//! construction run: convolution, characteristic polynomials, the
//! completion-expectation pipeline, root bracketing, and small
//! end-to-end builds.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use kclaw_core::builder::{construct, node_gram_poly, BuildState};
use kclaw_core::conv::rect_conv;
use kclaw_core::poly::RatPoly;
use kclaw_core::rat::{pow2, rat, ratio};
use kclaw_core::theta::{expected_completion, theta_hat, FrameDims};
use kclaw_core::verify::certify_ramanujan;
use kclaw_core::{ConvDims, RatMatrix};

fn spread_poly(deg: usize) -> RatPoly {
    let roots: Vec<_> = (0..deg).map(|r| ratio(r as i64, 2)).collect();
    RatPoly::from_roots(&roots)
}

fn bench_rect_conv(c: &mut Criterion) {
    let dims = ConvDims::new(12, 6).unwrap();
    let p = spread_poly(6);
    let q = spread_poly(6);
    c.bench_function("rect_conv_deg6", |b| {
        b.iter(|| rect_conv(black_box(&p), black_box(&q), dims).unwrap())
    });
}

fn bench_charpoly(c: &mut Criterion) {
    let m = RatMatrix::from_fn(8, 8, |i, j| rat(((i * 31 + j * 17) % 13) as i64 - 6));
    c.bench_function("determinant_8x8", |b| {
        b.iter(|| black_box(&m).determinant())
    });
    c.bench_function("charpoly_8x8", |b| b.iter(|| black_box(&m).charpoly()));
}

fn bench_theta_pipeline(c: &mut Criterion) {
    // Root node of (n=4, k=2): empty union, full averaged block.
    let state = BuildState::new(4, 2, 3).unwrap();
    let a_plus = RatMatrix::from_fn(8, 4, |_, _| ratio(1, 4));
    c.bench_function("theta_hat_8x4", |b| {
        b.iter(|| theta_hat(black_box(&a_plus), 2, 4, 0).unwrap())
    });
    let tab = theta_hat(&a_plus, 2, 4, 0).unwrap();
    let dims = FrameDims::new(8, 4, 7, 3).unwrap();
    c.bench_function("expected_completion_8x4", |b| {
        b.iter(|| expected_completion(black_box(&tab), &dims, 2).unwrap())
    });
    c.bench_function("node_gram_poly_root_4_2_3", |b| {
        b.iter(|| node_gram_poly(black_box(&state), None).unwrap())
    });
}

fn bench_max_root(c: &mut Criterion) {
    let poly = RatPoly::from_coeffs(vec![ratio(156, 5), rat(-12), rat(1)]);
    let tol = pow2(-64);
    c.bench_function("max_root_bracket_2e-64", |b| {
        b.iter(|| black_box(&poly).max_root(&tol).unwrap())
    });
}

fn bench_construct(c: &mut Criterion) {
    let mut g = c.benchmark_group("construct");
    g.sample_size(10);
    g.bench_function("construct_2_2_2", |b| {
        b.iter(|| construct(2, 2, 2).unwrap())
    });
    g.bench_function("construct_3_2_3", |b| {
        b.iter(|| construct(3, 2, 3).unwrap())
    });
    g.finish();
}

fn bench_certify(c: &mut Criterion) {
    let outcome = construct(3, 2, 3).unwrap();
    c.bench_function("certify_3_2_3", |b| {
        b.iter(|| certify_ramanujan(black_box(&outcome.graph), 3, 2, 3, 128).unwrap())
    });
}

criterion_group!(
    benches,
    bench_rect_conv,
    bench_charpoly,
    bench_theta_pipeline,
    bench_max_root,
    bench_construct,
    bench_certify
);
criterion_main!(benches);
