use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gpcq_core::schur::{central_projectors, eigenbasis, enumerate_frames, DecodeFamily, Limits};
use gpcq_core::{causal_capacity, inner_maximize_q, CausalOptions, DensityOperator, Distribution, StateChannel};
use num_complex::Complex64;

fn plus() -> DensityOperator {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DensityOperator::pure(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap()
}

fn defects() -> StateChannel {
    let d = |a: f64| DensityOperator::from_diagonal(&[a, 1.0 - a]).unwrap();
    let labels = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
    StateChannel::new(
        labels(3),
        labels(2),
        Distribution::new(vec![0.6, 0.2, 0.2]).unwrap(),
        vec![d(1.0), d(0.0), d(1.0), d(1.0), d(0.0), d(0.0)],
    )
    .unwrap()
    .0
}

fn bench_central(c: &mut Criterion) {
    let limits = Limits::default();
    for (d, n) in [(2, 6), (2, 8), (3, 5)] {
        let frames = enumerate_frames(d, n);
        c.bench_function(&format!("central_projectors d={d} n={n}"), |b| {
            b.iter(|| central_projectors(d, black_box(&frames), n, &limits).unwrap())
        });
    }
}

fn bench_inner(c: &mut Criterion) {
    let ensemble = vec![DensityOperator::basis_state(2, 0), plus(), DensityOperator::from_diagonal(&[0.3, 0.7]).unwrap()];
    c.bench_function("inner_maximize_q qubit x3", |b| {
        b.iter(|| inner_maximize_q(black_box(&ensemble), 1e-6, 100_000, None).unwrap())
    });
}

fn bench_causal(c: &mut Criterion) {
    let ch = defects();
    c.bench_function("causal_capacity defects", |b| {
        b.iter(|| causal_capacity(black_box(&ch), &CausalOptions::default()).unwrap())
    });
}

fn bench_decode(c: &mut Criterion) {
    let a = DensityOperator::from_diagonal(&[0.9, 0.1]).unwrap();
    let b = plus();
    let avg = DensityOperator::mixture(&[0.5, 0.5], &[&a, &b]).unwrap();
    let basis = eigenbasis(&avg);
    let ensemble = vec![a, b];
    let family = DecodeFamily::new(&ensemble, &basis, 0.2, 8, &Limits::default()).unwrap();
    let u = [0, 1, 0, 1, 1, 0, 0, 1];
    c.bench_function("decode_projector family n=8", |bch| {
        bch.iter(|| DecodeFamily::new(black_box(&ensemble), &basis, 0.2, 8, &Limits::default()).unwrap())
    });
    c.bench_function("decode_projector frame n=8", |bch| bch.iter(|| family.frame_projector(black_box(&u)).unwrap()));
}

criterion_group!(benches, bench_central, bench_inner, bench_causal, bench_decode);
criterion_main!(benches);
