use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use tbf_bench::{desk, paths};
use tbf_core::beamspace::{sft_to_tb, transform_matrices};
use tbf_core::channel::{assemble_sft, draw_gains, SftTensor};
use tbf_core::baseline::{wknn_locate, DbEntry, FingerprintDatabase, Weighting, DEFAULT_K};
use tbf_core::fingerprint::{tbf_exact_with, tbf_monte_carlo_with, NoiseDomain};
use tbf_core::preprocess::{preprocess, DEFAULT_GAMMA};
use tbf_core::store::{decode, encode, TensorBlob};

fn transforms(c: &mut Criterion) {
    let (geom, cfg) = desk();
    c.bench_function("transform_matrices/desk", |b| b.iter(|| transform_matrices(black_box(&geom), &cfg).unwrap()));
}

fn beam_domain(c: &mut Criterion) {
    let (geom, cfg) = desk();
    let t = transform_matrices(&geom, &cfg).unwrap();
    let mp = paths(12, &cfg);
    let gains = draw_gains(&mp.variances(), 1, 1).unwrap();
    let h = assemble_sft(&mp, gains.row(0).as_slice().unwrap(), &geom, &cfg).unwrap();
    let dense = SftTensor::Dense(h.to_dense().unwrap());
    let mut g = c.benchmark_group("sft_to_tb");
    g.bench_function("factored/12-path", |b| b.iter(|| sft_to_tb(black_box(&h), &t).unwrap()));
    g.sample_size(20);
    g.bench_function("dense/12-path", |b| b.iter(|| sft_to_tb(black_box(&dense), &t).unwrap()));
    g.finish();
}

fn fingerprints(c: &mut Criterion) {
    let (geom, cfg) = desk();
    let t = transform_matrices(&geom, &cfg).unwrap();
    let mp = paths(12, &cfg);
    let mut g = c.benchmark_group("tbf");
    g.bench_function("exact/12-path", |b| b.iter(|| tbf_exact_with(black_box(&mp), &geom, &cfg, &t).unwrap()));
    g.bench_function("monte-carlo/noiseless/1000", |b| {
        b.iter(|| tbf_monte_carlo_with(&mp, &geom, &cfg, &t, 1000, 7, None, NoiseDomain::Beam).unwrap())
    });
    g.sample_size(10);
    g.bench_function("monte-carlo/beam-noise/100", |b| {
        b.iter(|| tbf_monte_carlo_with(&mp, &geom, &cfg, &t, 100, 7, Some(20.0), NoiseDomain::Beam).unwrap())
    });
    g.finish();
}

fn store(c: &mut Criterion) {
    let (geom, cfg) = desk();
    let f = tbf_exact_with(&paths(12, &cfg), &geom, &cfg, &transform_matrices(&geom, &cfg).unwrap()).unwrap();
    let blob = TensorBlob::from_f64(&f.data.clone().into_dyn()).unwrap();
    let bytes = encode(&blob);
    let mut g = c.benchmark_group("store");
    g.bench_function("encode/tbf", |b| b.iter(|| encode(black_box(&blob))));
    g.bench_function("decode/tbf", |b| b.iter(|| decode(black_box(&bytes)).unwrap()));
    g.finish();
}

fn wknn(c: &mut Criterion) {
    let (geom, cfg) = desk();
    let t = transform_matrices(&geom, &cfg).unwrap();
    let base = preprocess(&tbf_exact_with(&paths(12, &cfg), &geom, &cfg, &t).unwrap(), DEFAULT_GAMMA).unwrap();
    let features: Vec<f64> = base.x_ad.iter().copied().collect();
    let entries = (0..2000)
        .map(|i| DbEntry {
            position: [i as f64, 0.0, 1.5],
            direction_class: i % 16,
            features: features.iter().enumerate().map(|(j, x)| x * (1.0 + 1e-3 * ((i * 31 + j) % 17) as f64)).collect(),
        })
        .collect();
    let db = FingerprintDatabase { entries };
    c.bench_function("wknn/locate/2000", |b| b.iter(|| wknn_locate(&db, black_box(&features), DEFAULT_K, Weighting::InverseDistance).unwrap()));
}

criterion_group!(benches, transforms, beam_domain, fingerprints, store, wknn);
criterion_main!(benches);
