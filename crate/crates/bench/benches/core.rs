use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qcertify_core::certify::run_trial;
use qcertify_core::chernoff::{classical_chernoff, dephasing_qcb, minimal_error_probability, quantum_chernoff_bound};
use qcertify_core::design::SegmentTable;
use qcertify_core::{
    CertificationConfig, Channel, DensityMatrix, DephasingGate, DephasingParams, LikelihoodModel, ModelKind,
    ParticleFilter, PriorPair, Spec, UtilityKind,
};

fn dephased(gamma: f64) -> DensityMatrix {
    DephasingGate::new(DephasingParams::new(0.0, gamma, 1.0).unwrap()).apply(&DensityMatrix::plus())
}

fn chernoff(c: &mut Criterion) {
    let (rho, tau) = (dephased(1.0), dephased(1.3));
    c.bench_function("quantum_chernoff_bound/mixed", |b| {
        b.iter(|| quantum_chernoff_bound(black_box(&rho), black_box(&tau)))
    });
    c.bench_function("dephasing_qcb", |b| b.iter(|| dephasing_qcb(black_box(1.0), black_box(0.3), 2)));
    c.bench_function("classical_chernoff", |b| b.iter(|| classical_chernoff(black_box(0.8), black_box(0.6))));

    let mut group = c.benchmark_group("minimal_error_probability");
    for n in [4u32, 8] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| minimal_error_probability(&rho, &tau, n, PriorPair::uniform()))
        });
    }
    group.finish();
}

fn design(c: &mut Criterion) {
    let model = LikelihoodModel::phase_gate();
    let f = ParticleFilter::init_uniform((-PI, PI), 2000, 1).unwrap();
    let mut group = c.benchmark_group("score_all");
    group.sample_size(20);
    for m in 1..=4 {
        let table = SegmentTable::new(&f, &model, m).unwrap();
        group.bench_with_input(BenchmarkId::new("MI", m), &m, |b, _| {
            b.iter(|| table.score_all(&f, UtilityKind::MutualInformation))
        });
        group.bench_with_input(BenchmarkId::new("VAR", m), &m, |b, _| {
            b.iter(|| table.score_all(&f, UtilityKind::Variance))
        });
    }
    group.finish();
}

fn filter(c: &mut Criterion) {
    let f = ParticleFilter::init_uniform((-PI, PI), 2000, 1).unwrap();
    let likelihoods: Vec<f64> = f.locations().iter().map(|x| 0.5 * (1.0 + x.cos())).collect();
    c.bench_function("particle_filter/update", |b| {
        b.iter_batched(
            || f.clone(),
            |mut f| {
                f.update(&likelihoods).unwrap();
                f
            },
            criterion::BatchSize::SmallInput,
        )
    });
    c.bench_function("particle_filter/resample", |b| {
        b.iter_batched(
            || f.clone(),
            |mut f| {
                f.resample();
                f
            },
            criterion::BatchSize::SmallInput,
        )
    });
}

fn trial(c: &mut Criterion) {
    let spec = Spec::new(PI / 10.0, PI / 18.0).unwrap();
    let mut group = c.benchmark_group("certification_trial");
    group.sample_size(10);
    for m in [1, 4] {
        let mut cfg = CertificationConfig::new(ModelKind::PhaseGate, PI / 10.0, spec);
        cfg.m = m;
        cfg.n0 = 60;
        group.bench_with_input(BenchmarkId::new("phase_gate_n0_60", m), &cfg, |b, cfg| {
            b.iter(|| run_trial(cfg, 3, 0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, chernoff, design, filter, trial);
criterion_main!(benches);
