//! Benchmarks for the operations that dominate experiment wall time:
//! responding to challenge batches, building Hadamard sets, constructing
//! distance-targeted challenges, and fitting both learners.

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use puflab_core::{
    construct_challenge, hadamard_challenge_set, random_challenges, train_lr, train_svm,
    ArbiterPuf, CrpSet, TrainConfig,
};

const N: usize = 64;

fn respond_batch(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let puf = ArbiterPuf::sample(N, 1.0, &mut rng).unwrap();
    let challenges = random_challenges(N, 1000, &mut rng).unwrap();
    c.bench_function("respond_1000_challenges", |b| {
        b.iter(|| {
            for challenge in &challenges {
                black_box(puf.respond(black_box(challenge), &mut rng).unwrap());
            }
        })
    });
}

fn hadamard_set(c: &mut Criterion) {
    c.bench_function("hadamard_challenge_set_64", |b| {
        b.iter(|| black_box(hadamard_challenge_set(black_box(N), N).unwrap()))
    });
}

fn construct_distance_targeted(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let puf = ArbiterPuf::sample(N, 1.0, &mut rng).unwrap();
    let data = training_set(&puf, 200, &mut rng);
    let model = train_svm(&data, &TrainConfig::svm(), &mut rng)
        .unwrap()
        .model;
    c.bench_function("construct_challenge_k3", |b| {
        b.iter(|| black_box(construct_challenge(black_box(&model), 3.0, &mut rng).unwrap()))
    });
}

fn fit_learners(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let puf = ArbiterPuf::sample(N, 1.0, &mut rng).unwrap();
    let data = training_set(&puf, 500, &mut rng);

    let mut group = c.benchmark_group("fit_500_crps");
    group.sample_size(20);
    group.bench_function("svm", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        b.iter(|| black_box(train_svm(black_box(&data), &TrainConfig::svm(), &mut rng).unwrap()))
    });
    group.bench_function("lr", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        b.iter(|| black_box(train_lr(black_box(&data), &TrainConfig::lr(), &mut rng).unwrap()))
    });
    group.finish();
}

fn training_set(puf: &ArbiterPuf, count: usize, rng: &mut ChaCha8Rng) -> CrpSet {
    let challenges = random_challenges(puf.n(), count, rng).unwrap();
    CrpSet::from_pairs(
        puf.n(),
        challenges.into_iter().map(|c| {
            let r = puf.respond(&c, rng).unwrap();
            (c, r)
        }),
    )
    .unwrap()
}

criterion_group!(
    benches,
    respond_batch,
    hadamard_set,
    construct_distance_targeted,
    fit_learners
);
criterion_main!(benches);
