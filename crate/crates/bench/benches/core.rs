use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use ultracomp_core::gen::{self, EnvConstraints, Limits};
use ultracomp_core::model::rollout;
use ultracomp_core::ultrafilter::{GenericPoint, SetFilter};
use ultracomp_core::verify::run_suite;

fn bench_rollout(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let limits = Limits {
        min_horizon: 16,
        max_horizon: 16,
        ..Limits::default()
    };
    let env = gen::environment(&mut rng, EnvConstraints::NONE, &limits);
    let agent = gen::agent(&mut rng, 3, false);
    c.bench_function("rollout/horizon-16", |b| {
        b.iter(|| rollout(black_box(&agent), env.spec(), env.decisive_steps()))
    });
}

fn bench_compare(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let e = gen::electorate(&mut rng, EnvConstraints::NONE, &Limits::default());
    let a = gen::agent(&mut rng, 2, false);
    let b = gen::agent(&mut rng, 2, false);
    c.bench_function("electorate/compare", |bch| bch.iter(|| e.compare(black_box(&a), black_box(&b))));
    let agents: Vec<_> = (0..8).map(|_| gen::agent(&mut rng, 2, false)).collect();
    c.bench_function("electorate/rank-8", |bch| bch.iter(|| e.rank(black_box(&agents))));
}

fn bench_upset(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sets: Vec<_> = (0..64).map(|_| gen::upset(&mut rng)).collect();
    c.bench_function("upset/inter-union-complement", |b| {
        b.iter(|| {
            for w in sets.windows(2) {
                black_box(w[0].inter(&w[1]).union(&w[1].complement()));
            }
        })
    });
    let g = GenericPoint::new(42);
    c.bench_function("ultrafilter/generic-contains", |b| {
        b.iter(|| sets.iter().filter(|s| g.contains(s)).count())
    });
}

fn bench_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    group.bench_function("trichotomy-100", |b| b.iter(|| run_suite("trichotomy", 100, 0, None)));
    group.finish();
}

criterion_group!(benches, bench_rollout, bench_compare, bench_upset, bench_suite);
criterion_main!(benches);
