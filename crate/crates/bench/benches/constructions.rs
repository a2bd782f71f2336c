use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qdarwin_core::darwinism::correlation_check;
use qdarwin_core::games::{game_value, stage2_value, Game, RationalWeights};
use qdarwin_core::measurement::{measurement_unitary, PhaseAssignment};
use qdarwin_core::random::{random_basis, random_observable, random_phases, random_spectrum, seeded};
use qdarwin_core::{evolve, tensor_embed, CompositeSpace, HeisenbergState, MatrixUnitFamily, Spectrum};

fn matrix_units(c: &mut Criterion) {
    let mut group = c.benchmark_group("matrix units");
    for n in [2, 4, 8] {
        let basis = random_basis(&mut seeded(1), n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &basis, |b, basis| {
            b.iter(|| MatrixUnitFamily::from_basis(black_box(basis)).unwrap())
        });
    }
    group.finish();
}

fn measurement(c: &mut Criterion) {
    let mut group = c.benchmark_group("measurement");
    for n in [2, 4, 8] {
        let mut rng = seeded(2);
        let a1 = random_observable(&mut rng, n);
        let a2 = random_observable(&mut rng, n);
        let units = a2.matrix_units().unwrap();
        let phases = PhaseAssignment::square(n, random_phases(&mut rng, n * n)).unwrap();
        let space = CompositeSpace::pair(n, n).unwrap();
        group.bench_function(BenchmarkId::new("unitary", n), |b| {
            b.iter(|| measurement_unitary(a1.family(), &units, &phases, &space).unwrap())
        });
        let u = measurement_unitary(a1.family(), &units, &phases, &space).unwrap();
        let x = evolve(&tensor_embed(a1.matrix(), 0, &space).unwrap(), &u).unwrap();
        let y = evolve(&tensor_embed(a2.matrix(), 1, &space).unwrap(), &u).unwrap();
        group.bench_function(BenchmarkId::new("correlation check", n), |b| {
            b.iter(|| correlation_check(black_box(&x), black_box(&y), &space).unwrap())
        });
    }
    group.finish();
}

fn values(c: &mut Criterion) {
    let mut group = c.benchmark_group("values");
    group.sample_size(20);
    for counts in [vec![1, 2], vec![1, 1, 2], vec![2, 3, 3]] {
        let alpha = Spectrum::new(random_spectrum(&mut seeded(3), counts.len(), 2.0)).unwrap();
        let weights = RationalWeights::new(counts.clone()).unwrap();
        let m: usize = counts.iter().sum();
        group.bench_function(BenchmarkId::new("stage2", m), |b| {
            b.iter(|| stage2_value(&alpha, &weights).unwrap())
        });
    }
    for n in [2, 3, 4] {
        let mut rng = seeded(4);
        let game = Game::standard(HeisenbergState::maximally_mixed(n), random_observable(&mut rng, n)).unwrap();
        group.bench_function(BenchmarkId::new("game value", n), |b| b.iter(|| game_value(&game).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, matrix_units, measurement, values);
criterion_main!(benches);
