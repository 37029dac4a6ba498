//! Timings for the hot paths: the fixed-input dual solve, the full solver
//! with input search, the channel-entropy search, and the de Finetti
//! construction.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use thermch::entropy::{channel_entropy, OptimOpts};
use thermch::maxent::{solve_fixed_input, solve_thermal_channel, SolveOpts};
use thermch::schurweyl::definetti_state;
use thermch::InputState;
use thermch_bench::{qubit_replacer, qutrit_average_energy, random_qubit_channel};

fn bench_fixed_input_solve(c: &mut Criterion) {
    let problem = qubit_replacer();
    let phi = InputState::maximally_mixed(2);
    let opts = SolveOpts::default();
    c.bench_function("solve_fixed_input/qubit_replacer", |b| {
        b.iter(|| solve_fixed_input(black_box(&problem), &phi, &opts).unwrap())
    });
}

fn bench_full_solve(c: &mut Criterion) {
    let opts = SolveOpts::default();
    let qubit = qubit_replacer();
    c.bench_function("solve_thermal_channel/qubit_replacer", |b| {
        b.iter(|| solve_thermal_channel(black_box(&qubit), &opts).unwrap())
    });
    let qutrit = qutrit_average_energy();
    let mut group = c.benchmark_group("solve_thermal_channel");
    group.sample_size(10);
    group.bench_function("qutrit_average_energy", |b| {
        b.iter(|| solve_thermal_channel(black_box(&qutrit), &opts).unwrap())
    });
    group.finish();
}

fn bench_channel_entropy(c: &mut Criterion) {
    let n = random_qubit_channel();
    let opts = OptimOpts::default();
    c.bench_function("channel_entropy/random_qubit", |b| {
        b.iter(|| channel_entropy(black_box(&n), &opts).unwrap())
    });
}

fn bench_definetti(c: &mut Criterion) {
    c.bench_function("definetti_state/d2_n3", |b| {
        b.iter(|| definetti_state(black_box(2), black_box(3)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_fixed_input_solve,
    bench_full_solve,
    bench_channel_entropy,
    bench_definetti
);
criterion_main!(benches);
