use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use untangle_bench::{braids, untrained_model};
use untangle_core::agent::Solver;
use untangle_core::artin;

const CROSSINGS: [usize; 4] = [8, 12, 16, 20];

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    for crossings in CROSSINGS {
        let words = braids(crossings, 64, 7);
        group.bench_with_input(
            BenchmarkId::from_parameter(crossings),
            &words,
            |b, words| {
                b.iter(|| {
                    for w in words {
                        black_box(artin::is_trivial(black_box(w)));
                    }
                })
            },
        );
    }
    group.finish();
}

/// Fixed number of greedy steps, so the cost per step is comparable across rows.
fn policy(c: &mut Criterion) {
    let model = untrained_model(3);
    let solver = Solver::new(&model);
    let mut group = c.benchmark_group("policy_10_steps");
    for crossings in CROSSINGS {
        let words = braids(crossings, 64, 7);
        group.bench_with_input(
            BenchmarkId::from_parameter(crossings),
            &words,
            |b, words| {
                b.iter(|| {
                    for w in words {
                        black_box(solver.solve_steps(black_box(w), 10).unwrap());
                    }
                })
            },
        );
    }
    group.finish();
}

criterion_group!(benches, oracle, policy);
criterion_main!(benches);
