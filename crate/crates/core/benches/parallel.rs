//! Serial pool vs the default rayon pool on the two hot paths. Build with
//! `--no-default-features` to bench the sequential fallback on its own.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use orthowg::exec::{run_with, Workers};
use orthowg::expansion::{moment_exact, DEFAULT_TERM_CAP};
use orthowg::matrix::{mc_moment, sample_rng};
use orthowg::verify::{example_expression, random_set};

fn pools() -> [(&'static str, Workers); 2] {
    [("serial", Workers::SERIAL), ("default", Workers(None))]
}

fn exact_expansion(c: &mut Criterion) {
    let e = example_expression();
    let set = random_set(&mut sample_rng(1, 0), 10, 8);
    let mut g = c.benchmark_group("moment_exact");
    g.sample_size(10);
    for (name, w) in pools() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &w, |b, &w| {
            b.iter(|| run_with(w, || moment_exact(&e, &set, DEFAULT_TERM_CAP).unwrap()))
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let e = example_expression();
    let set = random_set(&mut sample_rng(1, 0), 10, 8).to_f64();
    let mut g = c.benchmark_group("mc_moment");
    g.sample_size(10);
    for (name, w) in pools() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &w, |b, &w| {
            b.iter(|| run_with(w, || mc_moment(&e, &set, 5_000, 42).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, exact_expansion, monte_carlo);
criterion_main!(benches);
