use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lastiter::certify::default_report;
use lastiter::pep::{build_pep, PepSpec};
use lastiter::sdp::{solve, to_sdpa, SolverSettings};
use lastiter::{random_monotone, run, FeasibleSet, MethodId, RunConfig, Vector};

fn methods(c: &mut Criterion) {
    let mut group = c.benchmark_group("run");
    for d in [4usize, 20] {
        let op = random_monotone(7, d, 1.0, 0.5).unwrap();
        let ball = FeasibleSet::new_ball(Vector::zeros(d), 1.0).unwrap();
        let x0 = Vector::from_element(d, 0.3);
        for (m, set) in [(MethodId::PEG, FeasibleSet::Unconstrained), (MethodId::ProjPEG, ball)] {
            let cfg = RunConfig::new(m, 0.25, 100, x0.clone());
            group.bench_with_input(BenchmarkId::new(m.name(), d), &cfg, |b, cfg| {
                b.iter(|| run(black_box(&op), &set, cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn pep(c: &mut Criterion) {
    let mut group = c.benchmark_group("pep");
    group.sample_size(10);
    for n in [2usize, 4, 8] {
        let spec = PepSpec::new(MethodId::PEG, 1.0 / 3.0, 1.0, n);
        group.bench_with_input(BenchmarkId::new("build", n), &spec, |b, s| b.iter(|| build_pep(black_box(s)).unwrap()));
        let problem = build_pep(&spec).unwrap();
        let settings = SolverSettings::default().with_tol(1e-6);
        group.bench_with_input(BenchmarkId::new("solve", n), &problem, |b, p| {
            b.iter(|| solve(black_box(p), &settings).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sdpa", n), &problem, |b, p| b.iter(|| to_sdpa(black_box(p))));
    }
    group.finish();
}

fn certificates(c: &mut Criterion) {
    c.bench_function("certify/default_report", |b| b.iter(default_report));
}

criterion_group!(benches, methods, pep, certificates);
criterion_main!(benches);
