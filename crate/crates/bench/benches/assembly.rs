use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ltn_core::presets;
use ltn_core::solvers::{assemble_problem, solve};
use ltn_core::{BlendingShape, CouplingConfig, HorizonKind, Method};

fn cases(h: f64) -> Vec<(&'static str, CouplingConfig)> {
    let delta = 4.0 * h;
    vec![
        ("splice", presets::splice(delta, h)),
        ("blended", presets::blended(Method::Blended, BlendingShape::CubicSmooth, delta, h)),
        ("qnl", presets::qnl(delta, h)),
        ("shrinking_horizon", presets::shrinking(HorizonKind::SmoothC2, delta, h)),
        ("arlequin", presets::overlap(Method::Arlequin, 0.4, 0.6, delta, h)),
        ("partitioned_robin", presets::overlap(Method::PartitionedRobin, 0.4, 0.6, delta, h)),
    ]
}

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    for h in [0.01, 0.0025] {
        for (name, cfg) in cases(h) {
            let problem = cfg.prepare().unwrap();
            if !problem.method().is_operator_method() {
                continue;
            }
            group.bench_with_input(BenchmarkId::new(name, problem.grid.n_nodes), &problem, |b, p| {
                b.iter(|| assemble_problem(black_box(p), |_| 1.0, |_| 0.0).unwrap())
            });
        }
    }
    group.finish();
}

fn solving(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(20);
    for h in [0.01, 0.0025] {
        for (name, cfg) in cases(h) {
            let problem = cfg.prepare().unwrap();
            group.bench_with_input(BenchmarkId::new(name, problem.grid.n_nodes), &problem, |b, p| {
                b.iter(|| solve(black_box(p), |_| 1.0, |x| x).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, assembly, solving);
criterion_main!(benches);
