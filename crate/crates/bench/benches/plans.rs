use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use latsearch::{
    audit_plan, build_flow, generalize_to_any_k, plan_with_speeds, run_trials, solve_min_cost,
    LatticePoint, LedgerEntry, PodGrid, Scheduler, SchedulerConfig,
};
use num_rational::Ratio;

fn plans(c: &mut Criterion) {
    let mut g = c.benchmark_group("plan");
    for k in [1usize, 4, 8] {
        g.bench_with_input(BenchmarkId::new("uniform", k), &k, |b, &k| {
            b.iter(|| generalize_to_any_k(k, black_box(40)).unwrap())
        });
    }
    let speeds = [Ratio::new(1, 1), Ratio::new(1, 2), Ratio::new(1, 3)];
    g.bench_function("speeds_1_half_third", |b| b.iter(|| plan_with_speeds(&speeds, black_box(20)).unwrap()));
    g.finish();

    let plan = generalize_to_any_k(4, 40).unwrap();
    c.bench_function("audit/k4_n40", |b| b.iter(|| audit_plan(black_box(&plan), 40).unwrap()));
}

fn flow(c: &mut Criterion) {
    let entries: Vec<LedgerEntry> = (0..40)
        .map(|i| LedgerEntry {
            id: i,
            center: LatticePoint::new((i as i64 * 7) % 23, (i as i64 * 11) % 19),
            old: if i % 2 == 0 { 3 } else { 0 },
            new: if i % 2 == 0 { 0 } else { 3 },
        })
        .collect();
    c.bench_function("flow/40_supercells", |b| {
        b.iter(|| solve_min_cost(&build_flow(black_box(&entries), 60).unwrap()).unwrap())
    });
}

fn grid() -> PodGrid {
    let weights = (0..32 * 32).map(|i| 1.0 + ((i * 37) % 11) as f64).collect();
    PodGrid::new(32, 32, weights, 0.5).unwrap()
}

fn scheduler(c: &mut Criterion) {
    let config = SchedulerConfig::new(8);
    c.bench_function("scheduler/32x32_8_robots", |b| {
        b.iter(|| {
            let mut s = Scheduler::new(grid(), &config).unwrap();
            while s.step().is_some() {}
            s.residual_total()
        })
    });
    c.bench_function("montecarlo/200_trials", |b| {
        b.iter(|| run_trials(&grid(), &config, 200, 7, Some(1)).unwrap())
    });
}

criterion_group!(benches, plans, flow, scheduler);
criterion_main!(benches);
