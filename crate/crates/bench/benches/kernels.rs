use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use krcrit::asymptotics::{type2_disk_solve, type2_disk_thresholds};
use krcrit::critical::{newton_refine, problem_for, SearchConfig};
use krcrit::greens::mfs_fit;
use krcrit::{Domain, DomainSpec, MfsConfig, Point2};

fn greens(c: &mut Criterion) {
    let ellipse = DomainSpec::Ellipse { delta: 0.05, alpha1: 1.0, alpha2: 0.0 };
    let mfs = MfsConfig::default();
    c.bench_function("mfs_fit_ellipse", |b| b.iter(|| mfs_fit(black_box(&Domain::Plain(ellipse.clone())), &mfs).unwrap()));
    let model = mfs_fit(&Domain::Plain(ellipse), &mfs).unwrap();
    let (x, y) = (Point2::new(0.1, 0.2), Point2::new(-0.3, 0.1));
    c.bench_function("h_eval_ellipse", |b| b.iter(|| model.h(black_box(x), black_box(y))));
}

fn kr(c: &mut Criterion) {
    let prob = problem_for(DomainSpec::unit_disk(), Point2::new(0.3, 0.0), 1e-4, 2.0, 1.0, &MfsConfig::default()).unwrap();
    let (x, y) = (Point2::new(0.1, 0.2), Point2::new(-0.3, 0.1));
    c.bench_function("kr_derivs_punctured_disk", |b| b.iter(|| prob.derivs(black_box(x), black_box(y)).unwrap()));
    let cfg = SearchConfig::default();
    let seed = (Point2::new(0.11, 0.0), Point2::new(0.38, 0.0));
    c.bench_function("newton_refine_type3", |b| b.iter(|| newton_refine(&prob, black_box(seed), &cfg).unwrap()));
}

fn disk_type2(c: &mut Criterion) {
    c.bench_function("type2_disk_solve", |b| b.iter(|| type2_disk_solve(black_box(0.97), 1.0, 1.0).unwrap()));
    c.bench_function("type2_disk_thresholds", |b| b.iter(|| type2_disk_thresholds(black_box(2.0), 1.0).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = greens, kr, disk_type2
}
criterion_main!(benches);
