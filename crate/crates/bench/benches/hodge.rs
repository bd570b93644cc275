use bchodge::cohomology::{cohomology, Theory};
use bchodge::{fixtures, Bidegree, HermitianMetric, Hodge};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn laplacians(c: &mut Criterion) {
    let model = fixtures::iwasawa();
    let metric = HermitianMetric::identity(3);
    let hodge = Hodge::new(&model, &metric).unwrap();
    c.bench_function("iwasawa laplacian_bc (1,1)", |b| {
        b.iter(|| black_box(hodge.laplacian_bc(Bidegree::new(1, 1))))
    });
    c.bench_function("iwasawa laplacian_a (1,1)", |b| {
        b.iter(|| black_box(hodge.laplacian_a(Bidegree::new(1, 1))))
    });
    c.bench_function("iwasawa harmonic BC (1,1)", |b| {
        b.iter(|| {
            let lap = hodge.laplacian_bc(Bidegree::new(1, 1));
            black_box(hodge.harmonic_space(&lap).dim())
        })
    });
}

fn cohomology_tables(c: &mut Criterion) {
    let model = fixtures::iwasawa();
    let metric = HermitianMetric::identity(3);
    let hodge = Hodge::new(&model, &metric).unwrap();
    c.bench_function("iwasawa full BC table", |b| {
        b.iter(|| {
            for p in 0..=3 {
                for q in 0..=3 {
                    black_box(cohomology(&hodge, Theory::BottChern, Bidegree::new(p, q)).unwrap());
                }
            }
        })
    });
}

fn cone_solver(c: &mut Criterion) {
    let model = fixtures::kodaira_thurston();
    let metric = fixtures::kt_standard_metric();
    let hodge = Hodge::new(&model, &metric).unwrap();
    c.bench_function("kodaira-thurston skt feasibility", |b| {
        b.iter(|| black_box(bchodge::cones::skt_cone_feasibility(&hodge, metric.omega(), 7).unwrap()))
    });
}

criterion_group!(benches, laplacians, cohomology_tables, cone_solver);
criterion_main!(benches);
