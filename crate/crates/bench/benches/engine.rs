use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fria_core::bridge::map_dpia_to_fria;
use fria_core::catalog::CatalogSet;
use fria_core::fixtures::{passport_assessment, passport_dpia, passport_profile, passport_risks};
use fria_core::necessity::evaluate_fria_necessity;
use fria_core::reporting::{export_assessment, import_assessment};
use fria_core::risk::apply_mitigations;
use fria_core::workflow;

fn engine(c: &mut Criterion) {
    let cats = CatalogSet::seed();
    let ie = "IE".parse().unwrap();
    let profile = passport_profile();
    let dpia = passport_dpia();
    let risks = passport_risks();
    let stage4 = passport_assessment(&cats, 4).unwrap();
    let closed = passport_assessment(&cats, 5).unwrap();
    let exported = export_assessment(&closed);

    c.bench_function("necessity/fria", |b| {
        b.iter(|| evaluate_fria_necessity(black_box(&profile), ie, &cats.conditions).unwrap())
    });
    c.bench_function("bridge/prefill", |b| b.iter(|| map_dpia_to_fria(black_box(&dpia), &cats.mapping)));
    c.bench_function("risk/mitigate", |b| {
        b.iter(|| {
            for r in &risks {
                black_box(apply_mitigations(r, &cats.matrix).unwrap());
            }
        })
    });
    c.bench_function("report/compile", |b| {
        b.iter(|| workflow::compile_report(black_box(&stage4), &cats, "bench").unwrap())
    });
    c.bench_function("document/export", |b| b.iter(|| export_assessment(black_box(&closed))));
    c.bench_function("document/import", |b| b.iter(|| import_assessment(black_box(&exported)).unwrap()));
    c.bench_function("passport/all-stages", |b| b.iter(|| passport_assessment(&cats, 5).unwrap()));
}

criterion_group!(benches, engine);
criterion_main!(benches);
