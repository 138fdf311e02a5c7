use criterion::{black_box, criterion_group, criterion_main, Criterion};
use glc_bench::two_class;
use glc_core::coords::{encode, CoordinateSystemSpec, SystemKind};
use glc_core::cpcr::encode_dataset;
use glc_core::glc_l::{train, TrainConfig};
use glc_core::jl_bounds::verify_random_projection_at;
use glc_core::rules::{fsp_search, FspConfig};

fn encodings(c: &mut Criterion) {
    let d = two_class(500, 10);
    for kind in [SystemKind::ParallelCoords, SystemKind::Spc, SystemKind::CpcStars, SystemKind::InLine] {
        let system = CoordinateSystemSpec::default_for(kind, 10);
        c.bench_function(&format!("encode_{}", kind.name()), |b| {
            b.iter(|| {
                for x in d.rows() {
                    black_box(encode(x, &system, None).unwrap());
                }
            })
        });
    }
}

fn glc_l(c: &mut Criterion) {
    let d = two_class(400, 9);
    let cfg = TrainConfig {
        restarts: 4,
        max_iters: 200,
        ..TrainConfig::default()
    };
    c.bench_function("glcl_train_400x9", |b| b.iter(|| black_box(train(&d, &cfg).unwrap())));
}

fn fsp(c: &mut Criterion) {
    let d = two_class(400, 8);
    let cfg = FspConfig::default();
    c.bench_function("fsp_400x8", |b| b.iter(|| black_box(fsp_search(&d, None, &cfg).unwrap())));
}

fn jl(c: &mut Criterion) {
    let d = two_class(100, 200);
    c.bench_function("jl_verify_100x200_k60", |b| {
        b.iter(|| black_box(verify_random_projection_at(d.rows(), 60, 0.5, 4, 0).unwrap()))
    });
}

fn cpcr(c: &mut Criterion) {
    let d = two_class(1000, 10);
    c.bench_function("cpcr_encode_1000x10", |b| b.iter(|| black_box(encode_dataset(&d, 10).unwrap())));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = encodings, glc_l, fsp, jl, cpcr
}
criterion_main!(benches);
