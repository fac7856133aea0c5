use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use hexlens_bench::{center_lens, cylinder, grid, params};
use hexlens_core::quality::{metric_fields, Metric, VertexAggregation};
use hexlens_core::render::composite::{composite_pixel, Fragment};
use hexlens_core::render::{render, Background, FragmentKind, Scene};
use hexlens_core::{build_lod, extract_sheets};

fn topology(c: &mut Criterion) {
    let mut group = c.benchmark_group("topology");
    group.sample_size(10);
    for n in [8, 16] {
        let mesh = grid(n);
        group.throughput(Throughput::Elements(mesh.num_cells() as u64));
        group.bench_with_input(BenchmarkId::new("sheets_grid", n), &mesh, |b, m| {
            b.iter(|| extract_sheets(black_box(m)))
        });
        let sheets = extract_sheets(&mesh);
        group.bench_with_input(BenchmarkId::new("lod_grid", n), &mesh, |b, m| {
            b.iter(|| build_lod(black_box(m), &sheets))
        });
    }
    let mesh = cylinder(1);
    let sheets = extract_sheets(&mesh);
    group.throughput(Throughput::Elements(mesh.num_cells() as u64));
    group.bench_function("lod_cylinder", |b| b.iter(|| build_lod(black_box(&mesh), &sheets)));
    group.finish();
}

fn quality(c: &mut Criterion) {
    let mesh = cylinder(1);
    let mut group = c.benchmark_group("quality");
    group.throughput(Throughput::Elements(mesh.num_cells() as u64));
    for (name, agg) in [("max", VertexAggregation::Max), ("weighted", VertexAggregation::VolumeWeighted)] {
        group.bench_function(name, |b| {
            b.iter(|| metric_fields(black_box(&mesh), &Metric::ScaledJacobian, agg).unwrap())
        });
    }
    group.finish();
}

fn frame(c: &mut Criterion) {
    let scene = Scene::build(cylinder(1), &Metric::ScaledJacobian, VertexAggregation::Max).unwrap();
    let mut group = c.benchmark_group("render");
    group.sample_size(10);
    for (w, h) in [(320, 180), (640, 360)] {
        let p = params(w, h);
        let lens = center_lens(&p);
        group.throughput(Throughput::Elements(u64::from(w * h)));
        group.bench_function(BenchmarkId::new("cylinder", format!("{w}x{h}")), |b| {
            b.iter(|| render(&scene, &p, &lens, None).unwrap())
        });
    }
    group.finish();
}

fn compositing(c: &mut Criterion) {
    let mut group = c.benchmark_group("composite");
    for n in [8usize, 64, 256] {
        let frags: Vec<Fragment> = (0..n)
            .map(|i| {
                let h = (i as u32).wrapping_mul(2_654_435_761);
                Fragment {
                    depth: (h % 1000) as f32 / 1000.0,
                    seq: i as u32,
                    color: [0.5, (h % 7) as f32 / 7.0, 0.25],
                    alpha: 0.05 + (h % 5) as f32 / 50.0,
                    kind: FragmentKind::ContextFace,
                }
            })
            .collect();
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &frags, |b, f| {
            b.iter(|| composite_pixel(black_box(f), Background::Black.rgb()))
        });
    }
    group.finish();
}

criterion_group!(benches, topology, quality, frame, compositing);
criterion_main!(benches);
