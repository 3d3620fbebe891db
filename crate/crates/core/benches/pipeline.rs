//! Sequential versus parallel execution of the main pipeline stages.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sardrt::accel::Ray;
use sardrt::imaging::{render, shade, trace, Geometry, RadarConfig, RangeBinning};
use sardrt::learn::{backward, learn, loss_sim, AdamConfig, LearnConfig, LossConfig, OptimState, View};
use sardrt::scatter::{DoubleScale, Polarization, PsdKind, WaveConfig};
use sardrt::scene::{shapes, BsdfParams, ParamMap, Vec3};
use sardrt::Execution;

const MODES: [(&str, Execution); 2] =
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn radar() -> RadarConfig {
    RadarConfig {
        wave: WaveConfig::new(9.6e9, Polarization::Hh, PsdKind::Gaussian).unwrap(),
        start_pos: Vec3::new(-6.0, -30.0, 30.0),
        end_pos: Vec3::new(6.0, -30.0, 30.0),
        num_azimuth: 24,
        alpha0: 40f64.to_radians(),
        alpha1: 50f64.to_radians(),
        num_angle_bins: 40,
        range_res: 0.25,
        azimuth_res: 0.5,
        spua: 16,
        seed: 1,
        range_window: None,
    }
}

fn scene() -> (Geometry, ParamMap) {
    let plane = shapes::grid_plane(0.0, 0.0, 0.0, 16.0, 32);
    let mesh = plane.merge(&shapes::gable_building(
        Vec3::new(-2.0, -1.5, 0.0),
        Vec3::new(2.0, 1.5, 2.5),
        1.2,
    ));
    let params = ParamMap::uniform(mesh.num_vertices(), BsdfParams::new(0.005, 0.01, 25.0, 0.5));
    (Geometry::new(mesh).unwrap(), params)
}

fn bench_render(c: &mut Criterion) {
    let (geom, params) = scene();
    let r = radar();
    let model = DoubleScale { wave: r.wave };
    let mut g = c.benchmark_group("render");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("trace+shade", name), |b| {
            b.iter(|| render(&geom, &params, &r, exec).unwrap())
        });
        let traced = trace(&geom, &r, exec).unwrap();
        g.bench_function(BenchmarkId::new("shade", name), |b| {
            b.iter(|| shade(&traced, &geom.mesh, &params, &model, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_backward(c: &mut Criterion) {
    let (geom, params) = scene();
    let r = radar();
    let (img, ledger) = render(&geom, &params, &r, Execution::Parallel).unwrap();
    let reference = img.scaled(0.5);
    let (_, dl_di) = loss_sim(&img, &reference, &LossConfig::default(), 1).unwrap();
    c.bench_function("backward", |b| {
        b.iter(|| backward(&ledger, black_box(&dl_di), img.cols(), &geom.mesh).unwrap())
    });
}

fn bench_learn(c: &mut Criterion) {
    let (geom, truth) = scene();
    let views: Vec<View> = [0.0f64, 120.0, 240.0]
        .iter()
        .map(|a| {
            let r = radar().rotated_about(&Vec3::zeros(), a.to_radians());
            let reference = render(&geom, &truth, &r, Execution::Parallel).unwrap().0;
            View { radar: r, reference }
        })
        .collect();
    let init = ParamMap::uniform(truth.len(), BsdfParams::new(0.004, 0.012, 20.0, 0.5));
    let mut g = c.benchmark_group("learn_10_iters");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = LearnConfig {
            iters: 10,
            exec,
            ..Default::default()
        };
        g.bench_function(name, |b| {
            b.iter(|| {
                let mut p = init.clone();
                let mut st = OptimState::per_vertex(AdamConfig::default(), &mut p).unwrap();
                learn(&geom, p, &views, &[], &mut st, &cfg).unwrap()
            })
        });
    }
    g.finish();
}

fn bench_binning(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ranges: Vec<f64> = (0..1_000_000).map(|_| rng.random_range(0.0..100.0)).collect();
    let values: Vec<f64> = (0..ranges.len()).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut g = c.benchmark_group("binning_1e6");
    g.sample_size(20);
    g.bench_function("sort+segment_sum", |b| {
        b.iter(|| {
            let bins = RangeBinning::new(&ranges, 0.25, 100.0).unwrap();
            let mut profile = vec![0.0; bins.extent()];
            bins.accumulate(&values, &mut profile);
            profile
        })
    });
    let bins = RangeBinning::new(&ranges, 0.25, 100.0).unwrap();
    g.bench_function("segment_sum_cached", |b| {
        b.iter(|| {
            let mut profile = vec![0.0; bins.extent()];
            bins.accumulate(black_box(&values), &mut profile);
            profile
        })
    });
    g.finish();
}

fn bench_bvh(c: &mut Criterion) {
    let (geom, _) = scene();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rays: Vec<Ray> = (0..50_000)
        .map(|_| {
            let o = Vec3::new(rng.random_range(-10.0..10.0), -30.0, 30.0);
            let t = Vec3::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0), 0.0);
            Ray::new(o, t - o, f64::INFINITY).unwrap()
        })
        .collect();
    let mut g = c.benchmark_group("nearest_hit_50k");
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| {
                exec.map_slice(&rays, |r| sardrt::accel::intersect_scene(&geom.bvh, &geom.mesh, r))
            })
        });
    }
    g.finish();
}

criterion_group!(benches, bench_render, bench_backward, bench_learn, bench_binning, bench_bvh);
criterion_main!(benches);
