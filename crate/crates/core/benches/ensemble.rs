use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use toomdtc::ensemble::{map_indexed, map_indexed_sequential};
use toomdtc::lattice::{build_lattice, LatticeKind};
use toomdtc::protocol::{run_trajectory_rng, Init, ProtocolParams, RecordOptions};
use toomdtc::rng::stream_rng;

fn trajectory(p: &ProtocolParams, i: usize) -> f64 {
    let mut rng = stream_rng(5, 0, i as u32);
    let r = run_trajectory_rng(p, &Init::AllPlus, &mut rng, RecordOptions::default()).unwrap();
    *r.magnetization.last().unwrap()
}

fn ensembles(c: &mut Criterion) {
    let mut g = c.benchmark_group("ensemble");
    g.sample_size(10);
    for l in [6usize, 10] {
        let lat = Arc::new(build_lattice(LatticeKind::SquarePeriodic, (l, l)).unwrap());
        let p = ProtocolParams::fig1(lat, 100);
        let n = 64;
        g.bench_with_input(BenchmarkId::new("parallel", l), &p, |b, p| {
            b.iter(|| black_box(map_indexed(n, |i| trajectory(p, i))))
        });
        g.bench_with_input(BenchmarkId::new("sequential", l), &p, |b, p| {
            b.iter(|| black_box(map_indexed_sequential(n, |i| trajectory(p, i))))
        });
    }
    g.finish();
}

criterion_group!(benches, ensembles);
criterion_main!(benches);
