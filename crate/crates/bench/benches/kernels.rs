use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use slra::gaussian::{detect_small_s, gen_planted, DetectParams};
use slra::instances::{planted_block, planted_spectral};
use slra::krylov::{sparse_spectral_lra, ChebyshevPoly, SpectralParams};
use slra::linalg::singular_values;
use slra::sketch::{stream_of, CountSketch, CountSketchConfig};
use slra::streaming::{Algo, StreamContext};
use slra_bench::gaussian;

fn dense(c: &mut Criterion) {
    let mut g = c.benchmark_group("dense");
    for n in [20usize, 60] {
        let a = gaussian(n, n, 1);
        g.bench_with_input(BenchmarkId::new("singular_values", n), &a, |b, a| b.iter(|| singular_values(black_box(a))));
    }
    let p = ChebyshevPoly::new(33, 1.0, 0.04).unwrap();
    g.bench_function("chebyshev_eval_q33", |b| b.iter(|| p.eval(black_box(1.02))));
    g.finish();
}

fn sketches(c: &mut Criterion) {
    let mut g = c.benchmark_group("sketch");
    let cfg = CountSketchConfig::new(10_000, 64, 37, 3).unwrap();
    g.bench_function("countsketch_update_r37", |b| {
        let mut cs = CountSketch::new(cfg);
        let mut i = 0u64;
        b.iter(|| {
            i = (i + 7919) % 10_000;
            cs.update(black_box(i), 1.5);
        })
    });
    let (a, _) = planted_block(24, 24, 2, &[5.0], 0.1, 2);
    let updates = stream_of(&a);
    for algo in [Algo::Net, Algo::Rel] {
        g.bench_function(format!("ingest_24x24_{algo:?}").to_lowercase(), |b| {
            b.iter(|| {
                let mut ctx = StreamContext::new(algo, 24, 24, 2, 1, 0.5, 4).unwrap();
                ctx.ingest_all(black_box(&updates)).unwrap();
                ctx
            })
        });
    }
    g.finish();
}

fn algorithms(c: &mut Criterion) {
    let mut g = c.benchmark_group("algorithms");
    g.sample_size(10);
    let p = planted_spectral(120, 120, 4, 3, 1.05, 5);
    g.bench_function("sparse_spectral_lra_120", |b| {
        b.iter(|| sparse_spectral_lra(black_box(&p.a), &SpectralParams::new(3, 4, 0.2, 5)).unwrap())
    });
    let (a, _) = planted_block(40, 40, 2, &[5.0], 0.1, 6);
    let mut ctx = StreamContext::new(Algo::Rel, 40, 40, 2, 1, 0.25, 6).unwrap();
    ctx.ingest_all(&stream_of(&a)).unwrap();
    ctx.finalize();
    g.bench_function("rel_err_recover_40", |b| b.iter(|| ctx.rel_err_recover().unwrap()));
    let inst = gen_planted(128, 2, 1, 128f64.sqrt(), 7).unwrap();
    let params = DetectParams::default();
    g.bench_function("detect_small_s_128", |b| b.iter(|| detect_small_s(black_box(&inst.a), 2, 1, 7, &params)));
    g.finish();
}

criterion_group!(benches, dense, sketches, algorithms);
criterion_main!(benches);
