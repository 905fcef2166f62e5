use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use lptv::simulation::Waveform;
use lptv::{invert, oracle_invert_cycled, reconstruct, stability_report, DVector, SignalSpec};
use lptv_bench::feedthrough_plant;

fn bench_inversion(c: &mut Criterion) {
    let mut group = c.benchmark_group("invert");
    for period in [2usize, 4, 8, 16] {
        let sys = feedthrough_plant(period, 4, 2, 7);
        group.bench_with_input(BenchmarkId::new("closed_form", period), &sys, |b, sys| {
            b.iter(|| invert(black_box(sys)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dense_oracle", period), &sys, |b, sys| {
            b.iter(|| oracle_invert_cycled(black_box(sys)).unwrap())
        });
    }
    group.finish();
}

fn bench_stability(c: &mut Criterion) {
    let mut group = c.benchmark_group("stability_report");
    for period in [2usize, 8, 16] {
        let inv = invert(&feedthrough_plant(period, 4, 2, 11)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(period), &inv, |b, inv| {
            b.iter(|| stability_report(black_box(inv), lptv::DEFAULT_STAB_TOL))
        });
    }
    group.finish();
}

fn bench_reconstruct(c: &mut Criterion) {
    let sys = feedthrough_plant(4, 4, 2, 3);
    let inv = invert(&sys).unwrap();
    let u = SignalSpec::uniform(
        Waveform::Sine {
            amplitude: 1.0,
            frequency: 0.05,
            phase: 0.0,
        },
        2,
    );
    let x0 = DVector::from_element(4, 1.0);
    let zeta0 = DVector::zeros(4);
    c.bench_function("reconstruct_1000_steps", |b| {
        b.iter(|| reconstruct(&sys, &inv, &u, &x0, &zeta0, black_box(1000)).unwrap())
    });
}

criterion_group!(benches, bench_inversion, bench_stability, bench_reconstruct);
criterion_main!(benches);
