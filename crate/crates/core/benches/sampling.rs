use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use paf_core::expr::{is_zero, Chart, Scalar};
use paf_core::flags::constant_type_check;
use paf_core::sample::{Exec, SampleConfig};
use paf_core::system::{bundled, SystemSpec};

fn zero_test(c: &mut Criterion) {
    let chart = Chart::new("X", &["x1", "x2", "x3"]).unwrap();
    // sin² + cos² − 1 is not recognized symbolically, so every sample is evaluated.
    let s = Scalar::parse("sin(x1*x2 + x3)^2 + cos(x1*x2 + x3)^2 - 1 + exp(x1)*(x2^3 - x2^3)", &chart).unwrap();
    let mut group = c.benchmark_group("zero_test");
    for samples in [200, 2000] {
        for (label, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
            let cfg = SampleConfig::default().with_samples(samples).with_exec(exec);
            group.bench_with_input(BenchmarkId::new(label, samples), &cfg, |b, cfg| {
                b.iter(|| is_zero(black_box(&s), &chart, cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn boat_constant_type(c: &mut Criterion) {
    let spec = SystemSpec::parse(bundled("boat").unwrap()).unwrap();
    let f = spec.system.distribution;
    let mut group = c.benchmark_group("boat_constant_type");
    for (label, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        let cfg = SampleConfig::default().with_samples(1000).with_exec(exec);
        group.bench_function(label, |b| b.iter(|| constant_type_check(black_box(&f), &cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, zero_test, boat_constant_type);
criterion_main!(benches);
